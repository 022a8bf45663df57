"""Compilation stage: section moments, exact mass/stiffness, golden system
structures, boundary ports and the constant-skew alternative form."""

from fractions import Fraction as F

import pytest

from phs_forge.build import (
    BuildError,
    assemble_phs,
    boundary_pairing_value,
    boundary_port_map,
    export_system,
    hamiltonian_value,
    lagrangian_form,
    mass_matrix,
    stiffness_matrix,
)
from phs_forge.exact import ExactError, PiRat, leading_minors
from phs_forge.models import builtin_model
from phs_forge.poly import Poly, PolyMatrix
from phs_forge.sections import (
    CircleSection,
    IntervalSection,
    RectangleSection,
    section_moment,
)

STEEL = {"E": 200_000_000_000, "nu": F(3, 10), "kappa": F(5, 6), "rho": 7850}


def test_section_moment_interval():
    assert section_moment(IntervalSection(1), 2) == F(1, 12)
    h = F(1, 10)
    assert section_moment(IntervalSection(h), 2) == h**3 / 12
    assert section_moment(IntervalSection(1), 3) == 0


def test_section_moment_rectangle_iterated_oracle():
    b, h = F(2), F(3)
    sec = RectangleSection(b, h)
    # oracle: iterated exact integration of z3^2 over the rectangle
    z3 = Poly.variable(("z2", "z3"), "z3")
    expected = (
        (z3**2)
        .integrate("z2", -b / 2, b / 2)
        .integrate("z3", -h / 2, h / 2)
        .constant_value()
    )
    assert expected == b * h**3 / 12
    assert section_moment(sec, 2) == expected


def test_section_moment_circle_carries_pi():
    sec = CircleSection(1)
    assert section_moment(sec, 0) == PiRat(1, 1)  # area pi R^2
    assert section_moment(sec, 2) == PiRat(F(1, 4), 1)
    assert section_moment(sec, 3) == 0


def test_pi_scalar_arithmetic():
    a = PiRat(F(1, 2), 1)
    assert a + a == PiRat(1, 1)
    assert a * a == PiRat(F(1, 4), 2)
    assert a / a == F(1)
    assert float(PiRat(1, 1)) == pytest.approx(3.14159265358979, rel=1e-12)
    with pytest.raises(ExactError):
        _ = a + F(1)


def test_timoshenko_mass_and_stiffness_diagonal():
    p = dict(STEEL)
    p.update({"G": F(10**12, 13), "b": F(1, 2), "h": F(1, 3)})
    model = builtin_model("timoshenko", p)
    area = F(1, 2) * F(1, 3)
    inertia = F(1, 2) * F(1, 3) ** 3 / 12
    assert mass_matrix(model) == [
        [F(7850) * inertia, F(0)],
        [F(0), F(7850) * area],
    ]
    assert stiffness_matrix(model) == [
        [F(200_000_000_000) * inertia, F(0)],
        [F(0), F(5, 6) * F(10**12, 13) * area],
    ]


def test_truss_stiffness_is_axial_rigidity():
    model = builtin_model("truss", {"E": 7, "A": F(1, 4)})
    assert stiffness_matrix(model) == [[F(7, 4)]]


def test_rayleigh_stiffness_quarter_convention():
    model = builtin_model("rayleigh_beam")  # unit square section: I = 1/12
    assert stiffness_matrix(model) == [[F(1, 48)]]


def test_identity_column_mass_is_density_times_area():
    model = builtin_model("string", {"A": 1, "rho": F(3, 2)})
    assert mass_matrix(model) == [[F(3, 2)]]


def test_reddy_beam_mass_matches_moment_formula():
    model = builtin_model("reddy_beam")  # b = h = 1
    i = {k: F(1, 2**k * (k + 1)) for k in (0, 2, 4, 6)}
    alpha = F(4, 3)
    c1 = i[2] - 2 * alpha * i[4] + alpha**2 * i[6]
    c2 = alpha * (i[4] - alpha * i[6])
    c3 = alpha**2 * i[6]
    assert mass_matrix(model) == [
        [c1, F(0), c2],
        [F(0), i[0], F(0)],
        [c2, F(0), c3],
    ]
    assert c1 == F(17, 315) and c2 == F(4, 315) and c3 == F(1, 252)


def test_reddy_plate_matrices_match_block_formulas():
    model = builtin_model("reddy_plate", {"h": 1, "rho": 1, "E": 1, "nu": 0, "G": 1})
    i = {k: F(1, 2**k * (k + 1)) for k in (0, 2, 4, 6)}
    alpha = F(4, 3)
    c1 = i[2] - 2 * alpha * i[4] + alpha**2 * i[6]
    c2 = alpha * (i[4] - alpha * i[6])
    c3 = alpha**2 * i[6]
    c4 = i[0] - 6 * alpha * i[2] + 9 * alpha**2 * i[4]
    mass = mass_matrix(model)
    expected_mass = [
        [c1, 0, 0, c2, 0],
        [0, c1, 0, 0, c2],
        [0, 0, i[0], 0, 0],
        [c2, 0, 0, c3, 0],
        [0, c2, 0, 0, c3],
    ]
    assert mass == [[F(x) for x in row] for row in expected_mass]
    cb = [[F(1), F(0), F(0)], [F(0), F(1), F(0)], [F(0), F(0), F(1, 2)]]
    stiff = stiffness_matrix(model)
    for a in range(3):
        for b in range(3):
            assert stiff[a][b] == c1 * cb[a][b]
            assert stiff[a][5 + b] == c2 * cb[a][b]
            assert stiff[5 + a][b] == c2 * cb[a][b]
            assert stiff[5 + a][5 + b] == c3 * cb[a][b]
    assert stiff[3][3] == c4 and stiff[4][4] == c4
    assert stiff[3][4] == 0


def test_torsion_stiffness_is_polar_rigidity():
    model = builtin_model("torsion", {"G": 1, "R": 1, "rho": 1})
    assert stiffness_matrix(model) == [[PiRat(F(1, 2), 1)]]  # G * I_p


def test_mass_failure_surfaces_with_witness():
    model = builtin_model("timoshenko")
    one = Poly.constant(model.comp, 1)
    zero = Poly.zero(model.comp)
    # linearly dependent displacement columns: singular mass
    model.lambda1 = PolyMatrix([[one, one], [zero, zero], [zero, zero]])
    with pytest.raises(BuildError, match="positive definite"):
        mass_matrix(model)


def test_timoshenko_interconnection_golden():
    sys_ = assemble_phs(builtin_model("timoshenko"))
    assert sys_.j_block_strings() == [
        ["0", "0", "d1", "1"],
        ["0", "0", "0", "d1"],
        ["d1", "0", "0", "0"],
        ["-1", "d1", "0", "0"],
    ]


def test_euler_bernoulli_interconnection_golden():
    sys_ = assemble_phs(builtin_model("euler_bernoulli"))
    assert sys_.j_block_strings() == [["0", "-d1^2"], ["d1^2", "0"]]


def test_reddy_plate_operator_rows_golden():
    sys_ = assemble_phs(builtin_model("reddy_plate"))
    op = sys_.op
    rows = [[op.entry_str(r, c) for c in range(op.n)] for r in range(op.m)]
    assert rows == [
        ["d1", "0", "0", "0", "0"],
        ["0", "d2", "0", "0", "0"],
        ["d2", "d1", "0", "0", "0"],
        ["-1", "0", "d1", "0", "0"],
        ["0", "-1", "d2", "0", "0"],
        ["0", "0", "0", "d1", "0"],
        ["0", "0", "0", "0", "d2"],
        ["0", "0", "0", "d2", "d1"],
    ]
    assert len(sys_.state_labels) == 13


def test_adjoint_attached_is_formal_adjoint():
    for name in ("timoshenko", "rayleigh_beam", "reddy_plate"):
        sys_ = assemble_phs(builtin_model(name))
        assert sys_.op_adjoint == sys_.op.formal_adjoint()


@pytest.mark.parametrize(
    "name,params",
    [
        ("truss", {"E": 200_000_000_000, "rho": 7850, "b": F(1, 10), "h": F(1, 10)}),
        ("string", {"T": 1000, "rho": 7850, "A": F(1, 100)}),
        ("torsion", {"G": F(10**12, 13), "rho": 7850, "R": F(1, 20)}),
        ("timoshenko", {**STEEL, "G": F(10**12, 13), "b": F(1, 10), "h": F(1, 10)}),
        ("reddy_beam", {"E": 200_000_000_000, "G": F(10**12, 13), "rho": 7850, "b": F(1, 10), "h": F(1, 10)}),
        ("rayleigh_beam", {"E": 200_000_000_000, "rho": 7850, "b": F(1, 10), "h": F(1, 10)}),
        ("euler_bernoulli", {"E": 200_000_000_000, "rho": 7850, "b": F(1, 10), "h": F(1, 10)}),
        ("elasticity2d", {"E": 200_000_000_000, "nu": F(3, 10), "rho": 7850, "h": F(1, 10)}),
        ("elasticity3d", {"E": 200_000_000_000, "nu": F(3, 10), "rho": 7850}),
        ("mindlin_plate", {"E": 200_000_000_000, "nu": F(3, 10), "rho": 7850, "h": F(1, 10)}),
        ("reddy_plate", {"E": 200_000_000_000, "nu": F(3, 10), "rho": 7850, "h": F(1, 10)}),
        ("kirchhoff_rayleigh", {"E": 200_000_000_000, "nu": F(3, 10), "rho": 7850, "h": F(1, 10)}),
    ],
)
def test_spd_with_physical_parameters(name, params):
    model = builtin_model(name, params)
    mass = mass_matrix(model)
    stiff = stiffness_matrix(model)
    from phs_forge.exact import scalar_sign

    assert all(scalar_sign(x) > 0 for x in leading_minors(mass))
    assert all(scalar_sign(x) > 0 for x in leading_minors(stiff))


@pytest.mark.parametrize("name", sorted(__import__("phs_forge").builtin_names()))
def test_mass_and_stiffness_exactly_symmetric(name):
    model = builtin_model(name)
    from phs_forge.exact import is_symmetric

    assert is_symmetric(mass_matrix(model))
    assert is_symmetric(stiffness_matrix(model))


def test_constitutive_presets_spd_over_physical_ranges():
    from phs_forge.exact import check_spd
    from phs_forge.models import bending_shear_block, iso3d, plane_stress, shear_pair

    for nu in (F(-1, 2), F(0), F(3, 10), F(45, 100)):
        assert check_spd(plane_stress(F(3), nu))[0], nu
        assert check_spd(iso3d(F(3), nu))[0], nu
        assert check_spd(bending_shear_block(F(3), nu, F(2)))[0], nu
    assert check_spd(shear_pair(F(7)))[0]


def test_boundary_port_map_timoshenko_endpoints():
    sys_ = assemble_phs(builtin_model("timoshenko"))
    right = boundary_port_map(sys_, (1,))
    left = boundary_port_map(sys_, (-1,))
    assert right.u_matrix == [[F(1), F(0)], [F(0), F(1)]]
    assert left.u_matrix == [[F(-1), F(0)], [F(0), F(-1)]]
    assert right.y_labels == ["e_p1", "e_p2"]
    assert right.u_arg_labels == ["e_eps1", "e_eps2"]


def test_boundary_port_map_rejects_bad_normal():
    sys_ = assemble_phs(builtin_model("mindlin_plate"))
    with pytest.raises(BuildError):
        boundary_port_map(sys_, (1, 1))


def test_boundary_port_map_second_order_uses_jets():
    sys_ = assemble_phs(builtin_model("rayleigh_beam"))
    pm = boundary_port_map(sys_, (1,))
    assert pm.y_labels == ["e_p1", "e_p2", "d1 e_p1", "d1 e_p2"]
    assert pm.u_arg_labels == ["e_eps1", "d1 e_eps1"]
    assert len(pm.u_matrix) == 4 and len(pm.u_matrix[0]) == 2


def test_truss_boundary_pairing_sign():
    """Pairing value on constant co-energy fields is e_p e_eps at b minus at a."""
    sys_ = assemble_phs(builtin_model("truss"))
    x1 = ("z1",)
    e_p = [Poly.constant(x1, F(2))]
    e_eps = [Poly.constant(x1, F(5))]
    assert boundary_pairing_value(sys_, e_p, e_eps) == F(0)  # constants: b and a cancel
    z1 = Poly.variable(x1, "z1")
    e_p = [z1]
    assert boundary_pairing_value(sys_, e_p, e_eps) == F(5)  # 1*5 - 0*5


def test_lagrangian_form_truss_wave_stiffness():
    sys_ = assemble_phs(builtin_model("truss"))
    lf = lagrangian_form(sys_)
    z1 = Poly.variable(("z1",), "z1")
    out = lf.e_r([z1**3])
    # F*(K F u) = -EA u'' with EA = 1
    assert out == [-6 * z1]
    assert lf.j0 == [[F(0), F(-1)], [F(1), F(0)]]
    two_n = lagrangian_form(assemble_phs(builtin_model("timoshenko"))).j0
    assert two_n == [
        [F(0), F(0), F(-1), F(0)],
        [F(0), F(0), F(0), F(-1)],
        [F(1), F(0), F(0), F(0)],
        [F(0), F(1), F(0), F(0)],
    ]


def test_lagrangian_form_timoshenko_expansion():
    sys_ = assemble_phs(builtin_model("timoshenko"))
    lf = lagrangian_form(sys_)
    z1 = Poly.variable(("z1",), "z1")
    out = lf.e_r([z1**2, z1**3])
    ei = F(1, 12)
    kga = F(5, 6)
    # component 1: -d1(EI * 2 z1) - kGA * 2 z1^2 ; component 2: -d1(kGA 2 z1^2)
    assert out[0] == Poly.constant(("z1",), -2 * ei) + (-2 * kga) * z1**2
    assert out[1] == (-4 * kga) * z1


def test_lagrangian_zero_displacement_gives_zero_force():
    sys_ = assemble_phs(builtin_model("mindlin_plate"))
    lf = lagrangian_form(sys_)
    zeros = [Poly.zero(("z1", "z2")) for _ in range(3)]
    assert all(p.is_zero for p in lf.e_r(zeros))


def test_hamiltonian_value_string_constant_momentum():
    sys_ = assemble_phs(builtin_model("string"))
    x1 = ("z1",)
    p = [Poly.constant(x1, 1)]
    eps = [Poly.zero(x1)]
    assert hamiltonian_value(sys_, p, eps) == F(1, 2)


def test_export_structure_and_rational_pairs():
    sys_ = assemble_phs(builtin_model("timoshenko"))
    doc = export_system(sys_)
    assert doc["mass"][0][0] == [1, 12]
    assert doc["operator"]["terms"][0]["axis"] == 1
    assert doc["boundary"]["p_partial"]["n1"][0][0] == [1, 1]
    assert doc["state_labels"] == ["p1", "p2", "eps1", "eps2"]
    # pi-tagged entries carry a third slot
    tor = export_system(assemble_phs(builtin_model("torsion")))
    assert tor["mass"][0][0] == [1, 2, 1]
