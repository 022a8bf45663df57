"""Acceptance suite: one test per exit criterion, each printing a pass/fail
line (run with ``pytest tests/test_acceptance.py -v -s`` to see them inline).

Every tolerance is pinned here; symbolic criteria demand exact rational
equality, the simulation criteria use the stated float tolerances.
"""

import random
import time
from contextlib import contextmanager
from fractions import Fraction as F

import numpy as np
import pytest

from phs_forge.build import assemble_phs, mass_matrix, stiffness_matrix
from phs_forge.diffop import DiffOpMatrix, boundary_pairing_sum_form, ibp_residual, volume_mismatch
from phs_forge.exact import leading_minors, scalar_sign
from phs_forge.models import builtin_model, builtin_names, random_poly
from phs_forge.sections import IntervalSection, section_moment
from phs_forge.simulate import (
    GridSpec,
    boundary_traction_input,
    discretize,
    distributed_input,
    random_state,
    simulate,
)
from phs_forge.verify import check_limits_and_reductions, check_mutations, report_json, run_all


@contextmanager
def criterion(number: int, title: str, budget: float = None):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} [{title}]: FAIL")
        raise
    elapsed = time.perf_counter() - started
    print(f"ACCEPTANCE {number} [{title}]: PASS ({elapsed:.2f}s)")
    if budget is not None:
        assert elapsed < budget, f"criterion {number} exceeded its {budget}s budget: {elapsed:.1f}s"


def test_criterion_1_timoshenko_golden():
    with criterion(1, "Timoshenko golden structure", budget=1.0):
        rho, e_mod, g_mod, kappa = F(3), F(7), F(11), F(5, 6)
        area, inertia = F(2, 5), F(9, 4)
        model = builtin_model(
            "timoshenko",
            {"rho": rho, "E": e_mod, "G": g_mod, "kappa": kappa, "A": area, "I": inertia},
        )
        expected_op = DiffOpMatrix(
            2, 2, ("z1",), p0=[[0, 0], [-1, 0]], pk={(1, 1): [[1, 0], [0, 1]]}
        )
        assert model.op == expected_op
        sys_ = assemble_phs(model)
        assert sys_.mass == [[rho * inertia, F(0)], [F(0), rho * area]]
        assert sys_.stiffness == [[e_mod * inertia, F(0)], [F(0), kappa * g_mod * area]]
        assert sys_.j_block_strings() == [
            ["0", "0", "d1", "1"],
            ["0", "0", "0", "d1"],
            ["d1", "0", "0", "0"],
            ["-1", "d1", "0", "0"],
        ]


def test_criterion_2_reddy_plate_golden():
    with criterion(2, "Reddy plate mass/stiffness blocks", budget=1.0):
        h = F(1)
        assert section_moment(IntervalSection(h), 2) == F(1, 12)
        model = builtin_model("reddy_plate", {"h": h, "rho": 1, "E": 1, "nu": 0, "G": 1})
        ibar = {k: h ** (k + 1) / (2**k * (k + 1)) for k in (0, 2, 4, 6)}
        alpha = 4 / (3 * h**2)
        c1 = ibar[2] - 2 * alpha * ibar[4] + alpha**2 * ibar[6]
        c2 = alpha * (ibar[4] - alpha * ibar[6])
        c3 = alpha**2 * ibar[6]
        c4 = ibar[0] - 6 * alpha * ibar[2] + 9 * alpha**2 * ibar[4]
        mass = mass_matrix(model)
        zero = F(0)
        assert mass == [
            [c1, zero, zero, c2, zero],
            [zero, c1, zero, zero, c2],
            [zero, zero, ibar[0], zero, zero],
            [c2, zero, zero, c3, zero],
            [zero, c2, zero, zero, c3],
        ]
        cb = [[F(1), zero, zero], [zero, F(1), zero], [zero, zero, F(1, 2)]]
        stiff = stiffness_matrix(model)
        for a in range(3):
            for b in range(3):
                assert stiff[a][b] == c1 * cb[a][b]
                assert stiff[a][5 + b] == c2 * cb[a][b]
                assert stiff[5 + a][b] == c2 * cb[a][b]
                assert stiff[5 + a][5 + b] == c3 * cb[a][b]
        for a in (3, 4):
            for col in range(8):
                assert stiff[a][col] == (c4 if col == a else zero)


def test_criterion_3_adjoint_identity_and_mutations():
    with criterion(3, "boundary identity suite + mutation detection", budget=30.0):
        for name in builtin_names():
            model = builtin_model(name)
            rng = random.Random(f"acc3:{name}")
            degree = model.order + 2
            for _ in range(20):
                v = [random_poly(rng, model.dist, degree) for _ in range(model.m)]
                w = [random_poly(rng, model.dist, degree) for _ in range(model.n)]
                res = ibp_residual(model.op, v, w, model.domain)
                assert res == 0, (name, res)
                res_sum = volume_mismatch(model.op, v, w, model.domain) - (
                    boundary_pairing_sum_form(model.op, v, w, model.domain)
                )
                assert res_sum == 0, (name, res_sum)
        mutations = check_mutations(seed=3)
        assert len(mutations) >= 6
        assert all(m.ok for m in mutations), [
            (m.check_id, m.witness) for m in mutations if not m.ok
        ]


def test_criterion_4_reduction_identities():
    with criterion(4, "reduction identities (exact)"):
        results = check_limits_and_reductions()
        assert {r.check_id for r in results} == {
            "reduction:reddy-plate-to-mindlin",
            "reduction:rayleigh-to-euler-bernoulli",
            "reduction:torsion-two-strain",
        }
        assert all(r.ok for r in results), [(r.check_id, r.witness) for r in results]


STEEL_E = F(200) * 10**9
STEEL = {"E": STEEL_E, "nu": F(3, 10), "rho": 7850}
STEEL_G = STEEL_E / (2 * (1 + F(3, 10)))


def test_criterion_5_spd_with_physical_parameters():
    with criterion(5, "exact SPD at physical parameters"):
        phys = {
            "truss": {"E": STEEL_E, "rho": 7850, "b": F(1, 10), "h": F(1, 10)},
            "string": {"T": 1000, "rho": 7850, "A": F(1, 100)},
            "torsion": {"G": STEEL_G, "rho": 7850, "R": F(1, 20)},
            "timoshenko": {**STEEL, "kappa": F(5, 6), "b": F(1, 10), "h": F(1, 10)},
            "reddy_beam": {**STEEL, "b": F(1, 10), "h": F(1, 10)},
            "rayleigh_beam": {"E": STEEL_E, "rho": 7850, "b": F(1, 10), "h": F(1, 10)},
            "euler_bernoulli": {"E": STEEL_E, "rho": 7850, "b": F(1, 10), "h": F(1, 10)},
            "elasticity2d": {**STEEL, "h": F(1, 10)},
            "elasticity3d": dict(STEEL),
            "mindlin_plate": {**STEEL, "h": F(1, 10)},
            "reddy_plate": {**STEEL, "h": F(1, 10)},
            "kirchhoff_rayleigh": {"E": STEEL_E, "nu": F(3, 10), "rho": 7850, "h": F(1, 10)},
        }
        assert set(phys) == set(builtin_names())
        for name, params in phys.items():
            model = builtin_model(name, params)
            for matrix in (mass_matrix(model), stiffness_matrix(model)):
                minors = leading_minors(matrix)
                assert all(scalar_sign(x) > 0 for x in minors), (name, minors)


CONSERVATION_CASES = [
    ("string", (256,), {"left": "clamped", "right": "clamped"}),
    ("truss", (256,), {"left": "clamped", "right": "clamped"}),
    ("timoshenko", (128,), {"left": "clamped", "right": "free"}),
    ("rayleigh_beam", (128,), {"left": "clamped", "right": "clamped"}),
    ("euler_bernoulli", (128,), {"left": "clamped", "right": "clamped"}),
    ("elasticity2d", (24, 24), {"left": "clamped", "right": "free"}),
    ("mindlin_plate", (16, 16), {}),
    ("reddy_plate", (12, 12), {}),
]


def test_criterion_6_closed_system_conservation():
    with criterion(6, "conservation over 10^4 midpoint steps", budget=120.0):
        for name, cells, bc in CONSERVATION_CASES:
            sys_ = assemble_phs(builtin_model(name))
            dsys = discretize(sys_, GridSpec(cells), bc)
            state = random_state(dsys, seed=42)
            _, log = simulate(dsys, dt=1e-3, steps=10_000, state0=state)
            assert log.relative_drift <= 1e-10, (name, log.relative_drift)


def test_criterion_7_power_balance():
    with criterion(7, "per-step power balance with active ports"):
        dsys = discretize(
            assemble_phs(builtin_model("timoshenko")),
            GridSpec((128,)),
            {"left": "clamped", "right": "free"},
        )
        traction = boundary_traction_input(dsys, "right", "psi", lambda t: 0.4 * np.sin(7 * t))
        state = random_state(dsys, seed=9, amplitude=0.2)
        _, log = simulate(dsys, dt=1e-3, steps=1000, state0=state, inputs=[traction])
        scale = np.maximum(1.0, np.abs(log.energy[1:]))
        assert float(np.max(log.residual[1:] / scale)) <= 1e-10

        dsys2 = discretize(
            assemble_phs(builtin_model("truss")),
            GridSpec((256,)),
            {"left": "clamped", "right": "clamped"},
        )
        body_force = distributed_input(dsys2, 0, lambda t: np.cos(2 * t))
        _, log2 = simulate(dsys2, dt=1e-3, steps=1000, inputs=[body_force])
        scale2 = np.maximum(1.0, np.abs(log2.energy[1:]))
        assert float(np.max(log2.residual[1:] / scale2)) <= 1e-10


def test_criterion_8_verify_report_determinism():
    with criterion(8, "deterministic verification report"):
        blob1 = report_json(run_all(seed=7, trials=20), 7)
        blob2 = report_json(run_all(seed=7, trials=20), 7)
        assert blob1.encode("utf-8") == blob2.encode("utf-8")
        assert '"failures":0' in blob1
