"""Declarative kinematic models and the builtin catalogue.

A model is the input to the compiler: a displacement-field factor map
(lambda1), a strain factor map (lambda2) together with the matrix
differential operator it multiplies, a constitutive matrix, a density, and
the geometry (spatial domain plus cross-section).  Validation enforces the
structural conditions the compiler relies on: no zero columns in lambda1, no
zero rows or columns in lambda2 or the operator, a symmetric positive
definite constitutive matrix, and consistency of the declared factorization
with the actual small-strain tensor of the displacement field.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .diffop import DiffOpMatrix, DomainSpec
from .exact import check_spd, fr
from .poly import Poly, PolyMatrix
from .sections import (
    CircleSection,
    IntervalSection,
    MomentSection,
    PointSection,
    RectangleSection,
    Section,
)

ALL_COORDS = ("z1", "z2", "z3")


class ModelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Constitutive presets
# ---------------------------------------------------------------------------


def scalar_young(E) -> list:
    return [[fr(E)]]


def shear_pair(G) -> list:
    G = fr(G)
    return [[G, Fraction(0)], [Fraction(0), G]]


def string_tension(T, A) -> list:
    return [[fr(T) / fr(A)]]


def plane_stress(E, nu) -> list:
    E, nu = fr(E), fr(nu)
    f = E / (1 - nu**2)
    return [
        [f, f * nu, Fraction(0)],
        [f * nu, f, Fraction(0)],
        [Fraction(0), Fraction(0), f * (1 - nu) / 2],
    ]


def iso3d(E, nu) -> list:
    E, nu = fr(E), fr(nu)
    mu = E / (2 * (1 + nu))
    lam = nu * E / ((1 + nu) * (1 - 2 * nu))
    c = [[Fraction(0)] * 6 for _ in range(6)]
    for i in range(3):
        for j in range(3):
            c[i][j] = lam + (2 * mu if i == j else Fraction(0))
        c[3 + i][3 + i] = mu
    return c


def bending_shear_block(E, nu, G) -> list:
    """5x5 block diag(plane-stress bending, transverse shear)."""
    cb = plane_stress(E, nu)
    G = fr(G)
    out = [[Fraction(0)] * 5 for _ in range(5)]
    for i in range(3):
        for j in range(3):
            out[i][j] = cb[i][j]
    out[3][3] = G
    out[4][4] = G
    return out


CONSTITUTIVE_PRESETS = {
    "scalar_young": (scalar_young, ("E",)),
    "shear_pair": (shear_pair, ("G",)),
    "string_tension": (string_tension, ("T", "A")),
    "plane_stress": (plane_stress, ("E", "nu")),
    "iso3d": (iso3d, ("E", "nu")),
    "bending_shear_block": (bending_shear_block, ("E", "nu", "G")),
}


# ---------------------------------------------------------------------------
# Model container
# ---------------------------------------------------------------------------

# How each generalized-displacement component relates to the model's free
# fields: ("free", j) takes free field j as-is, ("d", j, k) differentiates it
# once along axis k.  Needed to generate admissible test displacement fields
# for models whose unknowns include slopes of other unknowns.
RComp = Tuple


@dataclass
class KinematicModel:
    name: str
    dist: Tuple[str, ...]
    comp: Tuple[str, ...]
    domain: DomainSpec
    section: Section
    lambda1: PolyMatrix
    lambda2: PolyMatrix
    op: DiffOpMatrix
    cmat: list
    rho: Fraction
    bd: Optional[list] = None
    params: Dict[str, Fraction] = field(default_factory=dict)
    r_names: Tuple[str, ...] = ()
    free_fields: Tuple[str, ...] = ()
    structure: Tuple[RComp, ...] = ()
    # Reduced models (obtained by deleting momenta/rescaling strains from a
    # parent with more unknowns) have no standalone displacement
    # factorization; their strain check is inherited from the parent.
    strain_check: bool = True

    def __post_init__(self):
        if not self.r_names:
            self.r_names = tuple(f"r{i + 1}" for i in range(self.n))
        if not self.structure:
            self.free_fields = self.r_names
            self.structure = tuple(("free", i) for i in range(self.n))

    @property
    def n(self) -> int:
        return self.op.n

    @property
    def m(self) -> int:
        return self.op.m

    @property
    def d(self) -> int:
        return len(self.cmat)

    @property
    def ell(self) -> int:
        return len(self.dist)

    @property
    def order(self) -> int:
        return self.op.order

    def sample_r(self, rng: random.Random, degree: int) -> List[Poly]:
        """Random admissible generalized displacements over all of X."""
        free = [random_poly(rng, self.dist, degree).extend(ALL_COORDS) for _ in self.free_fields]
        out = []
        for comp_spec in self.structure:
            if comp_spec[0] == "free":
                out.append(free[comp_spec[1]])
            else:
                _, j, axis = comp_spec
                out.append(free[j].diff(self.dist[axis - 1]))
        return out

    def describe(self) -> str:
        return (
            f"{self.name}: ell={self.ell} N={self.order} n={self.n} "
            f"m={self.m} d={self.d}"
        )


def random_poly(rng: random.Random, coords: Sequence[str], degree: int) -> Poly:
    """Random polynomial with integer coefficients in {-3..3}."""
    coords = tuple(coords)
    terms = {}
    for exps in _exponents_up_to(len(coords), degree):
        c = rng.randint(-3, 3)
        if c:
            terms[exps] = Fraction(c)
    p = Poly(coords, terms)
    if p.is_zero:
        one = (0,) * len(coords)
        p = Poly(coords, {one: Fraction(1)})
    return p


def _exponents_up_to(arity: int, degree: int):
    if arity == 0:
        yield ()
        return
    for head in range(degree + 1):
        for tail in _exponents_up_to(arity - 1, degree - head):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationCheck:
    check_id: str
    ok: bool
    detail: str


@dataclass
class ValidationReport:
    model: str
    checks: List[ValidationCheck]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> List[ValidationCheck]:
        return [c for c in self.checks if not c.ok]

    def __str__(self):
        lines = [f"validation of {self.model}:"]
        for c in self.checks:
            lines.append(f"  [{'ok' if c.ok else 'FAIL'}] {c.check_id}: {c.detail}")
        return "\n".join(lines)


def full_voigt_strain(u: Sequence[Poly]) -> List[Poly]:
    """All six engineering strain components of a 3-vector displacement."""
    d = lambda p, name: p.diff(name)
    u1, u2, u3 = u
    return [
        d(u1, "z1"),
        d(u2, "z2"),
        d(u3, "z3"),
        d(u1, "z2") + d(u2, "z1"),
        d(u1, "z3") + d(u3, "z1"),
        d(u2, "z3") + d(u3, "z2"),
    ]


def validate_model(
    model: KinematicModel,
    seed: int = 0,
    trials: int = 5,
    relax: Sequence[str] = (),
) -> ValidationReport:
    checks: List[ValidationCheck] = []
    relax = set(relax)

    def add(check_id: str, ok: bool, detail: str):
        if check_id in relax:
            return
        checks.append(ValidationCheck(check_id, ok, detail))

    # coordinate partition
    overlap = set(model.dist) & set(model.comp)
    known = set(model.dist) | set(model.comp) <= set(ALL_COORDS)
    add(
        "coordinate-partition",
        not overlap and known,
        "distributed and complementary sets are disjoint subsets of (z1, z2, z3)"
        if not overlap and known
        else f"bad coordinate split: dist={model.dist} comp={model.comp}",
    )

    # lambda1 columns
    bad_cols = [j + 1 for j in range(model.lambda1.cols) if model.lambda1.col_is_zero(j)]
    add(
        "lambda1-columns",
        not bad_cols,
        "no zero columns" if not bad_cols else f"zero column(s) {bad_cols} in lambda1",
    )

    # lambda2 rows/cols
    bad = []
    bad += [f"row {i + 1}" for i in range(model.lambda2.rows) if model.lambda2.row_is_zero(i)]
    bad += [f"col {j + 1}" for j in range(model.lambda2.cols) if model.lambda2.col_is_zero(j)]
    add(
        "lambda2-rows-cols",
        not bad,
        "no zero rows or columns" if not bad else f"zero {', '.join(bad)} in lambda2",
    )

    # operator rows/cols
    bad = []
    bad += [f"row {i + 1}" for i in range(model.m) if model.op.row_is_zero(i)]
    bad += [f"col {j + 1}" for j in range(model.n) if model.op.col_is_zero(j)]
    add(
        "operator-rows-cols",
        not bad,
        "no zero rows or columns" if not bad else f"zero {', '.join(bad)} in operator",
    )

    # shapes
    shape_ok = (
        model.lambda1.rows == 3
        and model.lambda1.cols == model.n
        and model.lambda2.rows == model.d
        and model.lambda2.cols == model.m
    )
    add(
        "shapes",
        shape_ok,
        "lambda1 is 3 x n and lambda2 is d x m"
        if shape_ok
        else (
            f"lambda1 {model.lambda1.rows}x{model.lambda1.cols} (want 3x{model.n}), "
            f"lambda2 {model.lambda2.rows}x{model.lambda2.cols} (want {model.d}x{model.m})"
        ),
    )

    # constitutive matrix
    ok, detail = check_spd(model.cmat)
    add("constitutive-spd", ok, detail)

    # strain factorization consistency
    if shape_ok:
        if model.strain_check:
            ok, detail = _strain_consistency(model, seed, trials)
            add("strain-consistency", ok, detail)
        else:
            add(
                "strain-consistency",
                True,
                "skipped: reduced model, factorization validated on its parent",
            )

    return ValidationReport(model.name, checks)


def _strain_consistency(model: KinematicModel, seed: int, trials: int):
    rng = random.Random(seed)
    degree = model.order + 2
    rows: List[int] = []
    samples = []
    for _ in range(trials):
        r = model.sample_r(rng, degree)
        u = model.lambda1.apply(r)
        voigt = full_voigt_strain(u)
        rhs = model.lambda2.apply(model.op.apply(r))
        samples.append((voigt, rhs))
        for i, p in enumerate(voigt):
            if not p.is_zero and i not in rows:
                rows.append(i)
    rows.sort()
    if len(rows) != model.d:
        return False, (
            f"displacement field produces {len(rows)} nonzero strain components "
            f"(voigt indices {[i + 1 for i in rows]}), but d = {model.d}"
        )
    for t, (voigt, rhs) in enumerate(samples):
        for j, i in enumerate(rows):
            if voigt[i] != rhs[j]:
                return False, (
                    f"trial {t + 1}: strain component {j + 1} (voigt {i + 1}) "
                    f"mismatch: field gives {voigt[i]}, factorization gives {rhs[j]}"
                )
    return True, f"factorization matches voigt components {[i + 1 for i in rows]} on {trials} fields"


# ---------------------------------------------------------------------------
# Builtin catalogue
# ---------------------------------------------------------------------------


def _merge_params(defaults: Dict[str, str], params: Optional[Dict]) -> Dict[str, Fraction]:
    out = {k: fr(v) for k, v in defaults.items()}
    for k, v in (params or {}).items():
        if k not in defaults:
            raise ModelError(f"unknown parameter {k!r}; expected one of {sorted(defaults)}")
        out[k] = fr(v)
    return out


def _require_positive(p: Dict[str, Fraction], *names: str):
    for name in names:
        if p[name] <= 0:
            raise ModelError(f"parameter {name} must be positive, got {p[name]}")


def _shear_modulus(p: Dict[str, Fraction]) -> Fraction:
    if p.get("G", 0) != 0:
        return p["G"]
    if p.get("nu", 0) != 0:
        return p["E"] / (2 * (1 + p["nu"]))
    raise ModelError("supply G or nu")


def _beam_section(p: Dict[str, Fraction]) -> Section:
    """Circle when R is set, abstract moments when A is set (I optional),
    otherwise the rectangle b x h."""
    if p.get("R", 0) > 0:
        return CircleSection(p["R"])
    if p.get("A", 0) > 0:
        moments = {0: p["A"]}
        if p.get("I", 0) > 0:
            moments[2] = p["I"]
        return MomentSection(moments)
    return RectangleSection(p["b"], p["h"])


def _interval_domain() -> DomainSpec:
    return DomainSpec.interval(0, 1)


def _rect_domain() -> DomainSpec:
    return DomainSpec.rectangle(0, 1, 0, 1)


_Z = Fraction(0)
_ONE = Fraction(1)


def _poly_rows(coords, rows) -> PolyMatrix:
    out = []
    for r in rows:
        row = []
        for e in r:
            row.append(e if isinstance(e, Poly) else Poly.constant(coords, e))
        out.append(row)
    return PolyMatrix(out)


def _truss(params):
    p = _merge_params({"E": 1, "rho": 1, "A": 1, "I": 0, "b": 0, "h": 0, "R": 0}, params)
    _require_positive(p, "E", "rho")
    comp = ("z2", "z3")
    lam1 = _poly_rows(comp, [[1], [0], [0]])
    lam2 = _poly_rows(comp, [[1]])
    op = DiffOpMatrix(1, 1, ("z1",), pk={(1, 1): [[1]]})
    return KinematicModel(
        "truss",
        ("z1",),
        comp,
        _interval_domain(),
        _beam_section(p),
        lam1,
        lam2,
        op,
        scalar_young(p["E"]),
        p["rho"],
        bd=[[_ONE]],
        params=p,
        r_names=("u1",),
    )


def _string(params):
    p = _merge_params({"T": 1, "rho": 1, "A": 1, "b": 0, "h": 0, "R": 0, "I": 0}, params)
    _require_positive(p, "T", "rho")
    comp = ("z2", "z3")
    lam1 = _poly_rows(comp, [[0], [0], [1]])
    lam2 = _poly_rows(comp, [[1]])
    op = DiffOpMatrix(1, 1, ("z1",), pk={(1, 1): [[1]]})
    section = _beam_section(p)
    area = section.integrate(Poly.constant(section.coords, 1))
    return KinematicModel(
        "string",
        ("z1",),
        comp,
        _interval_domain(),
        section,
        lam1,
        lam2,
        op,
        string_tension(p["T"], area),
        p["rho"],
        params=p,
        r_names=("w",),
    )


def _torsion(params):
    p = _merge_params({"G": 1, "rho": 1, "R": 1, "b": 0, "h": 0}, params)
    _require_positive(p, "G", "rho")
    comp = ("z2", "z3")
    z2 = Poly.variable(comp, "z2")
    z3 = Poly.variable(comp, "z3")
    lam1 = _poly_rows(comp, [[0], [z3], [-z2]])
    lam2 = PolyMatrix([[z3], [-z2]])
    op = DiffOpMatrix(1, 1, ("z1",), pk={(1, 1): [[1]]})
    if p.get("R", 0) > 0:
        section: Section = CircleSection(p["R"])
    else:
        section = RectangleSection(p["b"], p["h"])
    return KinematicModel(
        "torsion",
        ("z1",),
        comp,
        _interval_domain(),
        section,
        lam1,
        lam2,
        op,
        shear_pair(p["G"]),
        p["rho"],
        params=p,
        r_names=("theta",),
    )


def torsion_two_strain(params=None) -> KinematicModel:
    """Reference fixture: torsion with the shear strains kept separate
    (m = 2); aggregates to the reduced builtin through the polar moment."""
    base = _torsion(params)
    comp = base.comp
    z2 = Poly.variable(comp, "z2")
    z3 = Poly.variable(comp, "z3")
    lam2 = PolyMatrix([[z3, Poly.zero(comp)], [Poly.zero(comp), -z2]])
    op = DiffOpMatrix(2, 1, ("z1",), pk={(1, 1): [[1], [1]]})
    return KinematicModel(
        "torsion_two_strain",
        base.dist,
        comp,
        base.domain,
        base.section,
        base.lambda1,
        lam2,
        op,
        base.cmat,
        base.rho,
        params=base.params,
        r_names=("theta",),
    )


def _timoshenko(params):
    p = _merge_params(
        {"E": 1, "G": 0, "nu": 0, "kappa": "5/6", "rho": 1, "b": 1, "h": 1, "A": 0, "I": 0, "R": 0},
        params,
    )
    p["G"] = p["G"] if (p["G"] != 0 or p["nu"] != 0) else Fraction(1)
    p["G"] = _shear_modulus(p)
    _require_positive(p, "E", "G", "kappa", "rho")
    comp = ("z2", "z3")
    z3 = Poly.variable(comp, "z3")
    zero = Poly.zero(comp)
    one = Poly.constant(comp, 1)
    lam1 = PolyMatrix([[-z3, zero], [zero, zero], [zero, one]])
    lam2 = PolyMatrix([[-z3, zero], [zero, one]])
    op = DiffOpMatrix(
        2,
        2,
        ("z1",),
        p0=[[0, 0], [-1, 0]],
        pk={(1, 1): [[1, 0], [0, 1]]},
    )
    cmat = [[p["E"], _Z], [_Z, p["kappa"] * p["G"]]]
    return KinematicModel(
        "timoshenko",
        ("z1",),
        comp,
        _interval_domain(),
        _beam_section(p),
        lam1,
        lam2,
        op,
        cmat,
        p["rho"],
        params=p,
        r_names=("psi", "w"),
    )


def _rayleigh_beam(params):
    p = _merge_params({"E": 1, "rho": 1, "b": 1, "h": 1, "A": 0, "I": 0, "R": 0}, params)
    _require_positive(p, "E", "rho")
    comp = ("z2", "z3")
    z3 = Poly.variable(comp, "z3")
    zero = Poly.zero(comp)
    one = Poly.constant(comp, 1)
    lam1 = PolyMatrix([[-z3, zero], [zero, zero], [zero, one]])
    lam2 = PolyMatrix([[-z3 * Fraction(1, 2)]])
    op = DiffOpMatrix(1, 2, ("z1",), pk={(1, 1): [[1, 0]], (1, 2): [[0, 1]]})
    return KinematicModel(
        "rayleigh_beam",
        ("z1",),
        comp,
        _interval_domain(),
        _beam_section(p),
        lam1,
        lam2,
        op,
        scalar_young(p["E"]),
        p["rho"],
        params=p,
        r_names=("theta", "w"),
        free_fields=("w",),
        structure=(("d", 0, 1), ("free", 0)),
    )


def _euler_bernoulli(params):
    p = _merge_params({"E": 1, "rho": 1, "b": 1, "h": 1, "A": 0, "I": 0, "R": 0}, params)
    _require_positive(p, "E", "rho")
    comp = ("z2", "z3")
    z3 = Poly.variable(comp, "z3")
    lam1 = _poly_rows(comp, [[0], [0], [1]])
    lam2 = PolyMatrix([[-z3]])
    op = DiffOpMatrix(1, 1, ("z1",), pk={(1, 2): [[1]]})
    # Reduction of the slope-augmented bending beam: rotary inertia dropped,
    # shear rigidity imposed.  lambda1 keeps only the transverse motion whose
    # kinetic energy survives, so the generic strain check does not apply.
    return KinematicModel(
        "euler_bernoulli",
        ("z1",),
        comp,
        _interval_domain(),
        _beam_section(p),
        lam1,
        lam2,
        op,
        scalar_young(p["E"]),
        p["rho"],
        params=p,
        r_names=("w",),
        strain_check=False,
    )


def _reddy_beam(params):
    p = _merge_params(
        {"E": 1, "G": 0, "nu": 0, "rho": 1, "b": 1, "h": 1, "R": 0, "alpha": 0}, params
    )
    p["G"] = p["G"] if (p["G"] != 0 or p["nu"] != 0) else Fraction(1)
    p["G"] = _shear_modulus(p)
    _require_positive(p, "E", "G", "rho")
    thickness = 2 * p["R"] if p.get("R", 0) > 0 else p["h"]
    alpha = p["alpha"] if params and "alpha" in params else 4 / (3 * thickness**2)
    p["alpha"] = alpha
    comp = ("z2", "z3")
    z3 = Poly.variable(comp, "z3")
    zero = Poly.zero(comp)
    one = Poly.constant(comp, 1)
    g = -(z3 - alpha * z3**3)
    cubic = -alpha * z3**3
    shear = one - 3 * alpha * z3**2
    lam1 = PolyMatrix([[g, zero, cubic], [zero, zero, zero], [zero, one, zero]])
    lam2 = PolyMatrix([[g, zero, cubic], [zero, shear, zero]])
    op = DiffOpMatrix(
        3,
        3,
        ("z1",),
        p0=[[0, 0, 0], [-1, 0, 0], [0, 0, 0]],
        pk={(1, 1): [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
    )
    cmat = [[p["E"], _Z], [_Z, p["G"]]]
    return KinematicModel(
        "reddy_beam",
        ("z1",),
        comp,
        _interval_domain(),
        _beam_section(p),
        lam1,
        lam2,
        op,
        cmat,
        p["rho"],
        params=p,
        r_names=("psi", "w", "theta"),
        free_fields=("psi", "w"),
        structure=(("free", 0), ("free", 1), ("d", 1, 1)),
    )


def _elasticity2d(params):
    p = _merge_params({"E": 1, "nu": "3/10", "rho": 1, "h": 1, "G": 0}, params)
    _require_positive(p, "E", "rho", "h")
    comp = ("z3",)
    lam1 = _poly_rows(comp, [[1, 0], [0, 1], [0, 0]])
    lam2 = _poly_rows(comp, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    op = DiffOpMatrix(
        3,
        2,
        ("z1", "z2"),
        pk={
            (1, 1): [[1, 0], [0, 0], [0, 1]],
            (2, 1): [[0, 0], [0, 1], [1, 0]],
        },
    )
    return KinematicModel(
        "elasticity2d",
        ("z1", "z2"),
        comp,
        _rect_domain(),
        IntervalSection(p["h"]),
        lam1,
        lam2,
        op,
        plane_stress(p["E"], p["nu"]),
        p["rho"],
        params=p,
        r_names=("u1", "u2"),
    )


def _elasticity3d(params):
    p = _merge_params({"E": 1, "nu": "3/10", "rho": 1}, params)
    _require_positive(p, "E", "rho")
    comp = ()
    lam1 = _poly_rows(comp, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    lam2 = _poly_rows(comp, [[int(i == j) for j in range(6)] for i in range(6)])
    op = DiffOpMatrix(
        6,
        3,
        ("z1", "z2", "z3"),
        pk={
            (1, 1): [[1, 0, 0], [0, 0, 0], [0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]],
            (2, 1): [[0, 0, 0], [0, 1, 0], [0, 0, 0], [1, 0, 0], [0, 0, 0], [0, 0, 1]],
            (3, 1): [[0, 0, 0], [0, 0, 0], [0, 0, 1], [0, 0, 0], [1, 0, 0], [0, 1, 0]],
        },
    )
    return KinematicModel(
        "elasticity3d",
        ("z1", "z2", "z3"),
        comp,
        DomainSpec.box(((0, 1), (0, 1), (0, 1))),
        PointSection(),
        lam1,
        lam2,
        op,
        iso3d(p["E"], p["nu"]),
        p["rho"],
        params=p,
        r_names=("u1", "u2", "u3"),
    )


def _mindlin_plate(params):
    p = _merge_params({"E": 1, "nu": "3/10", "G": 0, "rho": 1, "h": 1}, params)
    _require_positive(p, "E", "rho", "h")
    G = _shear_modulus(p)
    p["G"] = G
    comp = ("z3",)
    z3 = Poly.variable(comp, "z3")
    zero = Poly.zero(comp)
    one = Poly.constant(comp, 1)
    lam1 = PolyMatrix([[-z3, zero, zero], [zero, -z3, zero], [zero, zero, one]])
    lam2 = PolyMatrix(
        [
            [-z3, zero, zero, zero, zero],
            [zero, -z3, zero, zero, zero],
            [zero, zero, -z3, zero, zero],
            [zero, zero, zero, one, zero],
            [zero, zero, zero, zero, one],
        ]
    )
    op = DiffOpMatrix(
        5,
        3,
        ("z1", "z2"),
        p0=[[0, 0, 0], [0, 0, 0], [0, 0, 0], [-1, 0, 0], [0, -1, 0]],
        pk={
            (1, 1): [[1, 0, 0], [0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]],
            (2, 1): [[0, 0, 0], [0, 1, 0], [1, 0, 0], [0, 0, 0], [0, 0, 1]],
        },
    )
    return KinematicModel(
        "mindlin_plate",
        ("z1", "z2"),
        comp,
        _rect_domain(),
        IntervalSection(p["h"]),
        lam1,
        lam2,
        op,
        bending_shear_block(p["E"], p["nu"], G),
        p["rho"],
        params=p,
        r_names=("psi1", "psi2", "w"),
    )


def _reddy_plate(params):
    p = _merge_params({"E": 1, "nu": "3/10", "G": 0, "rho": 1, "h": 1, "alpha": 0}, params)
    _require_positive(p, "E", "rho", "h")
    G = _shear_modulus(p)
    p["G"] = G
    alpha = p["alpha"] if params and "alpha" in params else 4 / (3 * p["h"] ** 2)
    p["alpha"] = alpha
    comp = ("z3",)
    z3 = Poly.variable(comp, "z3")
    zero = Poly.zero(comp)
    one = Poly.constant(comp, 1)
    g = -(z3 - alpha * z3**3)
    cubic = -alpha * z3**3
    shear = one - 3 * alpha * z3**2
    lam1 = PolyMatrix(
        [
            [g, zero, zero, cubic, zero],
            [zero, g, zero, zero, cubic],
            [zero, zero, one, zero, zero],
        ]
    )
    lam2 = PolyMatrix(
        [
            [g, zero, zero, zero, zero, cubic, zero, zero],
            [zero, g, zero, zero, zero, zero, cubic, zero],
            [zero, zero, g, zero, zero, zero, zero, cubic],
            [zero, zero, zero, shear, zero, zero, zero, zero],
            [zero, zero, zero, zero, shear, zero, zero, zero],
        ]
    )
    op = DiffOpMatrix(
        8,
        5,
        ("z1", "z2"),
        p0=[
            [0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0],
            [-1, 0, 0, 0, 0],
            [0, -1, 0, 0, 0],
            [0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0],
        ],
        pk={
            (1, 1): [
                [1, 0, 0, 0, 0],
                [0, 0, 0, 0, 0],
                [0, 1, 0, 0, 0],
                [0, 0, 1, 0, 0],
                [0, 0, 0, 0, 0],
                [0, 0, 0, 1, 0],
                [0, 0, 0, 0, 0],
                [0, 0, 0, 0, 1],
            ],
            (2, 1): [
                [0, 0, 0, 0, 0],
                [0, 1, 0, 0, 0],
                [1, 0, 0, 0, 0],
                [0, 0, 0, 0, 0],
                [0, 0, 1, 0, 0],
                [0, 0, 0, 0, 0],
                [0, 0, 0, 0, 1],
                [0, 0, 0, 1, 0],
            ],
        },
    )
    return KinematicModel(
        "reddy_plate",
        ("z1", "z2"),
        comp,
        _rect_domain(),
        IntervalSection(p["h"]),
        lam1,
        lam2,
        op,
        bending_shear_block(p["E"], p["nu"], G),
        p["rho"],
        params=p,
        r_names=("psi1", "psi2", "w", "theta1", "theta2"),
        free_fields=("psi1", "psi2", "w"),
        structure=(("free", 0), ("free", 1), ("free", 2), ("d", 2, 1), ("d", 2, 2)),
    )


def _kirchhoff_rayleigh(params):
    p = _merge_params({"E": 1, "nu": "3/10", "rho": 1, "h": 1}, params)
    _require_positive(p, "E", "rho", "h")
    comp = ("z3",)
    z3 = Poly.variable(comp, "z3")
    zero = Poly.zero(comp)
    one = Poly.constant(comp, 1)
    lam1 = PolyMatrix([[zero, -z3, zero], [-z3, zero, zero], [zero, zero, one]])
    lam2 = PolyMatrix([[-z3, zero, zero], [zero, -z3, zero], [zero, zero, -z3]])
    op = DiffOpMatrix(
        3,
        3,
        ("z1", "z2"),
        pk={
            (1, 1): [[0, 0, 0], [0, 0, 0], [1, 0, 0]],
            (2, 1): [[0, 0, 0], [0, 0, 0], [0, 1, 0]],
            (1, 2): [[0, 0, 1], [0, 0, 0], [0, 0, 0]],
            (2, 2): [[0, 0, 0], [0, 0, 1], [0, 0, 0]],
        },
    )
    return KinematicModel(
        "kirchhoff_rayleigh",
        ("z1", "z2"),
        comp,
        _rect_domain(),
        IntervalSection(p["h"]),
        lam1,
        lam2,
        op,
        plane_stress(p["E"], p["nu"]),
        p["rho"],
        params=p,
        r_names=("theta2", "theta1", "w"),
        free_fields=("w",),
        structure=(("d", 0, 2), ("d", 0, 1), ("free", 0)),
    )


BUILTINS = {
    "truss": _truss,
    "elasticity2d": _elasticity2d,
    "elasticity3d": _elasticity3d,
    "mindlin_plate": _mindlin_plate,
    "string": _string,
    "torsion": _torsion,
    "reddy_beam": _reddy_beam,
    "rayleigh_beam": _rayleigh_beam,
    "euler_bernoulli": _euler_bernoulli,
    "kirchhoff_rayleigh": _kirchhoff_rayleigh,
    "timoshenko": _timoshenko,
    "reddy_plate": _reddy_plate,
}


def builtin_names() -> List[str]:
    return sorted(BUILTINS)


def builtin_model(name: str, params: Optional[Dict] = None, validate: bool = True) -> KinematicModel:
    if name not in BUILTINS:
        raise ModelError(f"unknown builtin model {name!r}; known: {', '.join(builtin_names())}")
    model = BUILTINS[name](params)
    if validate:
        relax = ()
        if model.params.get("alpha", None) == 0 and name in ("reddy_plate", "reddy_beam"):
            # diagnostic first-order limit: extra displacement columns vanish
            relax = ("lambda1-columns", "lambda2-rows-cols", "strain-consistency")
        report = validate_model(model, relax=relax)
        if not report.ok:
            raise ModelError(str(report))
    return model
