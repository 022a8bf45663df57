"""Compile a kinematic model into its port-Hamiltonian representation.

The three compilation steps are exact: the mass matrix is the density-weighted
section integral of lambda1^T lambda1, the stiffness matrix the section
integral of lambda2^T C lambda2, and the interconnection block pairs the
declared operator with its formal adjoint.  Positive definiteness is certified
with exact leading-minor/pivot signs; a failure is surfaced with a witness
vector rather than silently accepted, since it signals an inconsistent
kinematic assumption or a wrong strain-space dimension.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

from . import exact
from .diffop import BoundaryForm, DiffOpMatrix, jet
from .exact import check_spd, fr, mat_inverse, scalar_json, to_float
from .models import KinematicModel, ModelError, validate_model
from .poly import Poly
from .sections import section_moment  # re-exported: step-1 helper lives with sections

__all__ = [
    "BuildError",
    "PHSystem",
    "LagrangianFormSystem",
    "section_moment",
    "mass_matrix",
    "stiffness_matrix",
    "assemble_phs",
    "boundary_port_map",
    "lagrangian_form",
    "hamiltonian_value",
    "export_system",
    "write_matrix_csv",
]


class BuildError(ModelError):
    pass


def _section_gram(model: KinematicModel, left, weight, right):
    """Exact integral over the section of left^T * weight * right.

    ``left`` and ``right`` are PolyMatrix factors over the complementary
    coordinates, ``weight`` a rational matrix (or None for the identity).
    """
    rows = left.cols
    cols = right.cols
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = Poly.zero(left.coords)
            for a in range(left.rows):
                for b in range(right.rows):
                    wab = (
                        Fraction(1 if a == b else 0)
                        if weight is None
                        else weight[a][b]
                    )
                    if wab == 0:
                        continue
                    acc = acc + wab * (left.entries[a][i] * right.entries[b][j])
            row.append(model.section.integrate(acc))
        out.append(row)
    return out


def mass_matrix(model: KinematicModel, require_spd: bool = True):
    """rho times the section integral of lambda1^T lambda1 (n x n, exact)."""
    m = _section_gram(model, model.lambda1, None, model.lambda1)
    m = [[model.rho * x for x in row] for row in m]
    if require_spd:
        ok, detail = check_spd(m)
        if not ok:
            raise BuildError(
                f"mass matrix of {model.name} is not symmetric positive definite: {detail}"
            )
    return m


def stiffness_matrix(model: KinematicModel, require_spd: bool = True):
    """Section integral of lambda2^T C lambda2 (m x m, exact)."""
    k = _section_gram(model, model.lambda2, model.cmat, model.lambda2)
    if require_spd:
        ok, detail = check_spd(k)
        if not ok:
            raise BuildError(
                f"stiffness matrix of {model.name} is not symmetric positive definite "
                f"(the strain-space dimension m may be wrong): {detail}"
            )
    return k


@dataclass
class PHSystem:
    """Compiled system: exact matrices, operator pair and boundary form.

    States are x = (p, eps) with co-energy e_p = M^-1 p and e_eps = K eps;
    the interconnection block is [[0, -F*], [F, 0]].
    """

    model: KinematicModel
    mass: list
    mass_inv: list
    stiffness: list
    op: DiffOpMatrix
    op_adjoint: DiffOpMatrix
    boundary: BoundaryForm

    @property
    def n(self) -> int:
        return self.op.n

    @property
    def m(self) -> int:
        return self.op.m

    @property
    def state_labels(self) -> List[str]:
        return [f"p{i + 1}" for i in range(self.n)] + [f"eps{j + 1}" for j in range(self.m)]

    def j_block_strings(self) -> List[List[str]]:
        """The (n+m) x (n+m) interconnection block as entry strings."""
        n, m = self.n, self.m
        out = [["0"] * (n + m) for _ in range(n + m)]
        for r in range(n):
            for c in range(m):
                s = self.op_adjoint.entry_str(r, c)
                out[r][n + c] = _negate_entry(s)
        for r in range(m):
            for c in range(n):
                out[n + r][c] = self.op.entry_str(r, c)
        return out

    def summary(self) -> str:
        model = self.model
        lines = [
            f"model {model.name}: ell={model.ell}, N={model.order}, "
            f"n={self.n}, m={self.m}, d={model.d}",
            "mass matrix M:",
        ]
        lines += ["  [" + ", ".join(str(x) for x in row) + "]" for row in self.mass]
        lines.append("stiffness matrix K:")
        lines += ["  [" + ", ".join(str(x) for x in row) + "]" for row in self.stiffness]
        lines.append("interconnection block J = [[0, -F*], [F, 0]]:")
        lines += ["  [" + ", ".join(r) + "]" for r in self.j_block_strings()]
        return "\n".join(lines)


def _negate_entry(s: str) -> str:
    if s == "0":
        return s
    if s.startswith("-") and "+" not in s and " - " not in s:
        return s[1:]
    if ("+" in s) or (" - " in s):
        return f"-({s})"
    return f"-{s}"


def assemble_phs(model: KinematicModel, validate: bool = True) -> PHSystem:
    """Run the compilation pipeline and attach the boundary machinery."""
    if validate:
        report = validate_model(model)
        if not report.ok:
            raise BuildError(str(report))
    mass = mass_matrix(model)
    stiffness = stiffness_matrix(model)
    return PHSystem(
        model=model,
        mass=mass,
        mass_inv=mat_inverse(mass),
        stiffness=stiffness,
        op=model.op,
        op_adjoint=model.op.formal_adjoint(),
        boundary=BoundaryForm(model.op),
    )


# ---------------------------------------------------------------------------
# Boundary ports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryPortMap:
    """Concrete port matrices at one boundary point/edge with unit normal.

    u = u_matrix applied to the strain-side co-energy stack, y = the
    momentum-side stack itself; the stacks are plain co-energy vectors for
    first-order operators and jets (field plus derivatives) otherwise.
    """

    normal: tuple
    u_matrix: list
    u_arg_labels: List[str]
    y_labels: List[str]


def _jet_labels(base: Sequence[str], order: int, ell: int) -> List[str]:
    out = list(base)
    for j in range(1, max(order, 1)):
        for k in range(1, ell + 1):
            token = f"d{k}" if j == 1 else f"d{k}^{j}"
            out.extend(f"{token} {b}" for b in base)
    return out


def boundary_port_map(sys: PHSystem, normal) -> BoundaryPortMap:
    normal = tuple(fr(x) for x in normal)
    if len(normal) != sys.model.ell:
        raise BuildError(f"normal must have {sys.model.ell} components")
    nonzero = [i for i, x in enumerate(normal) if x != 0]
    if len(nonzero) != 1 or abs(normal[nonzero[0]]) != 1:
        raise BuildError("normal must be an axis-aligned unit vector")
    e_eps = [f"e_eps{j + 1}" for j in range(sys.m)]
    e_p = [f"e_p{i + 1}" for i in range(sys.n)]
    if sys.op.order <= 1:
        return BoundaryPortMap(
            normal=normal,
            u_matrix=sys.boundary.p_partial(normal),
            u_arg_labels=e_eps,
            y_labels=e_p,
        )
    return BoundaryPortMap(
        normal=normal,
        u_matrix=sys.boundary.q_partial(normal),
        u_arg_labels=_jet_labels(e_eps, sys.op.order, sys.model.ell),
        y_labels=_jet_labels(e_p, sys.op.order, sys.model.ell),
    )


def boundary_pairing_value(sys: PHSystem, e_p: Sequence[Poly], e_eps: Sequence[Poly]) -> Fraction:
    """Exact boundary power for polynomial co-energy fields."""
    dom = sys.model.domain
    total = Fraction(0)
    order, axes = sys.op.order, sys.op.axes
    jp = jet(e_p, order, axes)
    je = jet(e_eps, order, axes)
    for face in dom.faces():
        q = sys.boundary.q_partial(face[2])
        acc = Poly.zero(jp[0].coords)
        for i, pi in enumerate(jp):
            for j, ej in enumerate(je):
                if q[i][j] != 0:
                    acc = acc + q[i][j] * (pi * ej)
        total += dom.integrate_face(acc, face)
    return total


# ---------------------------------------------------------------------------
# Constant-skew (Legendre) alternative form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LagrangianFormSystem:
    """State (p, r) with constant skew matrix [[0, -1], [1, 0]]; the force
    side of the gradient is the composition F*(K F r)."""

    system: PHSystem
    j0: list

    def e_r(self, r: Sequence[Poly]) -> List[Poly]:
        strains = self.system.op.apply(r)
        k = self.system.stiffness
        coords = strains[0].coords
        forced = []
        for i in range(len(strains)):
            acc = Poly.zero(coords)
            for j, s in enumerate(strains):
                if k[i][j] != 0:
                    if not isinstance(k[i][j], Fraction):
                        raise BuildError(
                            "symbolic force expansion needs rational stiffness entries"
                        )
                    acc = acc + k[i][j] * s
            forced.append(acc)
        return self.system.op_adjoint.apply(forced)


def lagrangian_form(sys: PHSystem) -> LagrangianFormSystem:
    n = sys.n
    j0 = exact.zeros(2 * n, 2 * n)
    for i in range(n):
        j0[i][n + i] = Fraction(-1)
        j0[n + i][i] = Fraction(1)
    return LagrangianFormSystem(system=sys, j0=j0)


# ---------------------------------------------------------------------------
# Hamiltonian evaluation
# ---------------------------------------------------------------------------


def hamiltonian_value(sys: PHSystem, p: Sequence[Poly], eps: Sequence[Poly]) -> Fraction:
    """Exact H = 1/2 integral(p^T M^-1 p + eps^T K eps) for polynomial states."""
    dom = sys.model.domain
    coords = p[0].coords if p else eps[0].coords

    def quad(fields, matrix):
        acc = Poly.zero(coords)
        for i, fi in enumerate(fields):
            for j, fj in enumerate(fields):
                entry = matrix[i][j]
                if entry == 0:
                    continue
                if not isinstance(entry, Fraction):
                    raise BuildError("symbolic Hamiltonian needs rational matrix entries")
                acc = acc + entry * (fi * fj)
        return acc

    total = quad(list(p), sys.mass_inv) + quad(list(eps), sys.stiffness)
    return dom.integrate(total) / 2


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def _matrix_json(matrix) -> list:
    return [[scalar_json(x) for x in row] for row in matrix]


def _op_json(op: DiffOpMatrix) -> dict:
    return {
        "m": op.m,
        "n": op.n,
        "axes": list(op.axes),
        "order": op.order,
        "p0": _matrix_json(op.p0),
        "terms": [
            {"axis": k, "order": i, "matrix": _matrix_json(op.pk[(k, i)])}
            for (k, i) in sorted(op.pk)
        ],
    }


def export_system(sys: PHSystem) -> dict:
    """JSON-ready dict; rationals appear as [num, den] (plus a pi power when
    a circular section is involved), boundary blocks keyed by the normal
    component n1, n2, ... they multiply."""
    model = sys.model
    return {
        "format": "phs-forge-system",
        "version": 1,
        "model": {
            "name": model.name,
            "ell": model.ell,
            "order": model.order,
            "n": sys.n,
            "m": sys.m,
            "d": model.d,
            "r_names": list(model.r_names),
            "params": {k: scalar_json(v) for k, v in sorted(model.params.items())},
        },
        "coords": {"distributed": list(model.dist), "complementary": list(model.comp)},
        "domain": {
            "axes": list(model.domain.axes),
            "bounds": [[scalar_json(lo), scalar_json(hi)] for lo, hi in model.domain.bounds],
        },
        "section": model.section.descriptor() if model.section.kind != "none" else "none",
        "mass": _matrix_json(sys.mass),
        "mass_inverse": _matrix_json(sys.mass_inv),
        "stiffness": _matrix_json(sys.stiffness),
        "operator": _op_json(sys.op),
        "adjoint": _op_json(sys.op_adjoint),
        "boundary": {
            "p_partial": {
                f"n{k + 1}": _matrix_json(mat_) for k, mat_ in enumerate(sys.boundary.p_axes)
            },
            "q_partial": {
                f"n{k + 1}": _matrix_json(mat_) for k, mat_ in enumerate(sys.boundary.q_axes)
            },
            "q_shape": [sys.boundary.rows, sys.boundary.cols],
        },
        "state_labels": sys.state_labels,
        "co_energy": {"e_p": "mass_inverse @ p", "e_eps": "stiffness @ eps"},
    }


def write_matrix_csv(path: str, matrix) -> None:
    """Float rendering with fixed formatting so artifacts are byte-stable."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in matrix:
            writer.writerow([format(to_float(x), ".17g") for x in row])
