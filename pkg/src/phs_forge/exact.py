"""Exact scalar arithmetic and small dense linear algebra.

Every coefficient in the symbolic pipeline is a ``fractions.Fraction``.
Circular cross sections introduce a factor of pi into section moments, so
scalars are either plain Fractions or :class:`PiRat`, a rational multiple of
an integer power of pi.  Sums mixing different powers of pi are refused: they
never occur for the supported section shapes, and refusing keeps every
comparison exact instead of silently falling back to floats.
"""

from __future__ import annotations

import math
from fractions import Fraction


class ExactError(ArithmeticError):
    """Raised when an operation would leave the exact scalar domain."""


def fr(x) -> Fraction:
    """Coerce ints, strings like ``3/10`` and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise ExactError("floats are not exact; supply a rational (e.g. '3/10')")
    return Fraction(x)


class PiRat:
    """A scalar of the form q * pi**k with q rational and k an integer.

    Addition is only defined between equal powers of pi (or with zero);
    multiplication and division are unrestricted.  This is enough for every
    cross-section moment the builders produce, where each matrix entry and
    each leading minor is a single power of pi times a rational.
    """

    __slots__ = ("q", "k")

    def __init__(self, q, k: int = 0):
        q = fr(q)
        self.q = q
        self.k = int(k) if q != 0 else 0

    # -- helpers ----------------------------------------------------------
    @staticmethod
    def _lift(x) -> "PiRat":
        if isinstance(x, PiRat):
            return x
        return PiRat(fr(x), 0)

    def _as_fraction(self):
        if self.k == 0:
            return self.q
        return self

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        o = PiRat._lift(other)
        if self.q == 0:
            return o._as_fraction()
        if o.q == 0:
            return self._as_fraction()
        if self.k != o.k:
            raise ExactError(f"cannot add pi^{self.k} and pi^{o.k} terms exactly")
        return PiRat(self.q + o.q, self.k)._as_fraction()

    __radd__ = __add__

    def __neg__(self):
        return PiRat(-self.q, self.k)

    def __sub__(self, other):
        return self + (-PiRat._lift(other))

    def __rsub__(self, other):
        return PiRat._lift(other) + (-self)

    def __mul__(self, other):
        o = PiRat._lift(other)
        return PiRat(self.q * o.q, self.k + o.k)._as_fraction()

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = PiRat._lift(other)
        if o.q == 0:
            raise ZeroDivisionError("division by exact zero")
        return PiRat(self.q / o.q, self.k - o.k)._as_fraction()

    def __rtruediv__(self, other):
        return PiRat._lift(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ExactError("only non-negative integer powers")
        return PiRat(self.q**n, self.k * n)._as_fraction()

    def __eq__(self, other):
        o = PiRat._lift(other) if isinstance(other, (PiRat, Fraction, int)) else None
        if o is None:
            return NotImplemented
        return self.q == o.q and (self.q == 0 or self.k == o.k)

    def __hash__(self):
        if self.k == 0:
            return hash(self.q)
        return hash((self.q, self.k))

    def __float__(self):
        return float(self.q) * math.pi**self.k

    def __repr__(self):
        if self.k == 0:
            return str(self.q)
        suffix = "pi" if self.k == 1 else f"pi^{self.k}"
        return f"{self.q}*{suffix}"


def scalar_sign(x) -> int:
    """Exact sign of a Fraction or PiRat (pi > 0)."""
    q = x.q if isinstance(x, PiRat) else fr(x)
    return (q > 0) - (q < 0)


def is_zero(x) -> bool:
    return scalar_sign(x) == 0


def to_float(x) -> float:
    return float(x)


def scalar_str(x) -> str:
    """Canonical text form: 'num/den', optionally '*pi^k'."""
    if isinstance(x, PiRat):
        base = f"{x.q.numerator}/{x.q.denominator}"
        if x.k == 0:
            return base
        return base + ("*pi" if x.k == 1 else f"*pi^{x.k}")
    x = fr(x)
    return f"{x.numerator}/{x.denominator}"


def scalar_json(x):
    """[num, den] for rationals, [num, den, k] for pi-tagged values."""
    if isinstance(x, PiRat) and x.k != 0:
        return [x.q.numerator, x.q.denominator, x.k]
    q = x.q if isinstance(x, PiRat) else fr(x)
    return [q.numerator, q.denominator]


# ---------------------------------------------------------------------------
# Dense exact matrices: lists of lists of Fraction / PiRat.
# ---------------------------------------------------------------------------


def mat(rows):
    return [list(r) for r in rows]


def zeros(r: int, c: int):
    return [[Fraction(0)] * c for _ in range(r)]


def identity(n: int):
    return [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]


def transpose(a):
    return [list(col) for col in zip(*a)]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_neg(a):
    return [[-x for x in r] for r in a]


def mat_scale(a, s):
    return [[s * x for x in r] for r in a]


def mat_mul(a, b):
    rb = len(b)
    cb = len(b[0])
    out = []
    for row in a:
        assert len(row) == rb, "dimension mismatch in mat_mul"
        out.append([sum((row[k] * b[k][j] for k in range(rb)), Fraction(0)) for j in range(cb)])
    return out


def mat_vec(a, v):
    return [sum((row[k] * v[k] for k in range(len(v))), Fraction(0)) for row in a]


def mat_eq(a, b) -> bool:
    if len(a) != len(b) or len(a[0]) != len(b[0]):
        return False
    return all(ra[j] == rb[j] for ra, rb in zip(a, b) for j in range(len(ra)))


def is_symmetric(a) -> bool:
    n = len(a)
    if any(len(r) != n for r in a):
        return False
    return all(a[i][j] == a[j][i] for i in range(n) for j in range(i + 1, n))


def ldl_pivots(a):
    """Pivots d_1..d_n of the LDL^T factorization of symmetric ``a``.

    Returns (pivots, witness) where witness is None on success or, when a
    non-positive pivot d_j appears, a vector x with x^T a x = d_j <= 0.
    The leading principal minors are the running products of the pivots.
    """
    n = len(a)
    work = [row[:] for row in a]
    lower = identity(n)
    for j in range(n):
        d = work[j][j]
        if scalar_sign(d) <= 0:
            # back-substitute L^T x = e_j for the failure direction
            x = [Fraction(0)] * n
            x[j] = Fraction(1)
            for i in range(j - 1, -1, -1):
                x[i] = -sum((lower[r][i] * x[r] for r in range(i + 1, j + 1)), Fraction(0))
            pivots = [work[i][i] for i in range(j + 1)]
            return pivots, x
        for i in range(j + 1, n):
            lij = work[i][j] / d
            lower[i][j] = lij
            for k2 in range(j, n):
                work[i][k2] = work[i][k2] - lij * work[j][k2]
    return [work[i][i] for i in range(n)], None


def leading_minors(a):
    """Exact leading principal minors det(a[:k,:k]) for k = 1..n."""
    pivots, _ = _pivots_allow_zero(a)
    minors = []
    acc = Fraction(1)
    for d in pivots:
        acc = acc * d
        minors.append(acc)
    return minors


def _pivots_allow_zero(a):
    """Gaussian pivots without symmetry assumptions; zero pivot stops early
    with the remaining minors reported as zero."""
    n = len(a)
    work = [row[:] for row in a]
    pivots = []
    for j in range(n):
        d = work[j][j]
        if is_zero(d):
            pivots.extend([Fraction(0)] * (n - j))
            return pivots, None
        pivots.append(d)
        for i in range(j + 1, n):
            f = work[i][j] / d
            for k2 in range(j, n):
                work[i][k2] = work[i][k2] - f * work[j][k2]
    return pivots, None


def check_spd(a):
    """(ok, detail) by exact symmetry plus LDL^T pivot signs."""
    if not is_symmetric(a):
        n = len(a)
        for i in range(n):
            for j in range(i + 1, n):
                if a[i][j] != a[j][i]:
                    return False, f"asymmetric at ({i + 1},{j + 1}): {a[i][j]} vs {a[j][i]}"
    pivots, witness = ldl_pivots(a)
    if witness is not None:
        k = len(pivots)
        wtxt = "[" + ", ".join(str(x) for x in witness) + "]"
        return False, (
            f"leading minor {k} is non-positive (pivot {pivots[-1]}); witness x with x^T A x <= 0: {wtxt}"
        )
    return True, "symmetric positive definite"


def mat_inverse(a):
    """Exact inverse by Gauss-Jordan with partial (nonzero) pivoting."""
    n = len(a)
    work = [row[:] + identity(n)[i] for i, row in enumerate(a)]
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if not is_zero(work[r][col])), None)
        if pivot_row is None:
            raise ExactError("matrix is singular")
        if pivot_row != col:
            work[col], work[pivot_row] = work[pivot_row], work[col]
        d = work[col][col]
        work[col] = [x / d for x in work[col]]
        for r in range(n):
            if r != col and not is_zero(work[r][col]):
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return [row[n:] for row in work]
