"""Cross-section descriptions and exact integration over them.

The complementary domain of a model is one of: a thickness interval in z3
(plates), a rectangle or circular disk in (z2, z3) (beams and bars), nothing
at all (full 3D elasticity), or an abstract section known only through its
z3-moments (A, I, ...).  Each kind integrates polynomials in the complementary
coordinates exactly; disks produce pi-tagged rationals.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict

from .exact import ExactError, PiRat, fr
from .poly import Poly


def _double_factorial(n: int) -> int:
    if n <= 0:
        return 1
    out = 1
    while n > 0:
        out *= n
        n -= 2
    return out


def disk_monomial_moment(a: int, b: int, radius: Fraction):
    """Exact integral of z2^a z3^b over the disk of the given radius."""
    if a % 2 or b % 2:
        return Fraction(0)
    s = a + b
    q = (
        2
        * Fraction(_double_factorial(a - 1) * _double_factorial(b - 1))
        / Fraction((s + 2) * _double_factorial(s))
    )
    return PiRat(q * radius ** (s + 2), 1)


class Section:
    kind = "abstract"
    coords: tuple

    def integrate(self, p: Poly):
        raise NotImplementedError

    def moment(self, i: int):
        """Integral of z3^i over the section."""
        z3 = Poly.variable(self.coords, "z3") if "z3" in self.coords else None
        if z3 is None:
            raise ExactError(f"{self.kind} section has no z3 coordinate")
        return self.integrate(z3**i)

    def descriptor(self) -> str:
        raise NotImplementedError


class PointSection(Section):
    """No complementary domain: integration is the identity on constants."""

    kind = "none"
    coords = ()

    def integrate(self, p: Poly):
        return p.constant_value()

    def moment(self, i: int):
        raise ExactError("a 3D model has no cross-section moments")

    def descriptor(self) -> str:
        return "none"

    def __eq__(self, other):
        return isinstance(other, PointSection)


class IntervalSection(Section):
    """Thickness interval z3 in (-h/2, h/2); the plate case."""

    kind = "interval"
    coords = ("z3",)

    def __init__(self, h):
        self.h = fr(h)
        if self.h <= 0:
            raise ExactError("thickness must be positive")

    def integrate(self, p: Poly):
        return p.integrate("z3", -self.h / 2, self.h / 2).constant_value()

    def descriptor(self) -> str:
        return f"interval = {self.h}"

    def __eq__(self, other):
        return isinstance(other, IntervalSection) and self.h == other.h


class RectangleSection(Section):
    """Rectangle z2 in (-b/2, b/2), z3 in (-h/2, h/2)."""

    kind = "rectangle"
    coords = ("z2", "z3")

    def __init__(self, b, h):
        self.b = fr(b)
        self.h = fr(h)
        if self.b <= 0 or self.h <= 0:
            raise ExactError("section sides must be positive")

    def integrate(self, p: Poly):
        out = p.integrate("z2", -self.b / 2, self.b / 2)
        return out.integrate("z3", -self.h / 2, self.h / 2).constant_value()

    def descriptor(self) -> str:
        return f"rectangle = {self.b}, {self.h}"

    def __eq__(self, other):
        return isinstance(other, RectangleSection) and (self.b, self.h) == (other.b, other.h)


class CircleSection(Section):
    """Disk of radius R in the (z2, z3) plane; moments carry a pi tag."""

    kind = "circle"
    coords = ("z2", "z3")

    def __init__(self, radius):
        self.radius = fr(radius)
        if self.radius <= 0:
            raise ExactError("radius must be positive")

    def integrate(self, p: Poly):
        total = Fraction(0)
        i2 = p.coords.index("z2")
        i3 = p.coords.index("z3")
        for exps, c in p.terms.items():
            total = total + c * disk_monomial_moment(exps[i2], exps[i3], self.radius)
        return total

    def descriptor(self) -> str:
        return f"circle = {self.radius}"

    def __eq__(self, other):
        return isinstance(other, CircleSection) and self.radius == other.radius


class MomentSection(Section):
    """A symmetric section known only through selected z3-moments.

    ``moments[i]`` is the integral of z3^i over the section (so moments[0] is
    the area and moments[2] the second moment).  Odd moments vanish by the
    symmetry assumption.  Polynomials that involve z2 need real geometry and
    are refused.
    """

    kind = "moments"
    coords = ("z2", "z3")

    def __init__(self, moments: Dict[int, Fraction]):
        self.moments = {int(i): fr(v) for i, v in moments.items()}
        if any(i < 0 for i in self.moments):
            raise ExactError("moment indices must be non-negative")
        if any(i % 2 for i in self.moments):
            raise ExactError("only even moments are meaningful for a symmetric section")

    def integrate(self, p: Poly):
        total = Fraction(0)
        i2 = p.coords.index("z2") if "z2" in p.coords else None
        i3 = p.coords.index("z3") if "z3" in p.coords else None
        for exps, c in p.terms.items():
            if i2 is not None and exps[i2] != 0:
                raise ExactError(
                    "abstract moment section cannot integrate z2 terms; "
                    "use a rectangle or circle section"
                )
            e3 = exps[i3] if i3 is not None else 0
            if e3 % 2:
                continue
            if e3 not in self.moments:
                raise ExactError(f"moment of order {e3} not supplied for abstract section")
            total += c * self.moments[e3]
        return total

    def descriptor(self) -> str:
        inner = ", ".join(f"I{i}: {v}" for i, v in sorted(self.moments.items()))
        return f"moments = {inner}"

    def __eq__(self, other):
        return isinstance(other, MomentSection) and self.moments == other.moments


def section_moment(section: Section, i: int):
    """Exact i-th z3-moment of a section; 0 for odd i on symmetric shapes."""
    if i < 0:
        raise ExactError("moment order must be non-negative")
    return section.moment(i)
