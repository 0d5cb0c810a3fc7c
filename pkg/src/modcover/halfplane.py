"""Exact Moebius action on upper half-plane points with imaginary quadratic coordinates.

A point is x + y*sqrt(-D) with rational x, y > 0 and squarefree D > 0.
All arithmetic stays in Q(sqrt(-D)); there is no floating point here.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Tuple

from .errors import NotElliptic
from .gl2 import ElementKind, GroupElement, RationalLike, classify
from .numutil import lcm_den, squarefree_split


class HalfPlanePoint:
    """Point x + y*sqrt(-D) of the upper half-plane, y > 0, D squarefree."""

    __slots__ = ("D", "x", "y")

    def __init__(self, D: int, x: RationalLike, y: RationalLike):
        x = Fraction(x)
        y = Fraction(y)
        if D <= 0:
            raise ValueError("D must be a positive integer")
        if y <= 0:
            raise ValueError("point must have positive imaginary part")
        f, d0 = squarefree_split(D)
        self.D = d0
        self.x = x
        self.y = y * f

    def norm(self) -> Fraction:
        """|tau|^2 = x^2 + D y^2."""
        return self.x * self.x + self.D * self.y * self.y

    def mirror(self) -> "HalfPlanePoint":
        """Reflection x + y*sqrt(-D) -> -x + y*sqrt(-D)."""
        return HalfPlanePoint(self.D, -self.x, self.y)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HalfPlanePoint):
            return NotImplemented
        return (self.D, self.x, self.y) == (other.D, other.x, other.y)

    def __hash__(self) -> int:
        return hash((self.D, self.x, self.y))

    def __repr__(self) -> str:
        return f"HalfPlanePoint(D={self.D}, x={self.x}, y={self.y})"

    def __str__(self) -> str:
        return format_point(self)

    def to_dict(self) -> dict:
        return {"D": self.D, "x": str(self.x), "y": str(self.y)}

    @classmethod
    def from_dict(cls, data: dict) -> "HalfPlanePoint":
        return cls(int(data["D"]), Fraction(str(data["x"])), Fraction(str(data["y"])))


def point_i() -> HalfPlanePoint:
    return HalfPlanePoint(1, 0, 1)


def point_rho() -> HalfPlanePoint:
    """The corner (-1 + sqrt(-3)) / 2 of the standard fundamental domain."""
    return HalfPlanePoint(3, Fraction(-1, 2), Fraction(1, 2))


def act(g: GroupElement, tau: HalfPlanePoint) -> HalfPlanePoint:
    """Exact Moebius action (a tau + b) / (c tau + d); stays in Q(sqrt(-D))."""
    a, b, c, d = g.entries()
    x, y, D = tau.x, tau.y, tau.D
    # numerator (ax+b) + ay*w, denominator (cx+d) + cy*w, w = sqrt(-D)
    nr, ni = a * x + b, a * y
    dr, di = c * x + d, c * y
    den_norm = dr * dr + D * di * di
    # den_norm > 0: c tau + d = 0 would need tau rational
    new_x = (nr * dr + D * ni * di) / den_norm
    new_y = (ni * dr - nr * di) / den_norm
    return HalfPlanePoint(D, new_x, new_y)


def fixed_point(e: GroupElement) -> HalfPlanePoint:
    """The unique fixed point in the upper half-plane of an elliptic element.

    Solves c x^2 + (d - a) x - b = 0 and takes the root with positive
    imaginary part.
    """
    kind = classify(e)
    if kind is ElementKind.CENTRAL:
        raise NotElliptic("central element fixes every point, no unique fixed point")
    if kind is ElementKind.NON_ELLIPTIC:
        raise NotElliptic("non-elliptic element has no fixed point in the upper half-plane")
    a, b, c, d = e.entries()
    # elliptic with c = 0 would force (d-a)^2 < 0
    assert c != 0, "elliptic element must have c != 0"
    disc = (d - a) ** 2 + 4 * b * c
    assert disc < 0
    delta = -disc  # positive rational; sqrt(disc) = i sqrt(delta)
    f, d0 = squarefree_split(delta.numerator * delta.denominator)
    x = (a - d) / (2 * c)
    y = Fraction(f, delta.denominator) / abs(2 * c)
    return HalfPlanePoint(d0, x, y)


def in_stabilizer(g: GroupElement, e: GroupElement) -> bool:
    """Whether g fixes the fixed point of elliptic e; decided by the centralizer test g e = e g."""
    if classify(e) is not ElementKind.ELLIPTIC:
        raise NotElliptic("stabilizer test requires an elliptic element")
    return g * e == e * g


def point_field(tau: HalfPlanePoint) -> Tuple[int, Tuple[int, int, int]]:
    """D and the primitive integral quadratic (a, b, c), a > 0, vanishing at tau."""
    # (X - x)^2 = -y^2 D  =>  X^2 - 2x X + (x^2 + y^2 D) = 0
    b_q = -2 * tau.x
    c_q = tau.x * tau.x + tau.y * tau.y * tau.D
    den = lcm_den(b_q, c_q)
    a, b, c = den, int(b_q * den), int(c_q * den)
    g = math.gcd(a, math.gcd(abs(b), abs(c)))
    return tau.D, (a // g, b // g, c // g)


# ---------------------------------------------------------------------------
# Point literals: "x+y√-D" with ASCII fallback "x+ysqrt-D"

_POINT_RE = re.compile(
    r"^\s*(?:(?P<x>[+-]?\d+(?:/\d+)?)\s*(?=[+-]))?"
    r"\s*(?P<ysign>[+-])?\s*(?P<y>\d+(?:/\d+)?)?\s*"
    r"(?:√|sqrt)\s*-\s*(?P<D>\d+)\s*$"
)


def parse_point(text: str) -> HalfPlanePoint:
    """Parse 'x+y√-D' (or 'x+ysqrt-D'); x may be omitted when 0, y when 1."""
    m = _POINT_RE.match(text)
    if not m:
        raise ValueError(f"bad point literal {text!r}")
    x = Fraction(m.group("x")) if m.group("x") else Fraction(0)
    y = Fraction(m.group("y")) if m.group("y") else Fraction(1)
    if m.group("ysign") == "-":
        y = -y
    return HalfPlanePoint(int(m.group("D")), x, y)


def format_point(tau: HalfPlanePoint, ascii_only: bool = False) -> str:
    root = f"sqrt-{tau.D}" if ascii_only else f"√-{tau.D}"
    sign = "+" if tau.y >= 0 else "-"
    return f"{tau.x}{sign}{abs(tau.y)}{root}"
