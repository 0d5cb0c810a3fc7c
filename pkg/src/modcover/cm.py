"""CM points: discriminants, reduced binary quadratic forms, class polynomials,
the mirror pairing on half-plane CM pairs, and a numeric j-oracle.

The j-oracle is self-contained: the q-series coefficients come from exact
integer Eisenstein/eta arithmetic, the truncation length from the classical
coefficient bound c_n < e^(4 pi sqrt(n)) together with |q| <= e^(-pi sqrt(3))
after fundamental-domain reduction.  Complex evaluation uses mpmath at an
explicit working precision; everything else in this module is exact.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import mpmath as mp

from .congruence import reduce_to_fundamental_domain
from .errors import (
    BadDiscriminant,
    BoundExceeded,
    NotElliptic,
    NotImaginary,
    PrecisionInsufficient,
)
from .gl2 import ElementKind, GroupElement, classify
from .halfplane import HalfPlanePoint, act, fixed_point, point_field
from .numutil import squarefree_split

DEFAULT_DISC_BOUND = 10_000
CLASS_POLY_DISC_BOUND = 200
MAX_PRECISION_BITS = 512
ROUNDING_TOLERANCE_BITS = 20
_PRECISION_LADDER = (80, 160, 320)


def _check_disc(disc: int, bound: int = DEFAULT_DISC_BOUND) -> None:
    if disc >= 0 or disc % 4 not in (0, 1):
        raise BadDiscriminant(f"{disc} is not a negative discriminant (need <0 and 0,1 mod 4)")
    if -disc > bound:
        raise BoundExceeded(f"|{disc}| exceeds bound {bound}")


def reduce_form(form: Tuple[int, int, int]) -> Tuple[int, int, int]:
    """Standard reduction: |b| <= a <= c with b >= 0 when |b| = a or a = c."""
    a, b, c = form
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise NotImaginary(f"form {form} is not positive definite")
    disc = b * b - 4 * a * c
    while True:
        if c < a:
            a, b, c = c, -b, a
            continue
        if b > a or b <= -a:
            t = b % (2 * a)
            if t > a:
                t -= 2 * a
            b = t
            c = (b * b - disc) // (4 * a)
            continue
        if b < 0 and (-b == a or a == c):
            b = -b
            continue
        return (a, b, c)


@dataclass(frozen=True)
class CMData:
    """Negative discriminant plus the reduced primitive form of a special point."""

    disc: int
    form: Tuple[int, int, int]

    def __post_init__(self):
        a, b, c = self.form
        if self.disc >= 0 or b * b - 4 * a * c != self.disc:
            raise BadDiscriminant(f"form {self.form} does not match discriminant {self.disc}")
        if math.gcd(a, math.gcd(abs(b), abs(c))) != 1:
            raise ValueError(f"form {self.form} is not primitive")
        if reduce_form(self.form) != self.form:
            raise ValueError(f"form {self.form} is not reduced")

    def point(self) -> HalfPlanePoint:
        return form_point(self.form)

    def to_dict(self) -> dict:
        return {"disc": self.disc, "form": list(self.form)}


def form_point(form: Tuple[int, int, int]) -> HalfPlanePoint:
    """The root (-b + sqrt(disc)) / (2a) in the upper half-plane."""
    a, b, c = form
    disc = b * b - 4 * a * c
    if a <= 0 or disc >= 0:
        raise NotImaginary(f"form {form} has no root in the upper half-plane")
    f, d0 = squarefree_split(-disc)
    return HalfPlanePoint(d0, Fraction(-b, 2 * a), Fraction(f, 2 * a))


def cm_from_elliptic(e: GroupElement) -> Tuple[HalfPlanePoint, CMData]:
    """Fixed point of an elliptic element together with its CM datum.

    The discriminant is that of the primitive integral minimal quadratic
    of the fixed point (order discriminant).
    """
    tau = fixed_point(e)  # raises NotElliptic
    _, (a, b, c) = point_field(tau)
    return tau, CMData(b * b - 4 * a * c, reduce_form((a, b, c)))


def elliptic_from_cm(form: Tuple[int, int, int]) -> GroupElement:
    """A primitive elliptic element fixing the root of a x^2 + b x + c."""
    a, b, c = form
    if a <= 0 or math.gcd(a, math.gcd(abs(b), abs(c))) != 1:
        raise ValueError(f"form {form} must be primitive with a > 0")
    if b * b - 4 * a * c >= 0:
        raise NotImaginary(f"form {form} has non-negative discriminant")
    entries = (-b, -2 * c, 2 * a, b)
    content = math.gcd(*(abs(v) for v in entries))
    e = GroupElement(*(v // content for v in entries))
    assert classify(e) is ElementKind.ELLIPTIC
    return e


def reduced_forms(disc: int, bound: int = DEFAULT_DISC_BOUND) -> List[CMData]:
    """All reduced primitive forms of the discriminant; the count is the class number."""
    _check_disc(disc, bound)
    out = []
    b = disc % 2
    while 3 * b * b <= -disc:
        m = (b * b - disc) // 4
        a = max(b, 1)
        while a * a <= m:
            if m % a == 0:
                c = m // a
                if math.gcd(a, math.gcd(b, c)) == 1:
                    out.append(CMData(disc, (a, b, c)))
                    if 0 < b < a < c:
                        out.append(CMData(disc, (a, -b, c)))
            a += 1
        b += 2
    return sorted(out, key=lambda f: f.form)


def class_number(disc: int, bound: int = DEFAULT_DISC_BOUND) -> int:
    return len(reduced_forms(disc, bound))


# ---------------------------------------------------------------------------
# j-oracle: integer q-series coefficients plus high-precision evaluation

_j_coeff_cache: List[int] = []  # coefficient of q^(n-1) at index n
_j_lock = threading.Lock()


def _series_mul(a: Sequence[int], b: Sequence[int], T: int) -> List[int]:
    out = [0] * (T + 1)
    for i, ai in enumerate(a):
        if ai == 0 or i > T:
            continue
        for j in range(min(T - i, len(b) - 1) + 1):
            out[i + j] += ai * b[j]
    return out


def _series_inv(a: Sequence[int], T: int) -> List[int]:
    assert a[0] == 1
    out = [0] * (T + 1)
    out[0] = 1
    for n in range(1, T + 1):
        out[n] = -sum(a[k] * out[n - k] for k in range(1, min(n, len(a) - 1) + 1))
    return out


def _euler_product(T: int) -> List[int]:
    """prod (1 - q^n) up to q^T by the pentagonal number expansion."""
    f = [0] * (T + 1)
    f[0] = 1
    k = 1
    while k * (3 * k - 1) // 2 <= T:
        sign = -1 if k % 2 else 1
        for p in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            if p <= T:
                f[p] += sign
        k += 1
    return f


def _sigma3(n: int) -> int:
    return sum(d**3 for d in range(1, n + 1) if n % d == 0)


def _compute_j_coefficients(T: int) -> List[int]:
    """Coefficients a_0..a_T with j = sum a_n q^(n-1): the 4th Eisenstein
    series cubed divided by the discriminant series."""
    f = _euler_product(T)
    f2 = _series_mul(f, f, T)
    f4 = _series_mul(f2, f2, T)
    f8 = _series_mul(f4, f4, T)
    f16 = _series_mul(f8, f8, T)
    f24 = _series_mul(f16, f8, T)
    e4 = [1] + [240 * _sigma3(n) for n in range(1, T + 1)]
    e4cubed = _series_mul(_series_mul(e4, e4, T), e4, T)
    out = _series_mul(e4cubed, _series_inv(f24, T), T)
    assert out[0] == 1 and out[1] == 744 and out[2] == 196884
    return out


def _j_coefficients(T: int) -> List[int]:
    global _j_coeff_cache
    if len(_j_coeff_cache) <= T:
        with _j_lock:
            if len(_j_coeff_cache) <= T:
                _j_coeff_cache = _compute_j_coefficients(T + 16)
    return _j_coeff_cache


def _truncation_length(precision_bits: int) -> int:
    """Smallest truncation with certified tail below 2^-(precision_bits + 8).

    Tail bound: |c_n| < e^(4 pi sqrt(n)) and |q| <= e^(-pi sqrt(3)) give
    term(n) = exp(4 pi sqrt(n) - pi sqrt(3) n); once decreasing, the tail
    is under twice the next term.
    """
    target = -(precision_bits + 10) * math.log(2)

    def log_term(n: int) -> float:
        return 4 * math.pi * math.sqrt(n) - math.pi * math.sqrt(3) * n

    n = 8
    while not (log_term(n + 1) + math.log(2) < target and log_term(n + 1) < log_term(n)):
        n += 1
    return n


def j_numeric(tau: HalfPlanePoint, precision_bits: int = 80):
    """j(tau) as an mpmath complex number with error below 2^-precision_bits.

    The point is reduced to the fundamental domain first (j is invariant),
    which guarantees |q| <= e^(-pi sqrt(3)).
    """
    if precision_bits > MAX_PRECISION_BITS:
        raise ValueError(f"precision_bits capped at {MAX_PRECISION_BITS}")
    _, rep = reduce_to_fundamental_domain(tau)
    T = _truncation_length(precision_bits)
    coeffs = _j_coefficients(T)
    with mp.workprec(precision_bits + 48):
        x = mp.mpf(rep.x.numerator) / rep.x.denominator
        y = mp.mpf(rep.y.numerator) / rep.y.denominator * mp.sqrt(rep.D)
        q = mp.exp(2j * mp.pi * mp.mpc(x, y))
        acc = mp.mpc(0)
        for n in range(T, -1, -1):  # j = (sum a_n q^n) / q
            acc = acc * q + coeffs[n]
        return mp.mpc(acc / q)


@dataclass(frozen=True)
class ClassPolynomial:
    """Monic integer polynomial with the j-values of the reduced forms as roots."""

    disc: int
    coefficients: Tuple[int, ...]  # degree-descending, leading 1

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        acc = 0
        for coef in self.coefficients:
            acc = acc * x + coef
        return acc

    def to_dict(self) -> dict:
        return {"disc": self.disc, "coefficients": list(self.coefficients)}


def _round_certified(value, tol_bits: int = ROUNDING_TOLERANCE_BITS) -> int:
    """Nearest integer, provided the value is within 2^-tol_bits of one."""
    tol = mp.mpf(2) ** (-tol_bits)
    if abs(mp.im(value)) > tol:
        raise PrecisionInsufficient(f"imaginary part {mp.im(value)} above tolerance")
    nearest = mp.nint(mp.re(value))
    if abs(mp.re(value) - nearest) > tol:
        raise PrecisionInsufficient(f"distance to integer {abs(mp.re(value) - nearest)}")
    return int(nearest)


def class_polynomial(disc: int, start_bits: int = _PRECISION_LADDER[0]) -> ClassPolynomial:
    """Monic integer polynomial over the reduced forms, with certified rounding.

    Precision escalates 80 -> 160 -> 320 bits; if the nearest-integer
    distance is still above 2^-20, PrecisionInsufficient propagates.
    """
    _check_disc(disc, CLASS_POLY_DISC_BOUND)
    forms = reduced_forms(disc)
    last: PrecisionInsufficient | None = None
    for bits in [b for b in _PRECISION_LADDER if b >= start_bits] or [_PRECISION_LADDER[-1]]:
        with mp.workprec(bits + 64):
            roots = [j_numeric(f.point(), bits) for f in forms]
            poly = [mp.mpc(1)]
            for r in roots:
                nxt = [mp.mpc(0)] * (len(poly) + 1)
                for i, coef in enumerate(poly):
                    nxt[i] += coef
                    nxt[i + 1] -= coef * r
                poly = nxt
            try:
                ints = [_round_certified(cf) for cf in poly]
                return ClassPolynomial(disc, tuple(ints))
            except PrecisionInsufficient as exc:
                last = exc
    assert last is not None
    raise last


# ---------------------------------------------------------------------------
# Mirror pairs (the two-branch relation on CM pairs)


def mirror_point(tau: HalfPlanePoint) -> HalfPlanePoint:
    """Fixed point of the diag(-1,1)-conjugate of any stabilizing elliptic element."""
    return tau.mirror()


def tp_pair(
    s1: HalfPlanePoint, s2: HalfPlanePoint
) -> List[Tuple[HalfPlanePoint, HalfPlanePoint]]:
    """The pair itself plus the coordinate-wise mirror pair, duplicates collapsed.

    Both inputs are CM points (every quadratic imaginary point is), so the
    NotCM error of the contract is unreachable.
    """
    pairs = [(s1, s2)]
    mirrored = (s1.mirror(), s2.mirror())
    if mirrored != pairs[0]:
        pairs.append(mirrored)
    return pairs


# ---------------------------------------------------------------------------
# Level-1 shadow of algebraicity: symmetric functions over isogeny cosets


def prime_coset_elements(p: int) -> List[GroupElement]:
    """The p+1 classical degree-p coset representatives: [[1,j],[0,p]] and [[p,0],[0,1]]."""
    return [GroupElement(1, j, 0, p) for j in range(p)] + [GroupElement(p, 0, 0, 1)]


def symmetric_function_integers(
    disc: int, p: int, precision_bits: int = 160
) -> List[int]:
    """Certified integer elementary symmetric functions of the j-values
    j(g * tau_f) over the p+1 coset representatives g and all reduced
    forms f of the discriminant (the class-group orbit closes the set
    under Galois, making the symmetric functions rational integers)."""
    forms = reduced_forms(disc)
    with mp.workprec(precision_bits + 64):
        values = []
        for f in forms:
            tau = f.point()
            for g in prime_coset_elements(p):
                values.append(j_numeric(act(g, tau), precision_bits))
        poly = [mp.mpc(1)]
        for v in values:
            nxt = [mp.mpc(0)] * (len(poly) + 1)
            for i, coef in enumerate(poly):
                nxt[i] += coef
                nxt[i + 1] -= coef * v
            poly = nxt
        # elementary symmetric functions are the (sign-adjusted) coefficients
        return [_round_certified(cf) * (-1) ** k for k, cf in enumerate(poly)][1:]
