"""Truncated profinite matrices and the rigidity solver.

An element of the rational-diagonal-times-SL2 group is stored at finite
precision M as an exact positive rational q (the diagonal part d_q,
never truncated) together with a CRT-compatible family of SL2(Z/m)
matrices for m | M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .congruence import ModMatrix
from .errors import BadModulus, Inconsistent, PrecisionMismatch
from .gl2 import GroupElement, decompose_gl2plus, gen_d, gen_s, gen_t
from .numutil import divisors, inv_mod


@dataclass(frozen=True)
class TruncatedUnit:
    """A residue in (Z/M)^*; precision-M truncation of a profinite unit."""

    M: int
    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.M if self.M > 1 else 0)
        if self.M < 1 or math.gcd(self.value, self.M) != 1:
            raise ValueError(f"{self.value} is not a unit mod {self.M}")

    def inverse(self) -> "TruncatedUnit":
        return TruncatedUnit(self.M, inv_mod(self.value, self.M))

    def __mul__(self, other: "TruncatedUnit") -> "TruncatedUnit":
        if self.M != other.M:
            raise PrecisionMismatch(f"unit moduli differ: {self.M} vs {other.M}")
        return TruncatedUnit(self.M, self.value * other.value)


class TruncatedAdelic:
    """Precision-M element: exact rational diagonal part q plus finite layers."""

    __slots__ = ("M", "q", "layers")

    def __init__(self, M: int, q: Fraction, layers: Dict[int, ModMatrix]):
        if M < 1:
            raise ValueError("precision modulus must be >= 1")
        q = Fraction(q)
        if q <= 0:
            raise ValueError("diagonal part must be positive")
        for m, mat in layers.items():
            if M % m != 0:
                raise ValueError(f"layer modulus {m} does not divide precision {M}")
            if mat.N != m:
                raise ValueError(f"layer {m} holds a matrix mod {mat.N}")
        self.M = M
        self.q = q
        self.layers = dict(layers)

    def layer(self, m: int) -> ModMatrix:
        return self.layers[m]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedAdelic):
            return NotImplemented
        return self.M == other.M and self.q == other.q and self.layers == other.layers

    def __repr__(self) -> str:
        return f"TruncatedAdelic(M={self.M}, q={self.q}, layers={sorted(self.layers)})"

    def __mul__(self, other: "TruncatedAdelic") -> "TruncatedAdelic":
        """Group law: (d_q1 h1)(d_q2 h2) = d_{q1 q2} (d_q2^-1 h1 d_q2) h2."""
        if self.M != other.M:
            raise PrecisionMismatch(f"precisions differ: {self.M} vs {other.M}")
        out: Dict[int, ModMatrix] = {}
        for m in sorted(set(self.layers) & set(other.layers)):
            conj = _conj_by_rational_diag(self.layers[m], other.q, invert=True)
            out[m] = conj * other.layers[m]
        return TruncatedAdelic(self.M, self.q * other.q, out)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "q": str(self.q),
            "layers": {str(m): list(mat.entries()) for m, mat in sorted(self.layers.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TruncatedAdelic":
        layers = {
            int(m): ModMatrix(int(m), *[int(v) for v in vals])
            for m, vals in data["layers"].items()
        }
        return cls(int(data["M"]), Fraction(str(data["q"])), layers)


def _reduce_fraction(x: Fraction, m: int) -> int:
    if m == 1:
        return 0
    if math.gcd(x.denominator, m) != 1:
        raise BadModulus(f"denominator {x.denominator} not invertible mod {m}")
    return x.numerator * inv_mod(x.denominator, m) % m


def _reduce_rational_matrix(g: GroupElement, m: int) -> ModMatrix:
    return ModMatrix(m, *(_reduce_fraction(x, m) for x in g.entries()))


def _conj_by_rational_diag(mat: ModMatrix, q: Fraction, invert: bool = False) -> ModMatrix:
    """diag(q,1) * mat * diag(q,1)^-1 mod m (or the inverse conjugation)."""
    m = mat.N
    if m == 1:
        return mat
    if math.gcd(q.numerator * q.denominator, m) != 1:
        raise BadModulus(f"diagonal part {q} not invertible mod {m}")
    qm = _reduce_fraction(q, m)
    qi = inv_mod(qm, m)
    if invert:
        qm, qi = qi, qm
    a, b, c, d = mat.entries()
    return ModMatrix(m, a, b * qm, c * qi, d)


def embed_rational(g: GroupElement, M: int) -> TruncatedAdelic:
    """Embed g in GL2+(Q) at precision M.

    The diagonal part is d_{det g}; the finite part is the exact
    determinant-1 rational matrix d_{det g}^-1 g reduced mod every m | M.
    Rejected when the normal-form diagonal data of g (the elementary
    divisor ratio q and the scalar) is not invertible mod M.
    """
    if M < 1:
        raise ValueError("precision modulus must be >= 1")
    _, scale, q, _ = decompose_gl2plus(g)
    blockers = q.numerator * q.denominator * scale.numerator * scale.denominator
    if math.gcd(blockers, M) != 1:
        raise BadModulus(
            f"diagonal data (q={q}, scale={scale}) shares a factor with precision {M}"
        )
    det = g.det()
    assert det == scale * scale * q
    h = gen_d(det).inverse() * g  # determinant 1, denominators invertible mod M
    layers = {m: _reduce_rational_matrix(h, m) for m in divisors(M)}
    return TruncatedAdelic(M, det, layers)


def conj_by_unit(x: TruncatedAdelic, lam: TruncatedUnit) -> TruncatedAdelic:
    """Layer-wise conjugation d_lam * layer * d_lam^-1; the diagonal part is unchanged.

    This is the d_lam . g . d_lam^-1 orientation; the naming-twist law
    uses the opposite orientation, i.e. callers there pass the inverse unit.
    """
    if x.M != lam.M:
        raise PrecisionMismatch(f"precision {x.M} vs unit modulus {lam.M}")
    out = {}
    for m, mat in x.layers.items():
        lm = lam.value % m if m > 1 else 0
        a, b, c, d = mat.entries()
        li = inv_mod(lm, m) if m > 1 else 0
        out[m] = ModMatrix(m, a, b * lm, c * li, d)
    return TruncatedAdelic(x.M, x.q, out)


def check_compatibility(x: TruncatedAdelic) -> bool:
    """Whether every stored layer reduces to every coarser stored layer."""
    mods = sorted(x.layers)
    for m in mods:
        for mp in mods:
            if mp < m and m % mp == 0:
                if x.layers[m].reduce_to(mp) != x.layers[mp]:
                    return False
    return True


# ---------------------------------------------------------------------------
# Rigidity solver


@dataclass
class RigidityResult:
    """Outcome of the rigidity analysis: the twisting unit plus diagnostics."""

    unit: TruncatedUnit
    cube_signs: Dict[int, int] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)


def _layer_pairs(s_img: TruncatedAdelic, t_img: TruncatedAdelic):
    mods = sorted(set(s_img.layers) & set(t_img.layers))
    return [(m, s_img.layers[m], t_img.layers[m]) for m in mods if m > 1]


def solve_lambda_detailed(s_img: TruncatedAdelic, t_img: TruncatedAdelic) -> RigidityResult:
    """Find the unit lambda conjugating the standard generator pair onto the inputs.

    Verifies the constraint equations first (square of the first input is
    -I, anti-commutation with diag(-1,1), upper-triangularity and the
    shear scaling law for the second, and that the cube of the product is
    +-I, recording which sign), then extracts lambda from the shear entry
    and confirms both inputs are the d_lambda-conjugates of the standard
    pair at every layer.  Raises Inconsistent naming the first violated
    equation otherwise.
    """
    if s_img.M != t_img.M:
        raise PrecisionMismatch(f"precisions differ: {s_img.M} vs {t_img.M}")
    M = s_img.M
    if M not in s_img.layers or M not in t_img.layers:
        raise Inconsistent("missing finest layer in input family")
    if s_img.q != 1 or t_img.q != 1:
        raise Inconsistent("generator images must have trivial diagonal part")
    if not check_compatibility(s_img):
        raise Inconsistent("first input family is not CRT-compatible")
    if not check_compatibility(t_img):
        raise Inconsistent("second input family is not CRT-compatible")

    result_signs: Dict[int, int] = {}
    notes: List[str] = []
    for m, sm, tm in _layer_pairs(s_img, t_img):
        _check_layer_equations(m, sm, tm, result_signs, notes)

    lam_val = t_img.layers[M].b if M > 1 else 0
    if M > 1 and math.gcd(lam_val, M) != 1:
        raise Inconsistent(f"shear entry {lam_val} is not a unit mod {M}")
    unit = TruncatedUnit(M, lam_val if M > 1 else 0)

    s_std = embed_rational(gen_s(), M)
    t_std = embed_rational(gen_t(), M)
    expect_s = conj_by_unit(s_std, unit)
    expect_t = conj_by_unit(t_std, unit)
    for m in sorted(s_img.layers):
        if s_img.layers[m] != expect_s.layers[m]:
            raise Inconsistent(
                f"first input mod {m} is not the d_lambda conjugate of the s-generator"
            )
    for m in sorted(t_img.layers):
        if t_img.layers[m] != expect_t.layers[m]:
            raise Inconsistent(
                f"second input mod {m} is not the d_lambda conjugate of the t-generator"
            )
    if any(sign == 1 for m, sign in result_signs.items() if m > 2):
        notes.append("cube of product is +I at some layer; conjugates of (s,t) give -I")
    return RigidityResult(unit, result_signs, notes)


def solve_lambda(s_img: TruncatedAdelic, t_img: TruncatedAdelic) -> TruncatedUnit:
    """The unit recovered by the rigidity analysis; see solve_lambda_detailed."""
    return solve_lambda_detailed(s_img, t_img).unit


def _check_layer_equations(
    m: int, sm: ModMatrix, tm: ModMatrix, signs: Dict[int, int], notes: List[str]
) -> None:
    neg = ModMatrix(m, -1, 0, 0, -1)
    # anti-commutation s' d_-1 = d'_-1 s' forces the diagonal of s' to be
    # 2-torsion: [[-a, b],[-c, d]] = [[a, b],[-c, -d]]
    a, _, _, d = sm.entries()
    if (2 * a) % m != 0 or (2 * d) % m != 0:
        raise Inconsistent(f"anti-commutation with d_-1 fails mod {m}")
    if (sm * sm) != neg:
        raise Inconsistent(f"square of first input is not -I mod {m}")
    if tm.c != 0:
        raise Inconsistent(f"second input is not upper-triangular mod {m} "
                           f"(conjugation by d_n cannot stay integral for all n)")
    for n in range(2, m + 2):
        if math.gcd(n, m) != 1:
            continue
        ninv = inv_mod(n % m, m)
        conj = ModMatrix(m, tm.a, tm.b * n, tm.c * ninv, tm.d)
        power = _mod_power(tm, n)
        if conj != power:
            raise Inconsistent(f"shear scaling law fails mod {m} at n={n}")
    cube = _mod_power(sm * tm, 3)
    if cube == ModMatrix.identity(m):
        signs[m] = 1
    elif cube == neg:
        signs[m] = -1
    else:
        raise Inconsistent(f"cube of product is neither I nor -I mod {m}")


def _mod_power(mat: ModMatrix, n: int) -> ModMatrix:
    out = ModMatrix.identity(mat.N)
    base = mat
    while n:
        if n & 1:
            out = out * base
        base = base * base
        n >>= 1
    return out
