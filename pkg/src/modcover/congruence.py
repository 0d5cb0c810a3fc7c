"""Principal congruence subgroups, finite quotients SL2(Z/N), and the orbit
model of the covering maps into the level-N curves.

A point of the level-N curve is labelled by its fundamental-domain
representative together with a coset label in SL2(Z/N), normalized
modulo the finite stabilizer of the representative.  Labels are equal
exactly when the points lie in one Gamma(N)-orbit.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import BoundExceeded, NotDivisor, NotInSL2Z
from .gl2 import GroupElement, gen_s, gen_t, identity
from .halfplane import HalfPlanePoint, act
from .numutil import egcd

DEFAULT_ENUMERATION_BOUND = 24

_enumeration_bound = DEFAULT_ENUMERATION_BOUND
_sl2_cache: Dict[int, Tuple["ModMatrix", ...]] = {}
_cache_lock = threading.Lock()


def get_enumeration_bound() -> int:
    return _enumeration_bound


def set_enumeration_bound(bound: int) -> None:
    global _enumeration_bound
    if bound < 1:
        raise ValueError("enumeration bound must be >= 1")
    _enumeration_bound = bound


def check_level(n: int) -> int:
    if n < 1:
        raise ValueError("level must be a positive integer")
    return n


class ModMatrix:
    """2x2 matrix over Z/N with determinant 1 mod N."""

    __slots__ = ("N", "a", "b", "c", "d")

    def __init__(self, N: int, a: int, b: int, c: int, d: int):
        check_level(N)
        self.N = N
        self.a, self.b, self.c, self.d = a % N, b % N, c % N, d % N
        if (self.a * self.d - self.b * self.c) % N != 1 % N:
            raise ValueError(f"determinant must be 1 mod {N}")

    @classmethod
    def identity(cls, N: int) -> "ModMatrix":
        return cls(N, 1, 0, 0, 1)

    def entries(self) -> Tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __mul__(self, other: "ModMatrix") -> "ModMatrix":
        if self.N != other.N:
            raise ValueError("modulus mismatch")
        N = self.N
        return ModMatrix(
            N,
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "ModMatrix":
        # det = 1, so the adjugate is the inverse
        return ModMatrix(self.N, self.d, -self.b, -self.c, self.a)

    def reduce_to(self, m: int) -> "ModMatrix":
        if self.N % m != 0:
            raise NotDivisor(f"{m} does not divide modulus {self.N}")
        return ModMatrix(m, self.a, self.b, self.c, self.d)

    def is_identity(self) -> bool:
        return self.entries() == ModMatrix.identity(self.N).entries()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModMatrix):
            return NotImplemented
        return self.N == other.N and self.entries() == other.entries()

    def __hash__(self) -> int:
        return hash((self.N, self.entries()))

    def __repr__(self) -> str:
        return f"ModMatrix(N={self.N}, {self.a},{self.b},{self.c},{self.d})"


def reduce_mod(g: GroupElement, N: int) -> ModMatrix:
    """Entry-wise reduction SL2(Z) -> SL2(Z/N)."""
    check_level(N)
    if not g.is_sl2z():
        raise NotInSL2Z(f"{g!r} is not integral with determinant 1")
    return ModMatrix(N, int(g.a), int(g.b), int(g.c), int(g.d))


def in_gamma(g: GroupElement, N: int) -> bool:
    """Membership in the principal congruence subgroup of level N:
    integral, det 1, a = d = 1 and b = c = 0 mod N."""
    check_level(N)
    if not g.is_sl2z():
        return False
    a, b, c, d = (int(x) for x in g.entries())
    return a % N == 1 % N and d % N == 1 % N and b % N == 0 and c % N == 0


def sl2_enumerate(N: int) -> Tuple[ModMatrix, ...]:
    """All of SL2(Z/N), cached; populated at most once per level."""
    check_level(N)
    if N > _enumeration_bound:
        raise BoundExceeded(f"level {N} exceeds enumeration bound {_enumeration_bound}")
    got = _sl2_cache.get(N)
    if got is not None:
        return got
    with _cache_lock:
        got = _sl2_cache.get(N)
        if got is None:
            got = tuple(_enumerate_sl2(N))
            _sl2_cache[N] = got
    return got


def _enumerate_sl2(N: int) -> List[ModMatrix]:
    out = []
    for a in range(N):
        for b in range(N):
            for c in range(N):
                for d in range(N):
                    if (a * d - b * c) % N == 1 % N:
                        out.append(ModMatrix(N, a, b, c, d))
    return out


def sl2_order(N: int) -> int:
    """|SL2(Z/N)| by enumeration."""
    return len(sl2_enumerate(N))


def lift_sl2(m: ModMatrix) -> GroupElement:
    """Integral determinant-1 matrix reducing to m mod N (strong approximation)."""
    N = m.N
    a, b, c, d = m.entries()
    if a * d - b * c == 1:
        return GroupElement(a, b, c, d)
    # fix the bottom row to be coprime
    c1 = c if c != 0 else N
    d1 = d
    while math.gcd(c1, d1) != 1:
        d1 += N
    # adjust the top row so the determinant is exactly 1
    e = a * d1 - b * c1 - 1
    assert e % N == 0
    u = e // N
    _, x, y = egcd(d1, c1)  # x*d1 + y*c1 = 1
    a1 = a - u * N * x
    b1 = b + u * N * y
    out = GroupElement(a1, b1, c1, d1)
    assert out.det() == 1
    return out


# ---------------------------------------------------------------------------
# Fundamental domain and orbit labels


def reduce_to_fundamental_domain(tau: HalfPlanePoint) -> Tuple[GroupElement, HalfPlanePoint]:
    """(gamma, rep) with rep = gamma * tau in the standard fundamental domain.

    Boundary convention: -1/2 <= Re < 1/2, |rep| >= 1, and Re <= 0 when
    |rep| = 1; this makes the representative unique in its orbit.
    """
    s, t = gen_s(), gen_t()
    gamma = identity()
    z = tau
    while True:
        n = math.floor(z.x + Fraction(1, 2))
        if n != 0:
            shift = GroupElement(1, -n, 0, 1)
            z = act(shift, z)
            gamma = shift * gamma
        if z.norm() < 1:
            z = act(s, z)
            gamma = s * gamma
            continue
        break
    if z.norm() == 1 and z.x > 0:
        z = act(s, z)
        gamma = s * gamma
    assert Fraction(-1, 2) <= z.x < Fraction(1, 2) and z.norm() >= 1
    return gamma, z


def stabilizer_of_rep(rep: HalfPlanePoint) -> Tuple[GroupElement, ...]:
    """The finite stabilizer in SL2(Z) of a fundamental-domain representative.

    Generic points: {I, -I}; the corner i: the four powers of s; the
    corner (-1+sqrt(-3))/2: the six powers of s*t.
    """
    if rep.D == 1 and rep.x == 0 and rep.y == 1:
        s = gen_s()
        return tuple(s**k for k in range(4))
    if rep.D == 3 and rep.x == Fraction(-1, 2) and rep.y == Fraction(1, 2):
        st = gen_s() * gen_t()
        return tuple(st**k for k in range(6))
    return (identity(), GroupElement(-1, 0, 0, -1))


@dataclass(frozen=True)
class LevelOrbit:
    """Canonical label of a point of the level-N curve (a Gamma(N)-orbit)."""

    N: int
    rep: HalfPlanePoint
    coset: ModMatrix

    def to_dict(self) -> dict:
        return {"N": self.N, "rep": self.rep.to_dict(), "coset": list(self.coset.entries())}


def _min_coset(stab: Sequence[GroupElement], base: ModMatrix) -> ModMatrix:
    """Lexicographically smallest member of {sigma * base : sigma in stab} mod N."""
    best: Optional[ModMatrix] = None
    for sigma in stab:
        cand = reduce_mod(sigma, base.N) * base
        if best is None or cand.entries() < best.entries():
            best = cand
    assert best is not None
    return best


def orbit_id(tau: HalfPlanePoint, N: int) -> LevelOrbit:
    """Canonical Gamma(N)-orbit label; equal labels iff the points are in one orbit.

    The label is the fundamental-domain representative plus the class of
    the reducing matrix in SL2(Z/N), minimized over the representative's
    finite stabilizer so the choice of reducing matrix cancels out.
    """
    check_level(N)
    if N > _enumeration_bound:
        raise BoundExceeded(f"level {N} exceeds enumeration bound {_enumeration_bound}")
    gamma, rep = reduce_to_fundamental_domain(tau)
    stab = stabilizer_of_rep(rep)
    base = reduce_mod(gamma, N)
    return LevelOrbit(N, rep, _min_coset(stab, base))


def pr_map(o: LevelOrbit, M: int) -> LevelOrbit:
    """Projection to the level-M curve for M | N; the containing Gamma(M)-orbit."""
    check_level(M)
    if o.N % M != 0:
        raise NotDivisor(f"{M} does not divide {o.N}")
    stab = stabilizer_of_rep(o.rep)
    return LevelOrbit(M, o.rep, _min_coset(stab, o.coset.reduce_to(M)))


def gamma_orbit_witness(tau: HalfPlanePoint, other: HalfPlanePoint, N: int) -> Optional[GroupElement]:
    """A gamma in Gamma(N) with gamma * tau = other, or None.

    Independent of orbit_id: decided through the fundamental-domain
    reduction and the finite stabilizer of the representative.
    """
    g1, rep1 = reduce_to_fundamental_domain(tau)
    g2, rep2 = reduce_to_fundamental_domain(other)
    if rep1 != rep2:
        return None
    for sigma in stabilizer_of_rep(rep1):
        cand = g2.inverse() * sigma * g1
        if in_gamma(cand, N):
            assert act(cand, tau) == other
            return cand
    return None


def sample_gamma_element(rng, N: int, length: int = 4) -> GroupElement:
    """Random element of Gamma(N): a product of conjugated powers of t^N and t_-^N."""
    t = gen_t()
    t_minus = gen_s() * gen_t() * gen_s().inverse()
    out = identity()
    for _ in range(length):
        base = t if rng.random() < 0.5 else t_minus
        k = rng.choice([-2, -1, 1, 2])
        w = random_sl2_word(rng, 3)
        out = out * (w * base ** (N * k) * w.inverse())
    assert in_gamma(out, N)
    return out


def random_sl2_word(rng, length: int) -> GroupElement:
    """Random product of s and t^k with small exponents."""
    s, t = gen_s(), gen_t()
    out = identity()
    for _ in range(length):
        if rng.random() < 0.4:
            out = out * s
        else:
            out = out * t ** rng.choice([-3, -2, -1, 1, 2, 3])
    return out
