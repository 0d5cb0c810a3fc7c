"""Small exact number-theory helpers used across the package."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Tuple


def egcd(a: int, b: int) -> Tuple[int, int, int]:
    """Extended gcd: returns (g, x, y) with a*x + b*y = g = gcd(a, b), g >= 0."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def inv_mod(a: int, m: int) -> int:
    """Inverse of a modulo m; ValueError if not coprime."""
    if m == 1:
        return 0
    g, x, _ = egcd(a % m, m)
    if g != 1:
        raise ValueError(f"{a} is not invertible mod {m}")
    return x % m


def factorize(n: int) -> Dict[int, int]:
    """Prime factorization of n >= 1 by trial division (desk scale)."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out: Dict[int, int] = {}
    x = n
    p = 2
    while p * p <= x:
        while x % p == 0:
            out[p] = out.get(p, 0) + 1
            x //= p
        p = 3 if p == 2 else p + 2
    if x > 1:
        out[x] = out.get(x, 0) + 1
    return out


def divisors(n: int) -> List[int]:
    """All positive divisors of n, sorted ascending."""
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def squarefree_split(n: int) -> Tuple[int, int]:
    """Write n >= 1 as f^2 * d with d squarefree; returns (f, d)."""
    f, d = 1, 1
    for p, e in factorize(n).items():
        f *= p ** (e // 2)
        if e % 2:
            d *= p
    return f, d


def euler_phi(n: int) -> int:
    """Euler totient."""
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


def units_mod(n: int) -> List[int]:
    """Residues coprime to n in [1, n); for n = 1 the single unit is 0."""
    if n == 1:
        return [0]
    return [u for u in range(1, n) if math.gcd(u, n) == 1]


def lcm_den(*fracs: Fraction) -> int:
    """lcm of the denominators of the given fractions."""
    out = 1
    for f in fracs:
        out = out * f.denominator // math.gcd(out, f.denominator)
    return out
