"""Hecke correspondences on level-N curves via double cosets in finite quotients.

Degrees over the two factors are subgroup indices computed inside
SL2(Z/W) with the integral criterion g*x*adj(g) = det(g)*I mod N*det(g);
components are compared as twisted double-coset relations on coset-pair
space.  Working moduli grow until the answers stabilize.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple

from .congruence import ModMatrix, lift_sl2, sl2_enumerate
from .errors import BoundExceeded
from .gl2 import GroupElement
from .halfplane import HalfPlanePoint, act
from .numutil import inv_mod, lcm_den, units_mod

# kernel enumeration scans (W/N)^4 candidate matrices; guard the blow-up
DEFAULT_KERNEL_SCAN_LIMIT = 2_000_000

_kernel_scan_limit = DEFAULT_KERNEL_SCAN_LIMIT
_kernel_cache: Dict[Tuple[int, int], Tuple[Tuple[int, int, int, int], ...]] = {}
_kernel_lock = threading.Lock()

IntMat = Tuple[int, int, int, int]


def set_kernel_scan_limit(limit: int) -> None:
    global _kernel_scan_limit
    _kernel_scan_limit = limit


def _mat_mul(x: IntMat, y: IntMat, w: int) -> IntMat:
    return (
        (x[0] * y[0] + x[1] * y[2]) % w,
        (x[0] * y[1] + x[1] * y[3]) % w,
        (x[2] * y[0] + x[3] * y[2]) % w,
        (x[2] * y[1] + x[3] * y[3]) % w,
    )


def _mat_adj(x: IntMat, w: int) -> IntMat:
    return (x[3] % w, -x[1] % w, -x[2] % w, x[0] % w)


@dataclass(frozen=True)
class CorrespondenceDescriptor:
    """A correspondence datum: primitive integral g (content removed) and a level."""

    g: GroupElement
    N: int

    @classmethod
    def from_element(cls, g: GroupElement, N: int) -> "CorrespondenceDescriptor":
        if N < 1:
            raise ValueError("level must be >= 1")
        den = lcm_den(*g.entries())
        ints = [int(x * den) for x in g.entries()]
        content = math.gcd(*(abs(v) for v in ints))
        prim = GroupElement(*(v // content for v in ints))
        return cls(prim, N)

    @property
    def degree_det(self) -> int:
        return int(self.g.det())


def _kernel_mod(W: int, N: int) -> Tuple[IntMat, ...]:
    """Elements of SL2(Z/W) congruent to the identity mod N (N | W)."""
    key = (W, N)
    got = _kernel_cache.get(key)
    if got is not None:
        return got
    step = W // N
    if step**4 > _kernel_scan_limit:
        raise BoundExceeded(f"kernel scan for W={W}, N={N} exceeds the configured limit")
    with _kernel_lock:
        got = _kernel_cache.get(key)
        if got is None:
            out = []
            for a in range(step):
                for b in range(step):
                    for c in range(step):
                        for d in range(step):
                            x = (1 + N * a, N * b, N * c, 1 + N * d)
                            if (x[0] * x[3] - x[1] * x[2]) % W == 1 % W:
                                out.append(tuple(v % W for v in x))
            got = tuple(out)
            _kernel_cache[key] = got
    return got


def _index_pair(desc: CorrespondenceDescriptor, W: int) -> Tuple[int, int]:
    """Left/right subgroup indices at working modulus W (a multiple of N*m)."""
    N, m = desc.N, desc.degree_det
    nm = N * m
    g = tuple(int(v) % W for v in desc.g.entries())
    gadj = _mat_adj(g, W)
    target = (m % nm, 0, 0, m % nm)
    kernel = _kernel_mod(W, N)
    left = right = 0
    for x in kernel:
        gx = _mat_mul(_mat_mul(g, x, W), gadj, W)
        if tuple(v % nm for v in gx) == target:
            left += 1
        xg = _mat_mul(_mat_mul(gadj, x, W), g, W)
        if tuple(v % nm for v in xg) == target:
            right += 1
    total = len(kernel)
    assert total % left == 0 and total % right == 0
    return total // left, total // right


@dataclass(frozen=True)
class DegreeResult:
    left: int
    right: int
    modulus: int
    trace: Tuple[Tuple[int, Tuple[int, int]], ...]
    exact: bool

    def to_dict(self) -> dict:
        return {
            "left": self.left,
            "right": self.right,
            "modulus": self.modulus,
            "trace": [{"modulus": w, "left": lr[0], "right": lr[1]} for w, lr in self.trace],
            "exact": self.exact,
        }


def correspondence_degree_detailed(desc: CorrespondenceDescriptor) -> DegreeResult:
    """Fiber degrees over the two factors, with the stabilization trace.

    The working modulus starts at N*m and doubles until the indices
    agree twice consecutively.
    """
    w0 = desc.N * desc.degree_det
    trace: List[Tuple[int, Tuple[int, int]]] = []
    values: List[Tuple[int, int]] = []
    w = w0
    while True:
        try:
            pair = _index_pair(desc, w)
        except BoundExceeded:
            if not values:
                raise
            return DegreeResult(*values[-1], modulus=trace[-1][0], trace=tuple(trace), exact=False)
        trace.append((w, pair))
        values.append(pair)
        if len(values) >= 3 and values[-1] == values[-2] == values[-3]:
            return DegreeResult(*pair, modulus=w, trace=tuple(trace), exact=True)
        w *= 2


def correspondence_degree(desc: CorrespondenceDescriptor) -> Tuple[int, int]:
    res = correspondence_degree_detailed(desc)
    return res.left, res.right


# ---------------------------------------------------------------------------
# Component counting over the unit twists


def _unit_lift(mu: int, N: int, W: int) -> int:
    """An integer congruent to mu mod N and coprime to W."""
    if N == 1:
        return 1
    cand = mu % N
    if cand == 0:
        cand = N  # only for N = 1, unreachable here
    while math.gcd(cand, W) != 1:
        cand += N
        if cand > W * 2:
            raise ValueError(f"no unit lift of {mu} mod {N} coprime to {W}")
    return cand


def _twisted_rep(desc: CorrespondenceDescriptor, mu: int, W: int) -> IntMat:
    """diag(mu,1)-conjugate of the primitive representative, mod W."""
    a, b, c, d = (int(v) for v in desc.g.entries())
    mh = _unit_lift(mu, desc.N, W)
    mi = inv_mod(mh, W)
    return (a % W, b * mh % W, c * mi % W, d % W)


def _twisted_relation(desc: CorrespondenceDescriptor, mu: int, W: int) -> FrozenSet:
    """The correspondence as a subset of coset-pair space at modulus W.

    Cosets of the level-N kernel inside SL2(Z/W) are labelled by the
    reduction mod N; a pair of cosets is related when the connecting
    product lands in the twisted double coset.
    """
    N = desc.N
    kernel = _kernel_mod(W, N)
    gmu = _twisted_rep(desc, mu, W)
    half = [_mat_mul(k, gmu, W) for k in kernel]
    double_coset = set()
    for h in half:
        for k2 in kernel:
            double_coset.add(_mat_mul(h, k2, W))
    reps = []
    for u in sl2_enumerate(N):
        lift = lift_sl2(u)
        reps.append((u.entries(), tuple(int(v) % W for v in lift.entries())))
    rel = set()
    for ulabel, ux in reps:
        ux_inv = _mat_adj(ux, W)
        for vlabel, vx in reps:
            prod = _mat_mul(_mat_mul(vx, gmu, W), ux_inv, W)
            if prod in double_coset:
                rel.add((ulabel, vlabel))
    return frozenset(rel)


@dataclass(frozen=True)
class ComponentResult:
    count: int
    exact: bool
    modulus: int
    classes: Tuple[Tuple[int, ...], ...]

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "exact": self.exact,
            "modulus": self.modulus,
            "classes": [list(c) for c in self.classes],
        }


def component_count_detailed(desc: CorrespondenceDescriptor) -> ComponentResult:
    """Number of classes of unit twists with distinct finite correspondences.

    Classes are computed at working moduli N*m, 2*N*m and 3*N*m; the
    exactness flag reports whether the partition stabilized across all
    three.  The count never exceeds the number of units mod N.
    """
    N = desc.N
    units = units_mod(N)
    if len(units) <= 1:
        return ComponentResult(1, True, N * desc.degree_det, (tuple(units),))
    w0 = N * desc.degree_det
    partitions = []
    modulus = w0
    for w in (w0, 2 * w0, 3 * w0):
        try:
            by_rel: Dict[FrozenSet, List[int]] = {}
            for mu in units:
                by_rel.setdefault(_twisted_relation(desc, mu, w), []).append(mu)
            partitions.append(tuple(sorted(tuple(sorted(v)) for v in by_rel.values())))
            modulus = w
        except BoundExceeded:
            if not partitions:
                raise
            break
    exact = len(partitions) == 3 and partitions[0] == partitions[1] == partitions[2]
    classes = partitions[-1]
    return ComponentResult(len(classes), exact, modulus, classes)


def component_count(desc: CorrespondenceDescriptor) -> Tuple[int, bool]:
    res = component_count_detailed(desc)
    return res.count, res.exact


# ---------------------------------------------------------------------------
# Hecke-orbit equivalence on exact points


def hecke_orbit_witness(tau1: HalfPlanePoint, tau2: HalfPlanePoint) -> Optional[GroupElement]:
    """An element of GL2+(Q) moving tau1 to tau2, or None when the fields differ.

    The group acts transitively on the quadratic points of one imaginary
    quadratic field: an affine map y2/y1 * (z - x1) + x2 suffices.
    """
    if tau1.D != tau2.D:
        return None
    witness = GroupElement(tau2.y, tau2.x * tau1.y - tau1.x * tau2.y, 0, tau1.y)
    den = lcm_den(*witness.entries())
    ints = [int(v * den) for v in witness.entries()]
    content = math.gcd(*(abs(v) for v in ints))
    witness = GroupElement(*(v // content for v in ints))
    assert act(witness, tau1) == tau2
    return witness


def same_hecke_orbit(tau1: HalfPlanePoint, tau2: HalfPlanePoint) -> bool:
    """Whether some rational Moebius transformation maps tau1 to tau2."""
    return hecke_orbit_witness(tau1, tau2) is not None
