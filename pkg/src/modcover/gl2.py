"""Exact arithmetic in GL2+(Q) with the generator presentation s, t, d_q.

Matrices are 2x2 over Fraction with positive determinant.  Words are
formal products over the alphabet {S, T, D(q), NEG} and evaluate back to
matrices.  Decomposition routines express integral determinant-1
matrices as words in S, T, NEG (Euclidean reduction on the first
column) and arbitrary elements as scale * gamma1 * d_q * gamma2 via an
elementary-divisor normal form.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .errors import NotInSL2Z
from .numutil import lcm_den

RationalLike = int | Fraction


class ElementKind(Enum):
    CENTRAL = "central"
    ELLIPTIC = "elliptic"
    NON_ELLIPTIC = "non-elliptic"


class GroupElement:
    """2x2 rational matrix with positive determinant, stored row-major."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: RationalLike, b: RationalLike, c: RationalLike, d: RationalLike):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.c = Fraction(c)
        self.d = Fraction(d)
        if self.a * self.d - self.b * self.c <= 0:
            raise ValueError(f"determinant must be positive, got matrix {self.entries()}")

    def entries(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def trace(self) -> Fraction:
        return self.a + self.d

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if not isinstance(other, GroupElement):
            return NotImplemented
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __rmul__(self, scalar: RationalLike) -> "GroupElement":
        # nonzero rational scalar keeps the determinant positive
        s = Fraction(scalar)
        if s == 0:
            raise ValueError("scalar must be nonzero")
        return GroupElement(s * self.a, s * self.b, s * self.c, s * self.d)

    def inverse(self) -> "GroupElement":
        det = self.det()
        return GroupElement(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return self.inverse() ** (-n)
        out = identity()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.entries() == other.entries()

    def __hash__(self) -> int:
        return hash(self.entries())

    def __repr__(self) -> str:
        return f"GroupElement({self.a}, {self.b}, {self.c}, {self.d})"

    def __str__(self) -> str:
        return format_matrix(self)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.entries())

    def is_sl2z(self) -> bool:
        return self.is_integral() and self.det() == 1

    def is_central(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d


def identity() -> GroupElement:
    return GroupElement(1, 0, 0, 1)


def gen_s() -> GroupElement:
    return GroupElement(0, -1, 1, 0)


def gen_t() -> GroupElement:
    return GroupElement(1, 1, 0, 1)


def gen_t_minus() -> GroupElement:
    return GroupElement(1, 0, -1, 1)


def gen_d(q: RationalLike) -> GroupElement:
    q = Fraction(q)
    if q <= 0:
        raise ValueError("d_q requires q > 0")
    return GroupElement(q, 0, 0, 1)


def gen_d_prime(q: RationalLike) -> GroupElement:
    q = Fraction(q)
    if q <= 0:
        raise ValueError("d'_q requires q > 0")
    return GroupElement(1, 0, 0, q)


def neg_identity() -> GroupElement:
    return GroupElement(-1, 0, 0, -1)


def classify(g: GroupElement) -> ElementKind:
    """Central, elliptic (trace^2 < 4 det, strict), or non-elliptic."""
    if g.is_central():
        return ElementKind.CENTRAL
    if g.trace() ** 2 < 4 * g.det():
        return ElementKind.ELLIPTIC
    return ElementKind.NON_ELLIPTIC


def involution(g: GroupElement) -> GroupElement:
    """Conjugation by diag(-1, 1); an order-2 automorphism fixing all diagonal elements."""
    return GroupElement(g.a, -g.b, -g.c, g.d)


# ---------------------------------------------------------------------------
# Words over the generator alphabet


@dataclass(frozen=True)
class Letter:
    """One word letter: kind in {S, T, NEG, D}; D carries a positive rational parameter."""

    kind: str
    exponent: int = 1
    param: Optional[Fraction] = None

    def matrix(self) -> GroupElement:
        if self.kind == "S":
            return gen_s() ** self.exponent
        if self.kind == "T":
            return GroupElement(1, self.exponent, 0, 1)
        if self.kind == "NEG":
            return neg_identity() if self.exponent % 2 else identity()
        if self.kind == "D":
            assert self.param is not None
            return gen_d(self.param**self.exponent)
        raise ValueError(f"unknown letter kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "D":
            base = f"D({self.param})"
        else:
            base = self.kind
        return base if self.exponent == 1 else f"{base}^{self.exponent}"


class Word:
    """Formal product of letters; adjacent letters of one kind are merged."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable[Letter] = ()):
        self.letters: Tuple[Letter, ...] = tuple(_normalize(letters))

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        out = []
        for let in reversed(self.letters):
            if let.kind == "D":
                assert let.param is not None
                out.append(Letter("D", let.exponent, 1 / let.param))
            elif let.kind == "NEG":
                out.append(let)
            else:
                out.append(Letter(let.kind, -let.exponent))
        return Word(out)

    def evaluate(self) -> GroupElement:
        out = identity()
        for let in self.letters:
            out = out * let.matrix()
        return out

    def __len__(self) -> int:
        return len(self.letters)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"

    def __str__(self) -> str:
        return " ".join(str(let) for let in self.letters) if self.letters else "<empty>"


def _normalize(letters: Iterable[Letter]) -> List[Letter]:
    out: List[Letter] = []
    for let in letters:
        if let.kind == "D":
            assert let.param is not None and let.param > 0
            q = let.param**let.exponent
            let = Letter("D", 1, q)
            if q == 1:
                continue
        elif let.kind == "NEG":
            if let.exponent % 2 == 0:
                continue
            let = Letter("NEG", 1)
        elif let.exponent == 0:
            continue
        if out and out[-1].kind == let.kind:
            prev = out.pop()
            if let.kind == "D":
                q = prev.param * let.param  # type: ignore[operator]
                if q != 1:
                    out.append(Letter("D", 1, q))
            elif let.kind == "NEG":
                pass  # NEG^2 = identity
            else:
                k = prev.exponent + let.exponent
                if k != 0:
                    out.append(Letter(let.kind, k))
        else:
            out.append(let)
    return out


def word_eval(w: Word) -> GroupElement:
    return w.evaluate()


def word_decompose_sl2(g: GroupElement) -> Word:
    """Word over {S, T, NEG} evaluating to g, for integral determinant-1 g.

    Euclidean reduction on the first column: T^k keeps |a| below |c|,
    S swaps the rows; letter count is O(log max entry).
    """
    if not g.is_sl2z():
        raise NotInSL2Z(f"matrix {g.entries()} is not integral with determinant 1")
    a, b, c, d = (int(x) for x in g.entries())
    applied: List[Letter] = []  # left-multiplications bringing g to the identity
    while c != 0:
        k = a // c
        if k != 0:
            # T^-k on the left reduces a to a mod c
            a, b = a - k * c, b - k * d
            applied.append(Letter("T", -k))
        a, b, c, d = -c, -d, a, b
        applied.append(Letter("S", 1))
    # now c = 0 and a*d = 1
    if a == -1:
        a, b, c, d = -a, -b, -c, -d
        applied.append(Letter("NEG", 1))
    if b != 0:
        applied.append(Letter("T", -b))
    # applied[k-1] * ... * applied[0] * g = I, so g is the product of the
    # inverses taken in application order
    word = Word()
    for let in applied:
        word = word * Word([let]).inverse()
    return word


def _content(vals: Sequence[int]) -> int:
    return math.gcd(*(abs(v) for v in vals)) if vals else 0


def _smith_2x2(p: Tuple[int, int, int, int]) -> Tuple[GroupElement, int, int, GroupElement]:
    """For primitive integral P with det m > 0: P = U * diag(alpha, beta) * V.

    U, V are unimodular integer matrices (det +-1), alpha | beta, both > 0.
    Primitivity forces alpha = 1.
    """
    a, b, c, d = p
    A = [[a, b], [c, d]]
    L = [[1, 0], [0, 1]]  # invariant: L * P * R == A
    R = [[1, 0], [0, 1]]

    def row_op(k: int) -> None:  # row1 -= k * row0
        A[1][0] -= k * A[0][0]
        A[1][1] -= k * A[0][1]
        L[1][0] -= k * L[0][0]
        L[1][1] -= k * L[0][1]

    def row_op_up(k: int) -> None:  # row0 -= k * row1
        A[0][0] -= k * A[1][0]
        A[0][1] -= k * A[1][1]
        L[0][0] -= k * L[1][0]
        L[0][1] -= k * L[1][1]

    def col_op(k: int) -> None:  # col1 -= k * col0
        A[0][1] -= k * A[0][0]
        A[1][1] -= k * A[1][0]
        R[0][1] -= k * R[0][0]
        R[1][1] -= k * R[1][0]

    def swap_rows() -> None:
        A[0], A[1] = A[1], A[0]
        L[0], L[1] = L[1], L[0]

    def swap_cols() -> None:
        A[0][0], A[0][1] = A[0][1], A[0][0]
        A[1][0], A[1][1] = A[1][1], A[1][0]
        R[0][0], R[0][1] = R[0][1], R[0][0]
        R[1][0], R[1][1] = R[1][1], R[1][0]

    while True:
        while A[1][0] != 0 or A[0][1] != 0:
            if A[0][0] == 0:
                if A[1][0] != 0:
                    swap_rows()
                else:
                    swap_cols()
                continue
            if A[1][0] != 0:
                k = A[1][0] // A[0][0]
                row_op(k)
                if A[1][0] != 0:
                    swap_rows()
                continue
            k = A[0][1] // A[0][0]
            col_op(k)
            if A[0][1] != 0:
                swap_cols()
        if A[1][1] % A[0][0] == 0:
            break
        row_op_up(-1)  # mix the rows so the gcd of the divisors can surface

    if A[0][0] < 0:  # scale row 0 by -1
        A[0][0] = -A[0][0]
        L[0][0], L[0][1] = -L[0][0], -L[0][1]
    if A[1][1] < 0:
        A[1][1] = -A[1][1]
        L[1][0], L[1][1] = -L[1][0], -L[1][1]

    alpha, beta = A[0][0], A[1][1]
    # L * P * R = diag(alpha, beta)  =>  P = L^-1 diag R^-1
    det_l = L[0][0] * L[1][1] - L[0][1] * L[1][0]
    det_r = R[0][0] * R[1][1] - R[0][1] * R[1][0]
    assert det_l in (1, -1) and det_r in (1, -1)
    u = _unimodular_inverse(L, det_l)
    v = _unimodular_inverse(R, det_r)
    return u, alpha, beta, v


def _unimodular_inverse(M: List[List[int]], det: int) -> GroupElement:
    # integer inverse of a det +-1 matrix; may itself have det -1, so bypass
    # the GroupElement constructor check by building entries for det +1 later
    a, b, c, d = M[0][0], M[0][1], M[1][0], M[1][1]
    inv = (d * det, -b * det, -c * det, a * det)
    return _RawMat(*inv)


class _RawMat:
    """Integer 2x2 matrix of determinant +-1 used only inside normal-form extraction."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int, c: int, d: int):
        self.a, self.b, self.c, self.d = a, b, c, d

    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def mul_raw(self, other: "_RawMat") -> "_RawMat":
        return _RawMat(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def to_group(self) -> GroupElement:
        return GroupElement(self.a, self.b, self.c, self.d)


_J = _RawMat(1, 0, 0, -1)
_SWAP = _RawMat(0, 1, 1, 0)


def decompose_gl2plus(g: GroupElement) -> Tuple[Word, Fraction, Fraction, Word]:
    """Normal form g = scale * gamma1 * d_q * gamma2 with gamma_i in SL2(Z), q >= 1.

    The input is scaled to a primitive integer matrix first; the scalar
    goes into `scale` and q is the ratio of the elementary divisors.
    """
    den = lcm_den(*g.entries())
    ints = tuple(int(x * den) for x in g.entries())
    content = _content(ints)
    prim = tuple(v // content for v in ints)
    scale = Fraction(content, den)
    pm = GroupElement(*prim)

    if pm.det() == 1:
        return word_decompose_sl2(pm), scale, Fraction(1), Word()
    if prim[1] == 0 and prim[2] == 0 and prim[0] > 0 and prim[3] > 0 and prim[0] % prim[3] == 0:
        # already diagonal with q = a/d integral
        return Word(), scale * prim[3], Fraction(prim[0], prim[3]), Word()

    u, alpha, beta, v = _smith_2x2(prim)  # prim = u * diag(alpha, beta) * v
    assert alpha == 1, "primitive 2x2 matrix has first elementary divisor 1"
    # diag(1, beta) = swap * diag(beta, 1) * swap
    u2 = u.mul_raw(_SWAP)
    v2 = _SWAP.mul_raw(v)
    if u2.det() == -1:
        # J * diag(beta,1) * J = diag(beta,1), J = diag(1,-1)
        u2 = u2.mul_raw(_J)
        v2 = _J.mul_raw(v2)
    g1, g2 = u2.to_group(), v2.to_group()
    assert g1.det() == 1 and g2.det() == 1
    q = Fraction(beta)
    out = (word_decompose_sl2(g1), scale, q, word_decompose_sl2(g2))
    check = out[0].evaluate() * (out[1] * gen_d(q)) * out[3].evaluate()
    assert check == g, "normal form must reassemble exactly"
    return out


# ---------------------------------------------------------------------------
# Presentation relations


@dataclass(frozen=True)
class RelationResult:
    name: str
    passed: bool
    witness: Optional[str] = None


@dataclass(frozen=True)
class PresentationReport:
    results: Tuple[RelationResult, ...]
    vacuous: bool = False

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)


Relation = Tuple[str, Callable[[Sequence[Fraction], Sequence[int]], Optional[str]]]


def _rel_s_square(qs: Sequence[Fraction], ns: Sequence[int]) -> Optional[str]:
    return None if gen_s() ** 2 == neg_identity() else "s^2 != -I"


def _rel_st_cube(qs: Sequence[Fraction], ns: Sequence[int]) -> Optional[str]:
    return None if (gen_s() * gen_t()) ** 3 == neg_identity() else "(st)^3 != -I"


def _rel_dq_dr(qs: Sequence[Fraction], ns: Sequence[int]) -> Optional[str]:
    for q in qs:
        for r in qs:
            if gen_d(q) * gen_d(r) != gen_d(q * r):
                return f"q={q}, r={r}"
    return None


def _rel_s_dq(qs: Sequence[Fraction], ns: Sequence[int]) -> Optional[str]:
    for q in qs:
        if gen_s() * gen_d(q) != q * (gen_d(q).inverse() * gen_s()):
            return f"q={q}"
    return None


def _rel_dn_t(qs: Sequence[Fraction], ns: Sequence[int]) -> Optional[str]:
    for n in ns:
        if gen_d(n) * gen_t() != gen_t() ** n * gen_d(n):
            return f"n={n}"
    return None


def _rel_sts_inv(qs: Sequence[Fraction], ns: Sequence[int]) -> Optional[str]:
    lhs = gen_s() * gen_t() * gen_s().inverse()
    return None if lhs == gen_t_minus() else "s t s^-1 != t_-"


def _rel_dn_tminus(qs: Sequence[Fraction], ns: Sequence[int]) -> Optional[str]:
    for n in ns:
        if gen_d(n) * gen_t_minus() ** n != gen_t_minus() * gen_d(n):
            return f"n={n}"
    return None


STANDARD_RELATIONS: Tuple[Relation, ...] = (
    ("s^2 = -I", _rel_s_square),
    ("(st)^3 = -I", _rel_st_cube),
    ("d_q d_r = d_qr", _rel_dq_dr),
    ("s d_q = q d_q^-1 s", _rel_s_dq),
    ("d_n t = t^n d_n", _rel_dn_t),
    ("s t s^-1 = t_-", _rel_sts_inv),
    ("d_n t_-^n = t_- d_n", _rel_dn_tminus),
)

DEFAULT_Q_SAMPLES: Tuple[Fraction, ...] = (Fraction(1, 3), Fraction(2), Fraction(7, 5))
DEFAULT_N_SAMPLES: Tuple[int, ...] = (2, 3, 5)


def verify_presentation(
    qs: Sequence[RationalLike] = DEFAULT_Q_SAMPLES,
    ns: Sequence[int] = DEFAULT_N_SAMPLES,
    relations: Sequence[Relation] = STANDARD_RELATIONS,
) -> PresentationReport:
    """Evaluate every displayed generator relation exactly over the sample sets.

    An empty sample set makes the quantified relations vacuous; the report
    carries a `vacuous` warning flag in that case.
    """
    qs = tuple(Fraction(q) for q in qs)
    results = []
    for name, check in relations:
        witness = check(qs, tuple(ns))
        results.append(RelationResult(name, witness is None, witness))
    return PresentationReport(tuple(results), vacuous=(not qs and not ns))


# ---------------------------------------------------------------------------
# Literal formats ("a,b,c,d" matrices and "S T^3 D(2/5)" words)

_FRACTION_RE = r"-?\d+(?:/\d+)?"
_WORD_TOKEN_RE = re.compile(
    rf"^(?:(?P<plain>S|T|NEG)|D\((?P<param>{_FRACTION_RE})\))(?:\^(?P<exp>-?\d+))?$"
)


def parse_matrix(text: str) -> GroupElement:
    """Parse the row-major literal 'a,b,c,d' with integer or p/q entries."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"matrix literal needs 4 comma-separated entries, got {text!r}")
    try:
        vals = [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad matrix entry in {text!r}: {exc}") from exc
    return GroupElement(*vals)


def format_matrix(g: GroupElement) -> str:
    return ",".join(str(x) for x in g.entries())


def parse_word(text: str) -> Word:
    """Parse whitespace-separated letters 'S', 'T', 'NEG', 'D(p/q)' with optional '^k'."""
    letters = []
    for token in text.split():
        m = _WORD_TOKEN_RE.match(token)
        if not m:
            raise ValueError(f"bad word token {token!r}")
        exp = int(m.group("exp")) if m.group("exp") else 1
        if m.group("plain"):
            letters.append(Letter(m.group("plain"), exp))
        else:
            q = Fraction(m.group("param"))
            if q <= 0:
                raise ValueError(f"D parameter must be positive in {token!r}")
            letters.append(Letter("D", exp, q))
    return Word(letters)
