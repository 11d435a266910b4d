"""Words over the generators T and J, their integer-matrix action on Z^2 and
on Q u {inf}, and the Farey tree drawn in the lattice.

A rational p/q is the primitive lattice point (q, p).  T maps x to x + 1,
J maps x to x / (x + 1); both act on column vectors (q, p).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, NamedTuple, Optional

from .exact import (
    CFLike,
    ContinuedFraction,
    ProjectiveRational,
    RationalLike,
    as_cf,
    as_projective,
    cf_from_rational,
    rational_from_cf,
    to_word_form,
)


@dataclass(frozen=True)
class IntMatrix2:
    """[[a, b], [c, d]] acting on (q, p) as (a q + b p, c q + d p)."""

    a: int
    b: int
    c: int
    d: int

    def __matmul__(self, other: "IntMatrix2") -> "IntMatrix2":
        return IntMatrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __pow__(self, k: int) -> "IntMatrix2":
        if k < 0:
            raise ValueError("negative powers are outside the monoid")
        out, base = IDENTITY, self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def rows(self):
        return ((self.a, self.b), (self.c, self.d))


IDENTITY = IntMatrix2(1, 0, 0, 1)
T_MATRIX = IntMatrix2(1, 0, 1, 1)
J_MATRIX = IntMatrix2(1, 1, 0, 1)
S_MATRIX = IntMatrix2(0, 1, 1, 0)

GENERATORS = {"T": T_MATRIX, "J": J_MATRIX}


class LatticePoint(NamedTuple):
    q: int
    p: int

    @property
    def is_prime(self) -> bool:
        return gcd(self.q, self.p) == 1

    @property
    def slope(self) -> ProjectiveRational:
        return ProjectiveRational(self.p, self.q)

    def __add__(self, other):
        return LatticePoint(self.q + other[0], self.p + other[1])

    def __sub__(self, other):
        return LatticePoint(self.q - other[0], self.p - other[1])


ZERO_POINT = LatticePoint(1, 0)  # slope 0
INF_POINT = LatticePoint(0, 1)  # slope inf


def apply_point(m: IntMatrix2, pt) -> LatticePoint:
    q, p = pt
    return LatticePoint(m.a * q + m.b * p, m.c * q + m.d * p)


def mobius(m: IntMatrix2, x: RationalLike) -> ProjectiveRational:
    """Projective action induced by :func:`apply_point`: z -> (c + d z)/(a + b z).

    A pole gives infinity rather than an error.
    """
    x = as_projective(x)
    q, p = apply_point(m, x.point)
    if q == 0 and p == 0:
        raise ValueError(f"singular matrix {m} kills the point {x}")
    return ProjectiveRational(p, q)


@dataclass(frozen=True)
class GeneratorWord:
    """Run-length word in the free monoid on T and J.

    ``runs`` is a tuple of (letter, exponent) with positive exponents and
    alternating letters; the empty tuple is the identity.
    """

    runs: tuple[tuple[str, int], ...] = ()

    def __init__(self, runs: Iterable[tuple[str, int]] = ()):
        merged: list[list] = []
        for letter, exp in runs:
            if letter not in GENERATORS:
                raise ValueError(f"unknown generator {letter!r}")
            exp = int(exp)
            if exp < 0:
                raise ValueError("negative exponent")
            if exp == 0:
                continue
            if merged and merged[-1][0] == letter:
                merged[-1][1] += exp
            else:
                merged.append([letter, exp])
        object.__setattr__(self, "runs", tuple((l, e) for l, e in merged))

    @classmethod
    def _from_quotients(cls, qs) -> "GeneratorWord":
        """Word of a quotient sequence with no zeros past index 0."""
        obj = object.__new__(cls)
        runs = tuple(("J" if i & 1 else "T", a) for i, a in enumerate(qs) if a)
        object.__setattr__(obj, "runs", runs)
        return obj

    def __mul__(self, other: "GeneratorWord") -> "GeneratorWord":
        return GeneratorWord(self.runs + other.runs)

    def __len__(self):
        return len(self.runs)

    def __str__(self):
        if not self.runs:
            return "I"
        return " ".join(f"{l}^{e}" for l, e in self.runs)

    def __repr__(self):
        return f"GeneratorWord({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> "GeneratorWord":
        s = text.replace(" ", "")
        if s in ("", "I", "1"):
            return cls()
        if not re.fullmatch(r"([TJ](\^\d+)?)+", s):
            raise ValueError(f"malformed word: {text!r}")
        return cls((l, int(e) if e else 1) for l, e in re.findall(r"([TJ])(?:\^(\d+))?", s))

    @property
    def matrix(self) -> IntMatrix2:
        return word_to_matrix(self)

    def apply(self, pt=ZERO_POINT) -> LatticePoint:
        return apply_point(word_to_matrix(self), pt)

    @property
    def value(self) -> ProjectiveRational:
        """Slope of w(1, 0)."""
        return self.apply(ZERO_POINT).slope


def T(k: int = 1) -> GeneratorWord:
    return GeneratorWord([("T", k)])


def J(k: int = 1) -> GeneratorWord:
    return GeneratorWord([("J", k)])


def word_to_matrix(w: GeneratorWord) -> IntMatrix2:
    # T^k = [[1, 0], [k, 1]] and J^k = [[1, k], [0, 1]]
    a, b, c, d = 1, 0, 0, 1
    for letter, k in w.runs:
        if letter == "T":
            a, c = a + b * k, c + d * k
        else:
            b, d = b + a * k, d + c * k
    return IntMatrix2(a, b, c, d)


def word_from_cf(cf: CFLike) -> GeneratorWord:
    """T^a0 J^a1 ... J^a(2n-1) T^a2n for the word form of the value of ``cf``."""
    return GeneratorWord._from_quotients(to_word_form(cf).quotients)


def cf_from_word(w: GeneratorWord) -> ContinuedFraction:
    """Inverse of :func:`word_from_cf`: the word form of w(1, 0)."""
    m = word_to_matrix(w)
    q, p = m.a, m.c  # w(1, 0); coprime because det = 1
    qs = []
    while True:
        a, r = divmod(p, q)
        qs.append(a)
        if r == 0:
            break
        p, q = q, r
    if len(qs) % 2 == 0:
        qs[-1] -= 1
        qs.append(1)
    return ContinuedFraction._trusted(tuple(qs))


# ---------------------------------------------------------------------------
# branches and the Farey tree


@dataclass(frozen=True)
class Branch:
    """Image of a base ray under a word.

    ``ray == "inf"``: points word . T^k (1, 0), the image of L_inf.
    ``ray == "0"``:   points word . J^k (0, 1), the image of L_0.
    """

    word: GeneratorWord
    ray: str

    def point(self, k: int) -> LatticePoint:
        if self.ray == "inf":
            return (self.word * T(k)).apply(ZERO_POINT)
        return (self.word * J(k)).apply(INF_POINT)

    @property
    def origin(self) -> LatticePoint:
        return self.point(0)

    @property
    def direction(self) -> LatticePoint:
        step = INF_POINT if self.ray == "inf" else ZERO_POINT
        return self.word.apply(step)

    @property
    def slope(self) -> ProjectiveRational:
        return self.direction.slope


def _word(quotients) -> GeneratorWord:
    return GeneratorWord(("T" if i % 2 == 0 else "J", a) for i, a in enumerate(quotients))


def branches_through(x: RationalLike) -> tuple[tuple[Branch, int], tuple[Branch, int]]:
    """The two branches through the node of ``x``, each with the index k of
    the node on it: ((mother, k >= 1), (daughter, 0)).

    Node 1 = (1, 1) is the origin of T(L_inf) and sits on L_inf at k = 1.
    """
    x = as_projective(x)
    a = list(to_word_form(cf_from_rational(x)).quotients)
    if a == [0]:
        raise ValueError("0 is the root of the tree and has no mother branch")
    last = a[-1]
    head = _word(a[:-1])  # ends in J (or empty)
    along_inf = Branch(head * T(), "inf")
    k_inf = last - 1
    if last >= 2:
        along_zero = Branch(_word(a[:-1] + [last - 1]) * J(), "0")
        return (along_inf, k_inf), (along_zero, 0)
    if len(a) == 1:
        return (Branch(GeneratorWord(), "inf"), 1), (along_inf, 0)
    along_zero = Branch(_word(a[:-2]) * J(), "0")
    return (along_zero, a[-2]), (along_inf, 0)


def mother_branch(x: RationalLike) -> tuple[Branch, int]:
    return branches_through(x)[0]


def daughter_branch(x: RationalLike) -> Branch:
    return branches_through(x)[1][0]


def tree_parent(x: RationalLike) -> Optional[LatticePoint]:
    """Previous point on the mother branch; None for the root 0."""
    x = as_projective(x)
    if x == 0:
        return None
    branch, k = mother_branch(x)
    return branch.point(k - 1)


# --- independent lattice oracle ---------------------------------------------


def farey_neighbors(pt) -> tuple[LatticePoint, LatticePoint]:
    """The two points L, R >= 0 with L + R = pt, det(L, pt) = +1 and
    det(R, pt) = -1, by direct search over L."""
    q, p = pt
    found = {}
    for q1 in range(q + 1):
        for sign in (1, -1):
            num = p * q1 - sign
            if num % q == 0 and 0 <= num // q <= p:
                found.setdefault(sign, LatticePoint(q1, num // q))
    return found[1], found[-1]


def oracle_parent(pt) -> Optional[LatticePoint]:
    """Tree parent by lattice geometry: of the two Farey neighbours, the one
    created later (larger q + p).  (1, 1) hangs off (1, 0) on L_inf."""
    pt = LatticePoint(*pt)
    if pt == ZERO_POINT:
        return None
    if pt == LatticePoint(1, 1):
        return ZERO_POINT
    left, right = farey_neighbors(pt)
    return max((left, right), key=lambda v: (v.q + v.p, v.q))


class OracleBranches(NamedTuple):
    mother_origin: LatticePoint
    mother_direction: LatticePoint
    daughter_direction: LatticePoint


def branch_oracle(x: RationalLike) -> OracleBranches:
    """Mother/daughter geometry read off the lattice tree only: walk back
    along the straight line through the node and its parent."""
    pt = LatticePoint(*as_projective(x).point)
    parent = oracle_parent(pt)
    if parent is None:
        raise ValueError("root has no branches")
    d = pt - parent
    cur = pt
    while True:
        par = oracle_parent(cur)
        if par is None or cur - par != d:
            break
        cur = par
    return OracleBranches(cur, d, parent)


class BranchQuery(NamedTuple):
    """A branch quantity from its closed-form expression next to the lattice
    oracle.  ``formula_cf`` is None when the formula's indices do not exist
    (integer nodes, n = 0)."""

    formula_cf: Optional[ContinuedFraction]
    formula: Optional[ProjectiveRational]
    oracle: ProjectiveRational
    case: str

    @property
    def discrepancy(self) -> bool:
        return self.formula is not None and self.formula != self.oracle


def _checked_word_form(cf: CFLike) -> list[int]:
    a = list(to_word_form(cf).quotients)
    if a == [1]:
        raise ValueError("the node (1, 1) has no mother/daughter pair")
    if a == [0]:
        raise ValueError("the root 0 has no mother/daughter pair")
    return a


def _case(a) -> str:
    return "a2n>1" if a[-1] > 1 else "a2n=1"


def _pack(seq, oracle, case) -> BranchQuery:
    if seq is None:
        return BranchQuery(None, None, oracle, case)
    cf = ContinuedFraction(seq)
    return BranchQuery(cf, rational_from_cf(cf), oracle, case)


def mother_origin(cf: CFLike) -> BranchQuery:
    a = _checked_word_form(cf)
    n2 = len(a) - 1
    if n2 == 0:
        seq = None
    elif a[-1] > 1:
        seq = a[:n2] + [1]
    else:
        seq = a[: n2 - 2] + [a[n2 - 2] + 1]
    oracle = branch_oracle(rational_from_cf(a)).mother_origin.slope
    return _pack(seq, oracle, _case(a))


def mother_slope(cf: CFLike) -> BranchQuery:
    a = _checked_word_form(cf)
    n2 = len(a) - 1
    if n2 == 0:
        seq = None
    elif a[-1] > 1:
        seq = [0] + a[: n2 - 1] + [a[n2 - 1] - 1, 1]
    else:
        seq = [0] + a[: n2 - 1]
    oracle = branch_oracle(rational_from_cf(a)).mother_direction.slope
    return _pack(seq, oracle, _case(a))


def daughter_slope(cf: CFLike) -> BranchQuery:
    a = _checked_word_form(cf)
    n2 = len(a) - 1
    if a[-1] > 1:
        seq = a[:n2] + [a[n2] - 1]
    else:
        seq = a[:n2]
    oracle = branch_oracle(rational_from_cf(a)).daughter_direction.slope
    return _pack(seq, oracle, _case(a))


@dataclass
class FareyNode:
    point: LatticePoint
    cf: ContinuedFraction
    word: GeneratorWord
    parent: Optional[LatticePoint]

    @property
    def value(self) -> ProjectiveRational:
        return self.point.slope


@dataclass
class FareyTree:
    """Prime points (q, p) with q <= q_limit and 0 <= p/q <= max_value,
    linked along the images of L_0 and L_inf."""

    q_limit: int
    max_value: int
    nodes: dict[LatticePoint, FareyNode] = field(default_factory=dict)

    @property
    def edges(self) -> list[tuple[LatticePoint, LatticePoint]]:
        return [(n.parent, pt) for pt, n in self.nodes.items() if n.parent is not None]

    @property
    def roots(self) -> list[LatticePoint]:
        return [pt for pt, n in self.nodes.items() if n.parent is None]

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, x):
        pt = LatticePoint(*as_projective(x).point) if not isinstance(x, tuple) else LatticePoint(*x)
        return pt in self.nodes

    def __getitem__(self, x) -> FareyNode:
        return self.nodes[LatticePoint(*as_projective(x).point)]

    def to_json(self, extra=None) -> str:
        nodes = []
        for pt, n in self.nodes.items():
            item = {"value": str(n.value), "point": [pt.q, pt.p], "cf": str(n.cf), "word": str(n.word)}
            if extra:
                item.update(extra(n))
            nodes.append(item)
        edges = [[str(u.slope), str(v.slope)] for u, v in self.edges]
        return json.dumps({"q_limit": self.q_limit, "max_value": self.max_value,
                           "nodes": nodes, "edges": edges}, indent=1)

    def to_dot(self, extra_label=None) -> str:
        lines = ["digraph farey {"]
        for pt, n in self.nodes.items():
            label = f"{n.value} {to_word_form(n.cf)}"
            if extra_label:
                label += "\\n" + extra_label(n)
            lines.append(f'  "{pt.q},{pt.p}" [label="{label}"];')
        for u, v in self.edges:
            lines.append(f'  "{u.q},{u.p}" -> "{v.q},{v.p}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_farey_tree(q_limit: int, max_value: int = 2) -> FareyTree:
    if q_limit < 1:
        raise ValueError("q_limit must be >= 1")
    if max_value < 1:
        raise ValueError("max_value must be >= 1")
    tree = FareyTree(q_limit, max_value)
    for q in range(1, q_limit + 1):
        for p in range(0, max_value * q + 1):
            if gcd(p, q) != 1:
                continue
            x = ProjectiveRational(p, q)
            cf = cf_from_rational(x)
            tree.nodes[LatticePoint(q, p)] = FareyNode(LatticePoint(q, p), cf, word_from_cf(cf), tree_parent(x))
    return tree
