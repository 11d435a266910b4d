"""Exact arithmetic substrate: projective rationals, continued fractions,
convergents and quadratic surds.

Nothing in this module touches floating point except ``float()`` conversions
offered for display.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from math import gcd, isqrt
from typing import Iterable, NamedTuple, Sequence, Union


@total_ordering
class ProjectiveRational:
    """An irreducible fraction p/q, or the point at infinity stored as 1/0.

    Equality and ordering work against ``int`` and ``Fraction`` as well;
    infinity compares greater than every finite value.
    """

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: int, denominator: int = 1):
        numerator, denominator = int(numerator), int(denominator)
        if denominator == 0:
            if numerator == 0:
                raise ValueError("0/0 is not a projective rational")
            numerator = 1
        else:
            if denominator < 0:
                numerator, denominator = -numerator, -denominator
            g = gcd(numerator, denominator)
            numerator //= g
            denominator //= g
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)

    def __setattr__(self, name, value):
        raise AttributeError("ProjectiveRational is immutable")

    @classmethod
    def infinity(cls) -> "ProjectiveRational":
        return cls(1, 0)

    @classmethod
    def from_point(cls, q: int, p: int) -> "ProjectiveRational":
        """Slope p/q of the lattice point (q, p)."""
        return cls(p, q)

    @property
    def is_infinite(self) -> bool:
        return self.denominator == 0

    @property
    def fraction(self) -> Fraction:
        if self.is_infinite:
            raise ValueError("infinity has no finite value")
        return Fraction(self.numerator, self.denominator)

    @property
    def point(self) -> tuple[int, int]:
        """Primitive lattice point (q, p)."""
        return (self.denominator, self.numerator)

    def __float__(self) -> float:
        if self.is_infinite:
            return float("inf")
        return self.numerator / self.denominator

    def _key(self, other):
        if isinstance(other, ProjectiveRational):
            return other
        if isinstance(other, (int, Fraction)):
            return ProjectiveRational(Fraction(other).numerator, Fraction(other).denominator)
        return NotImplemented

    def __eq__(self, other):
        other = self._key(other)
        if other is NotImplemented:
            return NotImplemented
        return (self.numerator, self.denominator) == (other.numerator, other.denominator)

    def __lt__(self, other):
        other = self._key(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_infinite:
            return False
        if other.is_infinite:
            return True
        return self.numerator * other.denominator < other.numerator * self.denominator

    def __hash__(self):
        if self.is_infinite:
            return hash(float("inf"))
        return hash(Fraction(self.numerator, self.denominator))

    def __str__(self):
        if self.is_infinite:
            return "inf"
        return f"{self.numerator}/{self.denominator}"

    def __repr__(self):
        return f"ProjectiveRational({self})"


INF = ProjectiveRational.infinity()

RationalLike = Union[int, Fraction, str, ProjectiveRational]

_DECIMAL = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_RATIO_RE = re.compile(rf"^\s*({_DECIMAL})\s*(?:/\s*({_DECIMAL})\s*)?$")


def parse_rational(text: str) -> ProjectiveRational:
    """Parse ``"p/q"``, an exact decimal such as ``"1.00000007"``, a ratio of
    decimals (``"0.599975/1.00000007"``) or ``"inf"``.  No floats involved."""
    s = text.strip()
    if s.lower() in ("inf", "infinity", "∞"):
        return INF
    m = _RATIO_RE.match(s)
    if not m:
        raise ValueError(f"malformed rational: {text!r}")
    num = Fraction(m.group(1))
    den = Fraction(m.group(2)) if m.group(2) is not None else Fraction(1)
    if den == 0:
        if num == 0:
            raise ValueError(f"malformed rational: {text!r}")
        return INF
    value = num / den
    return ProjectiveRational(value.numerator, value.denominator)


def as_projective(x: RationalLike) -> ProjectiveRational:
    if isinstance(x, ProjectiveRational):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, (int, Fraction)):
        f = Fraction(x)
        return ProjectiveRational(f.numerator, f.denominator)
    if isinstance(x, ContinuedFraction):
        return rational_from_cf(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


@dataclass(frozen=True)
class ContinuedFraction:
    """Finite quotient sequence [a0, a1, ..., an] of non-negative integers.

    The sequence is stored as given; :func:`to_minimal_form` and
    :func:`to_word_form` produce the two canonical spellings.
    """

    quotients: tuple[int, ...]

    def __init__(self, quotients: Iterable[int]):
        qs = tuple(int(a) for a in quotients)
        if not qs:
            raise ValueError("continued fraction needs at least one quotient")
        if any(a < 0 for a in qs):
            raise ValueError(f"negative quotient in {list(qs)}")
        object.__setattr__(self, "quotients", qs)

    @classmethod
    def _trusted(cls, qs: tuple) -> "ContinuedFraction":
        """Skip validation for sequences built by this module."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "quotients", qs)
        return obj

    def __len__(self):
        return len(self.quotients)

    def __iter__(self):
        return iter(self.quotients)

    def __getitem__(self, i):
        return self.quotients[i]

    def __str__(self):
        return "[" + ",".join(map(str, self.quotients)) + "]"

    def __repr__(self):
        return f"ContinuedFraction({list(self.quotients)})"

    @property
    def value(self) -> ProjectiveRational:
        return rational_from_cf(self)

    @property
    def is_minimal(self) -> bool:
        qs = self.quotients
        if len(qs) == 1:
            return True
        return all(a >= 1 for a in qs[1:]) and qs[-1] >= 2

    @property
    def is_word_form(self) -> bool:
        qs = self.quotients
        if len(qs) % 2 == 0:
            return False
        if len(qs) == 1:
            return True
        return all(a >= 1 for a in qs[1:])

    @classmethod
    def parse(cls, text: str) -> "ContinuedFraction":
        s = text.strip()
        if s.startswith("[") and s.endswith("]"):
            s = s[1:-1]
        s = s.replace(";", ",")
        try:
            return cls(int(tok) for tok in s.split(",") if tok.strip())
        except ValueError as exc:
            raise ValueError(f"malformed continued fraction: {text!r}") from exc


CFLike = Union[ContinuedFraction, Sequence[int]]


def as_cf(cf: CFLike) -> ContinuedFraction:
    if isinstance(cf, ContinuedFraction):
        return cf
    if isinstance(cf, str):
        return ContinuedFraction.parse(cf)
    return ContinuedFraction(cf)


def cf_from_rational(x: RationalLike) -> ContinuedFraction:
    """Euclidean algorithm; returns the minimal form (last quotient > 1)."""
    x = as_projective(x)
    if x.is_infinite:
        raise ValueError("infinity has no continued fraction")
    p, q = x.numerator, x.denominator
    if p < 0:
        raise ValueError(f"negative value {x} is outside the positive cone")
    quotients = []
    while True:
        a, r = divmod(p, q)
        quotients.append(a)
        if r == 0:
            break
        p, q = q, r
    return ContinuedFraction._trusted(tuple(quotients))


def rational_from_cf(cf: CFLike) -> ProjectiveRational:
    """Nested evaluation; zero quotients are allowed anywhere."""
    cf = as_cf(cf)
    # (num, den) of the tail, evaluated from the right, projectively
    num, den = 1, 0
    for a in reversed(cf.quotients):
        num, den = a * num + den, num
    return ProjectiveRational(num, den)


class Convergent(NamedTuple):
    index: int
    p: int
    q: int


@dataclass(frozen=True)
class ConvergentTable:
    rows: tuple[Convergent, ...]

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    @property
    def last(self) -> Convergent:
        return self.rows[-1]


def convergents(cf: CFLike) -> ConvergentTable:
    cf = as_cf(cf)
    if any(a < 1 for a in cf.quotients[1:]):
        raise ValueError(f"convergents need quotients >= 1 after a0: {cf}")
    p2, p1 = 0, 1
    q2, q1 = 1, 0
    rows = []
    for i, a in enumerate(cf.quotients):
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        rows.append(Convergent(i, p1, q1))
    return ConvergentTable(tuple(rows))


def to_minimal_form(cf: CFLike) -> ContinuedFraction:
    cf = as_cf(cf)
    qs = cf.quotients
    if len(qs) == 1 or (all(a >= 1 for a in qs[1:]) and qs[-1] >= 2):
        return cf
    if len(qs) > 2 and qs[-1] == 1 and all(a >= 1 for a in qs[1:-1]):
        return ContinuedFraction._trusted(qs[:-2] + (qs[-2] + 1,))
    if len(qs) == 2 and qs == (0, 1):
        return ContinuedFraction._trusted((1,))
    if len(qs) == 2 and qs[1] == 1:
        return ContinuedFraction._trusted((qs[0] + 1,))
    return cf_from_rational(rational_from_cf(cf))


def to_word_form(cf: CFLike) -> ContinuedFraction:
    """Odd-length spelling [a0, ..., a2n]; [.., an] becomes [.., an - 1, 1]
    when the minimal form has an even number of quotients."""
    qs = to_minimal_form(cf).quotients
    if len(qs) % 2 == 0:
        qs = qs[:-1] + (qs[-1] - 1, 1)
    return ContinuedFraction._trusted(qs)


def cf_of_decimal(s: str, depth: int) -> ContinuedFraction:
    """Exact continued fraction of a decimal string (or ratio of decimals),
    truncated to ``depth`` quotients."""
    if depth < 1:
        raise ValueError("depth must be positive")
    x = parse_rational(s)
    return ContinuedFraction(cf_from_rational(x).quotients[:depth])


# ---------------------------------------------------------------------------
# quadratic irrationals


def _is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def _mat_mul(m, n):
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def _cf_matrix(quotients):
    # x = [q0, ..., qk, y] = (A y + B) / (C y + D)
    m = ((1, 0), (0, 1))
    for a in quotients:
        m = _mat_mul(m, ((a, 1), (1, 0)))
    return m


def normalize_surd(P: int, D: int, Q: int) -> tuple[int, int, int]:
    """Rescale (P + sqrt(D))/Q so that Q divides D - P^2, then strip common
    factors while keeping that property."""
    if Q == 0:
        raise ValueError("zero denominator in surd")
    if D <= 0 or _is_square(D):
        raise ValueError(f"D = {D} must be a positive non-square")
    if (D - P * P) % Q != 0:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    g = gcd(P, Q)
    for d in sorted(_divisors(g), reverse=True):
        if d == 1:
            break
        if D % (d * d) == 0:
            P2, D2, Q2 = P // d, D // (d * d), Q // d
            if (D2 - P2 * P2) % Q2 == 0:
                return P2, D2, Q2
    return P, D, Q


def _divisors(n: int) -> list[int]:
    n = abs(n)
    if n == 0:
        return [1]
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return out


def surd_floor(P: int, D: int, Q: int) -> int:
    """floor((P + sqrt(D)) / Q) for non-square D, in integers only."""
    r = isqrt(D)
    if Q > 0:
        return (P + r) // Q
    return -((P + r) // -Q) - 1


def surd_sign_vs(P: int, D: int, Q: int, x: RationalLike) -> int:
    """Sign of (P + sqrt(D))/Q - x, exactly."""
    x = as_projective(x)
    if x.is_infinite:
        return -1
    m, n = x.numerator, x.denominator
    A = n * P - m * Q
    # sign of A + n*sqrt(D), n > 0
    if A >= 0:
        s = 1
    else:
        s = 1 if n * n * D > A * A else -1
    return s if Q > 0 else -s


def surd_expand(P: int, D: int, Q: int, depth: int) -> list[int]:
    """First ``depth`` continued-fraction quotients of (P + sqrt(D))/Q."""
    if _is_square(D):
        raise ValueError(f"D = {D} is a perfect square; value is rational")
    P, D, Q = normalize_surd(P, D, Q)
    if surd_sign_vs(P, D, Q, 0) < 0:
        raise ValueError("negative surd is outside the positive cone")
    out = []
    for _ in range(depth):
        a = surd_floor(P, D, Q)
        out.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    return out


@dataclass(frozen=True)
class QuadraticIrrational:
    """Eventually periodic continued fraction [pre; (period)] with its exact
    surd value (P + sqrt(D))/Q."""

    preperiod: tuple[int, ...]
    period: tuple[int, ...]
    surd: tuple[int, int, int] = field(init=False, compare=False, repr=False)

    def __init__(self, preperiod: Iterable[int], period: Iterable[int]):
        pre = [int(a) for a in preperiod]
        per = [int(a) for a in period]
        if not per:
            raise ValueError("period must be non-empty")
        if any(a < 1 for a in per) or any(a < 1 for a in pre[1:]) or any(a < 0 for a in pre):
            raise ValueError("quotients must be >= 1 (a0 >= 0)")
        object.__setattr__(self, "preperiod", tuple(pre))
        object.__setattr__(self, "period", tuple(per))
        object.__setattr__(self, "surd", surd_value(self))

    def canonical(self) -> "QuadraticIrrational":
        """Same number with primitive period and shortest preperiod."""
        pre, per = list(self.preperiod), list(self.period)
        n = len(per)
        for k in range(1, n + 1):
            if n % k == 0 and per == per[:k] * (n // k):
                per = per[:k]
                break
        while pre and pre[-1] == per[-1]:
            pre.pop()
            per = [per[-1]] + per[:-1]
        return QuadraticIrrational(pre, per)

    def quotients(self, depth: int) -> list[int]:
        out = list(self.preperiod)
        i = 0
        while len(out) < depth:
            out.append(self.period[i % len(self.period)])
            i += 1
        return out[:depth]

    def __float__(self):
        P, D, Q = self.surd
        scale = 10**30
        return (P * scale + isqrt(D * scale * scale)) / (Q * scale)

    def compare(self, x: RationalLike) -> int:
        return surd_sign_vs(*self.surd, x)

    def __str__(self):
        P, D, Q = self.surd
        per = "(" + ",".join(map(str, self.period)) + ")"
        if self.preperiod:
            head = "[" + ",".join(map(str, self.preperiod)) + ";" + per + "]"
        else:
            head = "[" + per + "]"
        return f"{head} = ({P}+sqrt({D}))/{Q}"

    @classmethod
    def parse(cls, text: str) -> "QuadraticIrrational":
        m = re.match(r"^\s*\[\s*([\d,\s]*?)\s*;?\s*\(([\d,\s]+)\)\s*\]", text)
        if not m:
            raise ValueError(f"malformed quadratic irrational: {text!r}")
        pre = [int(t) for t in m.group(1).split(",") if t.strip()]
        per = [int(t) for t in m.group(2).split(",") if t.strip()]
        return cls(pre, per)


def surd_value(qi: QuadraticIrrational) -> tuple[int, int, int]:
    """Solve the fixed-point quadratic of the period's Mobius matrix and
    transport the root through the preperiod.  Returns normalized (P, D, Q)."""
    (a, b), (c, d) = _cf_matrix(qi.period)
    # y = (a y + b) / (c y + d)  =>  c y^2 + (d - a) y - b = 0, take y > 0
    disc = (d - a) ** 2 + 4 * b * c
    if c == 0 or _is_square(disc):
        raise ValueError(f"period {qi.period} has a rational fixed point")
    # y = (u + sqrt(disc)) / w
    u, w = a - d, 2 * c
    (A, B), (C, E) = _cf_matrix(qi.preperiod)
    # x = (A y + B) / (C y + E) with y = (u + s)/w, s = sqrt(disc)
    n0, n1 = A * u + B * w, A
    d0, d1 = C * u + E * w, C
    # multiply by conjugate of the denominator
    den = d0 * d0 - d1 * d1 * disc
    r0 = n0 * d0 - n1 * d1 * disc
    r1 = n1 * d0 - n0 * d1
    if r1 == 0:
        raise ValueError("degenerate surd")
    if r1 < 0:
        r0, r1, den = -r0, -r1, -den
    # (r0 + r1 sqrt(disc)) / den = (r0 + sqrt(r1^2 disc)) / den
    return normalize_surd(r0, r1 * r1 * disc, den)
