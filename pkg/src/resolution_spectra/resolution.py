"""The resolution map r_a: truncation of continued fractions at the first
partial quotient >= a, with its invariant set, locking zones, basins and
the structure classification.

Numbers are read through their minimal continued fraction [a0, ..., an]
(last quotient > 1).  A quotient ai >= a is replaced by infinity, so the
image is [a0, ..., a(i-1)], or infinity itself when i = 0.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from ._util import decimal_str, parallel_map
from .exact import (
    INF,
    CFLike,
    ContinuedFraction,
    ProjectiveRational,
    QuadraticIrrational,
    RationalLike,
    as_projective,
    cf_from_rational,
    parse_rational,
    rational_from_cf,
)
from .words import (
    INF_POINT,
    ZERO_POINT,
    FareyNode,
    FareyTree,
    GeneratorWord,
    build_farey_tree,
)

Number = Union[RationalLike, ContinuedFraction, QuadraticIrrational]


def check_a(a: int) -> int:
    a = int(a)
    if a < 2:
        raise ValueError(f"resolution bound a must be >= 2, got {a}")
    return a


def _value(x) -> ProjectiveRational:
    if isinstance(x, (list, tuple)):
        return rational_from_cf(x)
    return as_projective(x)


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class TruncatedWord:
    """A word prefix closed by a terminal symbol.

    ``terminal`` is "inf" (an offending T run), "0" (an offending J run) or
    None when nothing offended and the word is a fixed point.
    """

    prefix: GeneratorWord
    terminal: Optional[str]

    @property
    def value(self) -> ProjectiveRational:
        if self.terminal == "inf":
            return self.prefix.apply(INF_POINT).slope
        return self.prefix.apply(ZERO_POINT).slope

    def __str__(self):
        tail = {"inf": " . inf", "0": " . 0", None: ""}[self.terminal]
        return f"{self.prefix}{tail}"


def truncate_word(w: GeneratorWord, a: int) -> TruncatedWord:
    """Cut ``w`` before its first run with exponent >= a."""
    a = check_a(a)
    kept = []
    for letter, exp in w.runs:
        if exp >= a:
            return TruncatedWord(GeneratorWord(kept), "inf" if letter == "T" else "0")
        kept.append((letter, exp))
    return TruncatedWord(w, None)


# ---------------------------------------------------------------------------
# numbers


def r_a(x: Number, a: int) -> ProjectiveRational:
    """One step of the resolution map.  Surds are accepted too; their image
    is always rational (or infinite)."""
    a = check_a(a)
    if isinstance(x, QuadraticIrrational):
        return _surd_image(x, a)
    x = _value(x)
    if x.is_infinite:
        return INF
    qs = cf_from_rational(x).quotients
    for i, q in enumerate(qs):
        if q >= a:
            return INF if i == 0 else rational_from_cf(qs[:i])
    return x


def _surd_image(x: QuadraticIrrational, a: int) -> ProjectiveRational:
    qs = list(x.preperiod) + list(x.period)
    for i, q in enumerate(qs):
        if q >= a:
            return INF if i == 0 else rational_from_cf(qs[:i])
    return None  # type: ignore[return-value]  # in the invariant set


def orbit(x: Number, a: int, max_steps: int = 64) -> list[ProjectiveRational]:
    """Successive images r_a(x), r_a^2(x), ... up to the first fixed point
    (or ``max_steps`` images).  A fixed x yields [x]."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    out = []
    cur = x
    for _ in range(max_steps):
        nxt = r_a(cur, a)
        if nxt is None:  # surd that never offends
            break
        out.append(nxt)
        if nxt == cur or r_a(nxt, a) == nxt:
            break
        cur = nxt
    return out


def in_invariant_set(x: Number, a: int) -> bool:
    """Every quotient < a.  Continued fractions are checked as written,
    numbers through their minimal expansion, surds on preperiod and period."""
    a = check_a(a)
    if isinstance(x, QuadraticIrrational):
        qs = x.preperiod + x.period
    elif isinstance(x, ContinuedFraction):
        qs = x.quotients
    else:
        x = _value(x)
        if x.is_infinite:
            return False
        qs = cf_from_rational(x).quotients
    return all(q < a for q in qs)


# ---------------------------------------------------------------------------
# locking zones


def zone_bounds(x: RationalLike, a: int, clip: bool = True) -> tuple[Fraction, Fraction]:
    """(nu_minus, nu_plus) straight from the boundary formulas, without
    checking that x lies in the invariant set.

    For x = [a0, ..., an] the two ends are [a0, ..., an, a] and
    [a0, ..., an - 1, 1, a]; the first is the upper one when n is even.
    At x = 0 the lower end would be negative; ``clip`` pins it to 0.
    Unlike r_a itself the formulas make sense for a = 1, which the
    detector spectrum needs for its largest admissible denominators.
    """
    a = int(a)
    if a < 1:
        raise ValueError(f"appended quotient must be >= 1, got {a}")
    x = _value(x)
    if x.is_infinite:
        raise ValueError("infinity has no locking zone")
    qs = list(cf_from_rational(x).quotients)
    n = len(qs) - 1
    if n == 0:
        m = qs[0]
        upper = Fraction(m) + Fraction(1, a)
        lower = Fraction(m - 1) + Fraction(a, a + 1)
        if clip and m == 0:
            lower = Fraction(0)
        return lower, upper
    same = rational_from_cf(qs + [a]).fraction
    other = rational_from_cf(qs[:-1] + [qs[-1] - 1, 1, a]).fraction
    return (other, same) if n % 2 == 0 else (same, other)


def _require_invariant(x: ProjectiveRational, a: int):
    if not in_invariant_set(x, a):
        raise ValueError(f"{x} is not in the invariant set for a = {a}; its zone is undefined")


def nu_plus(x: RationalLike, a: int) -> ProjectiveRational:
    x = _value(x)
    _require_invariant(x, a)
    return as_projective(zone_bounds(x, a)[1])


def nu_minus(x: RationalLike, a: int) -> ProjectiveRational:
    x = _value(x)
    _require_invariant(x, a)
    return as_projective(zone_bounds(x, a)[0])


@dataclass(frozen=True)
class LockingZone:
    """Closed interval [nu_minus, nu_plus] of numbers sent to ``center`` by
    one application of r_a, with a = ``a_used``."""

    center: ProjectiveRational
    nu_minus: ProjectiveRational
    nu_plus: ProjectiveRational
    a_used: int

    def __post_init__(self):
        if not (self.nu_minus <= self.center < self.nu_plus):
            raise ValueError(f"malformed zone around {self.center}")
        if self.nu_minus == self.center and self.center != 0:
            raise ValueError(f"zone of {self.center} is degenerate on the left")

    def __contains__(self, x) -> bool:
        return self.nu_minus <= _value(x) <= self.nu_plus

    @property
    def widths(self) -> tuple[Fraction, Fraction]:
        """(center - nu_minus, nu_plus - center)."""
        c = self.center.fraction
        return c - self.nu_minus.fraction, self.nu_plus.fraction - c

    @property
    def length(self) -> Fraction:
        return self.nu_plus.fraction - self.nu_minus.fraction

    def as_dict(self) -> dict:
        return {"center": str(self.center), "nu_minus": str(self.nu_minus),
                "nu_plus": str(self.nu_plus), "a": self.a_used}


def zone(x: RationalLike, a: int) -> LockingZone:
    x = _value(x)
    _require_invariant(x, a)
    lo, hi = zone_bounds(x, a)
    return LockingZone(x, as_projective(lo), as_projective(hi), a)


def functional_check(x: RationalLike, a: int) -> bool:
    """Translation and inversion identities of the zone ends at x:
    nu(1 + x) = 1 + nu(x) for both ends, and nu_plus(1/x) = 1/nu_minus(x)."""
    x = _value(x).fraction
    lo, hi = zone_bounds(x, a, clip=False)
    lo1, hi1 = zone_bounds(x + 1, a, clip=False)
    ok = lo1 == lo + 1 and hi1 == hi + 1
    if x != 0:
        ilo, ihi = zone_bounds(1 / x, a, clip=False)
        ok = ok and ihi == 1 / lo and ilo == 1 / hi
    return ok


def single_step_preimage(center: RationalLike, a: int, grid: Sequence[ProjectiveRational]) -> list:
    """Grid points x with r_a(x) = center (a brute-force oracle)."""
    center = _value(center)
    return [x for x in grid if r_a(x, a) == center]


def rational_grid(lo: RationalLike, hi: RationalLike, max_den: int) -> list[ProjectiveRational]:
    """All reduced p/q in [lo, hi] with q <= max_den, ascending."""
    lo, hi = _value(lo).fraction, _value(hi).fraction
    seen = set()
    for q in range(1, max_den + 1):
        p0 = -((-lo.numerator * q) // lo.denominator)  # ceil(lo*q)
        p1 = (hi.numerator * q) // hi.denominator
        for p in range(p0, p1 + 1):
            seen.add(Fraction(p, q))
    return [as_projective(f) for f in sorted(seen)]


# ---------------------------------------------------------------------------
# approximation error


def mediant_grid(lo: RationalLike, hi: RationalLike, samples: int) -> list[ProjectiveRational]:
    """``samples`` rationals from lo to hi: start with the endpoints and keep
    inserting the mediant into the widest remaining gap."""
    lo, hi = _value(lo), _value(hi)
    if lo.is_infinite or hi.is_infinite or not lo < hi:
        raise ValueError("need finite lo < hi")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    points = {lo, hi}
    heap = [(-(hi.fraction - lo.fraction), lo.fraction, lo, hi)]
    while len(points) < samples:
        _, _, u, v = heapq.heappop(heap)
        m = ProjectiveRational(u.numerator + v.numerator, u.denominator + v.denominator)
        points.add(m)
        for s, t in ((u, m), (m, v)):
            heapq.heappush(heap, (-(t.fraction - s.fraction), s.fraction, s, t))
    return sorted(points)


def error_at(x: RationalLike, a: int) -> ProjectiveRational:
    """e_a(x) = |x - r_a(x)|; infinite when x resolves to infinity."""
    x = _value(x)
    img = r_a(x, a)
    if img.is_infinite:
        return INF
    return as_projective(abs(x.fraction - img.fraction))


def error_profile(lo: RationalLike, hi: RationalLike, a: int, samples: int,
                  threads: Optional[int] = None) -> list[tuple[ProjectiveRational, ProjectiveRational]]:
    a = check_a(a)
    grid = mediant_grid(lo, hi, samples)
    errs = parallel_map(lambda x: error_at(x, a), grid, threads)
    return list(zip(grid, errs))


def error_profile_csv(rows, digits: int = 12) -> str:
    lines = ["x_num,x_den,x_decimal,error_decimal"]
    for x, e in rows:
        lines.append(f"{x.numerator},{x.denominator},{decimal_str(x, digits)},{decimal_str(e, digits)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# basins


@dataclass(frozen=True)
class Basin:
    """Numbers whose r_a-orbit ends at ``center``; open interval between two
    quadratic irrationals whose tails repeat (a - 1, 1).  ``left_edge`` is
    None for the center 0, whose basin reaches down to 0 itself."""

    center: ProjectiveRational
    left_edge: Optional[QuadraticIrrational]
    right_edge: QuadraticIrrational
    a: int

    def __post_init__(self):
        if self.right_edge.compare(self.center) <= 0:
            raise ValueError("right edge must lie above the center")
        if self.left_edge is not None and self.left_edge.compare(self.center) >= 0:
            raise ValueError("left edge must lie below the center")

    def __contains__(self, x) -> bool:
        """Strictly between the edges (x = 0 counts for the center 0)."""
        x = _value(x)
        if self.right_edge.compare(x) <= 0:
            return False
        if self.left_edge is None:
            return x >= 0
        return self.left_edge.compare(x) < 0

    def as_dict(self) -> dict:
        return {"center": str(self.center),
                "left_edge": str(self.left_edge) if self.left_edge else None,
                "right_edge": str(self.right_edge), "a": self.a}


def basin(x: RationalLike, a: int) -> Basin:
    a = check_a(a)
    x = _value(x)
    _require_invariant(x, a)
    qs = list(cf_from_rational(x).quotients)
    tail = (a - 1, 1)
    same = QuadraticIrrational(qs, tail)
    if qs == [0]:
        return Basin(x, None, same, a)
    other = QuadraticIrrational(qs[:-1] + [qs[-1] - 1, 1], tail)
    n = len(qs) - 1
    left, right = (other, same) if n % 2 == 0 else (same, other)
    return Basin(x, left, right, a)


def t_map(x, a: int):
    """t_a(x) = 1 + x / (1 + x (a - 1)), whose fixed point is the right basin
    edge of 1."""
    return 1 + x / (1 + x * (a - 1))


# ---------------------------------------------------------------------------
# classification

TAGS = ("AttractiveRational", "TransientRational", "BlockingIrrational",
        "TransientIrrational", "MixedIrrational", "Fuzzy")


@dataclass(frozen=True)
class ZoneClass:
    tag: str
    certificate: dict
    depth_used: int

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag}")

    def as_dict(self) -> dict:
        return {"tag": self.tag, "certificate": self.certificate, "depth_used": self.depth_used}


def _is_alternating_tail(period: Sequence[int], a: int) -> bool:
    """The periodic sequence equals (a-1, 1, a-1, 1, ...) up to a shift."""
    n = len(period)
    m = n if n % 2 == 0 else 2 * n
    seq = [period[i % n] for i in range(m)]
    pattern = (a - 1, 1)
    return any(all(seq[(s + i) % m] == pattern[i % 2] for i in range(m)) for s in (0, 1))


def _has_cyclic_pair(period: Sequence[int], a: int) -> bool:
    n = len(period)
    return any(period[i] == a - 1 and period[(i + 1) % n] == 1 for i in range(n))


def classify(x: Number, a: int, depth: int = 64) -> ZoneClass:
    """Structure class of x under r_a.  Rationals are decided by their orbit,
    quadratic irrationals by their period."""
    a = check_a(a)
    if isinstance(x, QuadraticIrrational):
        need = len(x.preperiod) + len(x.period)
        if need > depth:
            return ZoneClass("Fuzzy", {"quotients_needed": need}, depth)
        if in_invariant_set(x, a):
            cert = {"preperiod": list(x.preperiod), "period": list(x.period), "pattern": [a - 1, 1]}
            if _is_alternating_tail(x.period, a):
                tag = "TransientIrrational"
            elif not _has_cyclic_pair(x.period, a):
                tag = "BlockingIrrational"
            else:
                tag = "MixedIrrational"
            return ZoneClass(tag, cert, need)
        img = r_a(x, a)
        inner = classify(img, a, depth) if not img.is_infinite else None
        tag = inner.tag if inner else "AttractiveRational"
        chain = [str(img)] + [str(y) for y in orbit(img, a) if y != img]
        return ZoneClass(tag, {"orbit": chain}, need)
    v = _value(x)
    if v.is_infinite:
        return ZoneClass("AttractiveRational", {"orbit": ["inf"]}, 0)
    need = len(cf_from_rational(v))
    if need > depth:
        return ZoneClass("Fuzzy", {"quotients_needed": need}, depth)
    path = orbit(v, a)
    tag = "AttractiveRational" if path == [v] else "TransientRational"
    return ZoneClass(tag, {"orbit": [str(v)] + [str(y) for y in path if y != v]}, need)


def replay(x: Number, a: int, cls: ZoneClass, depth: int = 64) -> bool:
    """Recompute the class and, for rationals, re-run the certified orbit."""
    if classify(x, a, depth) != cls:
        return False
    if "orbit" in cls.certificate and not isinstance(x, QuadraticIrrational):
        steps = [parse_rational(s) for s in cls.certificate["orbit"]]
        return all(r_a(u, a) == v for u, v in zip(steps, steps[1:]))
    return True


# ---------------------------------------------------------------------------
# resolution tree


@dataclass
class ResolutionTree:
    """Farey tree restricted to the invariant set of r_a, every node carrying
    its locking zone.  A node whose tree parent left the invariant set is
    re-attached to its nearest surviving ancestor."""

    a: int
    tree: FareyTree
    zones: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return self.tree.to_json(extra=lambda n: {
            "nu_minus": str(self.zones[n.point].nu_minus),
            "nu_plus": str(self.zones[n.point].nu_plus)})

    def to_dot(self) -> str:
        return self.tree.to_dot(extra_label=lambda n: "[{}, {}]".format(
            self.zones[n.point].nu_minus, self.zones[n.point].nu_plus))


def resolution_tree(a: int, q_limit: int, max_value: Optional[int] = None) -> ResolutionTree:
    a = check_a(a)
    full = build_farey_tree(q_limit, max_value or a)
    keep = {pt for pt, n in full.nodes.items() if in_invariant_set(n.value, a)}
    pruned = FareyTree(q_limit, full.max_value)
    zones = {}
    for pt, n in full.nodes.items():
        if pt not in keep:
            continue
        parent = n.parent
        while parent is not None and parent not in keep:
            parent = full.nodes[parent].parent
        pruned.nodes[pt] = FareyNode(pt, n.cf, n.word, parent)
        zones[pt] = zone(n.value, a)
    return ResolutionTree(a, pruned, zones)
