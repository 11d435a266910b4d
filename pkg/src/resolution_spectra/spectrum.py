"""Detector-facing layer: the locking spectrum predicted from f1 and fc,
stability exponents, the Brjuno sum and beat-frequency scans.

Every threshold derives from the single exact ratio N = f1 / fc:
q_max = floor(N) and a_max(q) = floor(N / q).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from ._util import exact_str, parallel_map
from .exact import (
    ContinuedFraction,
    ProjectiveRational,
    QuadraticIrrational,
    RationalLike,
    as_projective,
    cf_from_rational,
    convergents,
    parse_rational,
    rational_from_cf,
)
from .resolution import LockingZone, zone_bounds


class EmptyZone(ValueError):
    """No locking zone exists: the denominator exceeds floor(f1 / fc)."""


def _frac(x) -> Fraction:
    if isinstance(x, str):
        x = parse_rational(x)
    if isinstance(x, ProjectiveRational):
        if x.is_infinite:
            raise ValueError("frequency must be finite")
        return x.fraction
    return Fraction(x)


@dataclass(frozen=True)
class DetectorConfig:
    """Reference frequency f1 and low-pass cutoff fc (exact, in Hz), with an
    optional bound n_max on usable continued-fraction depth."""

    f1: Fraction
    fc: Fraction
    n_max: Optional[int] = None

    def __init__(self, f1, fc, n_max: Optional[int] = None):
        f1, fc = _frac(f1), _frac(fc)
        if not 0 < fc < f1:
            raise ValueError("need 0 < fc < f1")
        if n_max is not None and n_max < 0:
            raise ValueError("n_max must be >= 0")
        object.__setattr__(self, "f1", f1)
        object.__setattr__(self, "fc", fc)
        object.__setattr__(self, "n_max", n_max)

    @property
    def ratio(self) -> Fraction:
        """N = f1 / fc."""
        return self.f1 / self.fc

    @property
    def kappa(self) -> Fraction:
        """Normalized cutoff fc / f1."""
        return self.fc / self.f1


def q_max(cfg: DetectorConfig) -> int:
    return math.floor(cfg.ratio)


def a_max(cfg: DetectorConfig, q: int) -> int:
    if q <= 0:
        raise ValueError("denominator must be positive")
    return math.floor(cfg.ratio / q)


def _expansions(x) -> list[list[int]]:
    """The quotient lists to test for x: a literal sequence as given, or both
    finite expansions of a rational."""
    if isinstance(x, ContinuedFraction):
        return [list(x.quotients)]
    if isinstance(x, (list, tuple)):
        return [list(x)]
    qs = list(cf_from_rational(as_projective(x)).quotients)
    alt = qs[:-1] + [qs[-1] - 1, 1]
    return [qs, alt] if alt[-2] >= 0 else [qs]


def admissible(x, pq: RationalLike, cfg: DetectorConfig) -> bool:
    """Whether x falls in the locking set of p/q.

    x qualifies when it is p/q itself, or when one of its expansions starts
    with [a0, ..., an] or [a0, ..., an - 1, 1] and the quotient right after
    that prefix is at least a_max(q).  This is exactly membership in the
    closed zone [nu_minus, nu_plus].
    """
    pq = as_projective(pq)
    a = a_max(cfg, pq.denominator)
    target = list(cf_from_rational(pq).quotients)
    prefixes = [target]
    if target[-1] >= 1 and not (len(target) == 1 and target[0] == 0):
        prefixes.append(target[:-1] + [target[-1] - 1, 1])
    for qs in _expansions(x):
        for pre in prefixes:
            if qs == pre:
                return True
            if len(qs) > len(pre) and qs[: len(pre)] == pre and qs[len(pre)] >= a:
                return True
    return False


@dataclass(frozen=True)
class SpectrumZone:
    zone: LockingZone
    a_max: int

    @property
    def center(self) -> ProjectiveRational:
        return self.zone.center

    def as_dict(self) -> dict:
        z = self.zone
        return {"center": str(z.center), "nu_minus": str(z.nu_minus),
                "nu_plus": str(z.nu_plus), "a_max": self.a_max}


def spectrum_zone(pq: RationalLike, cfg: DetectorConfig) -> SpectrumZone:
    """Zone of p/q for the detector: the boundary formulas with a = a_max(q)."""
    pq = as_projective(pq)
    if pq.is_infinite or pq < 0:
        raise ValueError("center must be a finite non-negative rational")
    q = pq.denominator
    if q > q_max(cfg):
        raise EmptyZone(f"q = {q} exceeds floor(f1/fc) = {q_max(cfg)}")
    a = a_max(cfg, q)
    lo, hi = zone_bounds(pq, a)
    return SpectrumZone(LockingZone(pq, as_projective(lo), as_projective(hi), a), a)


def representable(pq: RationalLike, cfg: DetectorConfig) -> bool:
    """Partial quotients after a0 all stay below a_max(q)."""
    pq = as_projective(pq)
    q = pq.denominator
    if q > q_max(cfg):
        return False
    a = a_max(cfg, q)
    return all(x < a for x in cf_from_rational(pq).quotients[1:])


def stern_brocot_between(lo: RationalLike, hi: RationalLike, max_den: int) -> list[ProjectiveRational]:
    """Reduced p/q in [lo, hi] with q <= max_den, found by walking the
    Stern-Brocot tree and pruning subtrees outside the window."""
    lo, hi = as_projective(lo).fraction, as_projective(hi).fraction
    out = []
    if lo <= 0 <= hi:
        out.append(Fraction(0))
    stack = [((0, 1), (1, 0))]
    while stack:
        (lp, lq), (rp, rq) = stack.pop()
        mp, mq = lp + rp, lq + rq
        if mq > max_den:
            continue
        m = Fraction(mp, mq)
        if lo <= m <= hi:
            out.append(m)
        left = Fraction(lp, lq)
        if left < hi and m > lo:
            stack.append(((lp, lq), (mp, mq)))
        if m < hi and (rq == 0 or Fraction(rp, rq) > lo):
            stack.append(((mp, mq), (rp, rq)))
    return [as_projective(f) for f in sorted(out)]


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Smallest-denominator rational strictly inside (lo, hi), via the
    Stern-Brocot descent."""
    lp, lq, rp, rq = 0, 1, 1, 0
    while True:
        mp, mq = lp + rp, lq + rq
        m = Fraction(mp, mq)
        if m <= lo:
            lp, lq = mp, mq
        elif m >= hi:
            rp, rq = mp, mq
        else:
            return m


class Gap(NamedTuple):
    lo: ProjectiveRational
    hi: ProjectiveRational
    fuzzy: bool


@dataclass
class Spectrum:
    cfg: DetectorConfig
    nu_lo: ProjectiveRational
    nu_hi: ProjectiveRational
    zones: list[SpectrumZone] = field(default_factory=list)
    gaps: list[Gap] = field(default_factory=list)

    @property
    def centers(self) -> list[ProjectiveRational]:
        return [z.center for z in self.zones]

    def zone_of(self, x: RationalLike) -> Optional[SpectrumZone]:
        x = as_projective(x)
        for z in self.zones:
            if x in z.zone:
                return z
        return None

    def measure(self) -> Fraction:
        """Total length of the zones inside [nu_lo, nu_hi]."""
        lo, hi = self.nu_lo.fraction, self.nu_hi.fraction
        total = Fraction(0)
        for z in self.zones:
            a = max(lo, z.zone.nu_minus.fraction)
            b = min(hi, z.zone.nu_plus.fraction)
            total += max(Fraction(0), b - a)
        return total

    def to_json(self) -> str:
        return json.dumps({
            "f1": exact_str(self.cfg.f1),
            "fc": exact_str(self.cfg.fc),
            "zones": [z.as_dict() for z in self.zones],
            "fuzzy": [{"lo": str(g.lo), "hi": str(g.hi)} for g in self.gaps if g.fuzzy],
        }, indent=1)


def build_spectrum(cfg: DetectorConfig, nu_lo: RationalLike, nu_hi: RationalLike,
                   threads: Optional[int] = None) -> Spectrum:
    """Every representable center in [nu_lo, nu_hi] with its zone, plus the
    gaps between zones.  With n_max set, centers deeper than n_max are left
    out and a gap is fuzzy when its simplest rational is deeper than n_max;
    without n_max every gap is fuzzy."""
    lo, hi = as_projective(nu_lo), as_projective(nu_hi)
    if not (0 <= lo < hi) or hi.is_infinite:
        raise ValueError("need 0 <= nu_lo < nu_hi < inf")
    cands = [c for c in stern_brocot_between(lo, hi, q_max(cfg)) if representable(c, cfg)]
    if cfg.n_max is not None:
        cands = [c for c in cands if len(cf_from_rational(c)) - 1 <= cfg.n_max]
    zones = parallel_map(lambda c: spectrum_zone(c, cfg), cands, threads)
    gaps = []
    edge = lo.fraction
    for z in zones + [None]:
        stop = hi.fraction if z is None else z.zone.nu_minus.fraction
        if stop > edge:
            if cfg.n_max is None:
                fuzzy = True
            else:
                depth = len(cf_from_rational(simplest_between(edge, stop))) - 1
                fuzzy = depth > cfg.n_max
            gaps.append(Gap(as_projective(edge), as_projective(stop), fuzzy))
        if z is not None:
            edge = max(edge, z.zone.nu_plus.fraction)
            if edge >= hi.fraction:
                break
    return Spectrum(cfg, lo, hi, zones, gaps)


# ---------------------------------------------------------------------------
# stability exponents and the Brjuno sum

Expandable = Union[ContinuedFraction, QuadraticIrrational, RationalLike, Sequence[int]]


def _quotients(x: Expandable, depth: int) -> list[int]:
    if isinstance(x, QuadraticIrrational):
        return x.quotients(depth)
    if isinstance(x, ContinuedFraction):
        return list(x.quotients)[:depth]
    if isinstance(x, (list, tuple)):
        return list(x)[:depth]
    return list(cf_from_rational(as_projective(x)).quotients)[:depth]


def _denominators(x: Expandable, depth: int) -> list[int]:
    return [row.q for row in convergents(_quotients(x, depth)).rows]


class StabilityRow(NamedTuple):
    i: int
    q: int
    q_next: int
    tau: int
    gamma: Fraction


@dataclass
class StabilityProfile:
    rows: list[StabilityRow]
    brjuno_partial: float

    def to_csv(self) -> str:
        lines = ["i,q_i,q_next,tau,gamma"]
        for r in self.rows:
            lines.append(f"{r.i},{r.q},{r.q_next},{r.tau},{r.gamma}")
        return "\n".join(lines) + "\n"


def tau_gamma(q: int, q_next: int) -> tuple[int, Fraction]:
    """The unique (tau, gamma) with q_next = gamma q^tau and 1 <= gamma < q."""
    if q < 2 or q_next < q:
        raise ValueError("need 2 <= q <= q_next")
    tau, power = 1, q
    while power * q <= q_next:
        power *= q
        tau += 1
    gamma = Fraction(q_next, power)
    assert 1 <= gamma < q, (q, q_next, tau, gamma)
    return tau, gamma


def stability_profile(x: Expandable, depth: int) -> StabilityProfile:
    if depth < 2:
        raise ValueError("depth must be >= 2")
    qs = _denominators(x, depth)
    rows = []
    for i in range(len(qs) - 1):
        if qs[i] < 2:
            continue
        tau, gamma = tau_gamma(qs[i], qs[i + 1])
        rows.append(StabilityRow(i, qs[i], qs[i + 1], tau, gamma))
    return StabilityProfile(rows, brjuno(x, depth).value)


class BrjunoResult(NamedTuple):
    value: float
    converged: bool
    terms: list[float]


def brjuno(x: Expandable, depth: int, tol: float = 1e-9) -> BrjunoResult:
    """Partial sum of log(q_{i+1}) / q_i over the first ``depth`` quotients.

    A finite expansion gives a finite sum and counts as converged; for a
    quadratic irrational the flag is set once the last term drops below tol.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    qs = _denominators(x, depth)
    terms = [math.log(qs[i + 1]) / qs[i] for i in range(len(qs) - 1)]
    total = math.fsum(terms)
    if isinstance(x, QuadraticIrrational):
        converged = bool(terms) and terms[-1] < tol
    else:
        converged = len(_quotients(x, depth + 1)) <= depth
    return BrjunoResult(total, converged, terms)


# ---------------------------------------------------------------------------
# beat frequencies


def beat_frequency(pq: RationalLike, f0, f1) -> Fraction:
    """|p f0 - q f1| in Hz, exactly."""
    pq = as_projective(pq)
    return abs(pq.numerator * _frac(f0) - pq.denominator * _frac(f1))


class JumpRow(NamedTuple):
    a: int
    p: int
    q: int
    f_hz: Fraction


def jump_scan(prefix, a_values: Iterable[int], f0, f1, threads: Optional[int] = None) -> list[JumpRow]:
    """Beat frequency of [prefix..., a] for each a, sorted by a."""
    prefix = list(prefix.quotients if isinstance(prefix, ContinuedFraction) else prefix)
    if not prefix:
        raise ValueError("prefix must be non-empty")
    f0, f1 = _frac(f0), _frac(f1)

    def row(a):
        x = rational_from_cf(prefix + [a])
        return JumpRow(a, x.numerator, x.denominator, beat_frequency(x, f0, f1))

    return parallel_map(row, sorted(set(a_values)), threads)


def jump_csv(rows: Sequence[JumpRow]) -> str:
    lines = ["a,p,q,f_hz"]
    for r in rows:
        lines.append(f"{r.a},{r.p},{r.q},{exact_str(r.f_hz)}")
    return "\n".join(lines) + "\n"


class JumpMatch(NamedTuple):
    a_values: tuple[int, ...]
    frequencies: tuple[Fraction, ...]
    minimum: JumpRow
    reference_a: tuple[int, ...]

    @property
    def offset(self) -> int:
        """Shift between the located indices and the reference ones."""
        return self.a_values[0] - self.reference_a[0]


REFERENCE_JUMPS = (135, 261, 386)
REFERENCE_INDICES = (1593, 1594, 1595)


def match_jumps(rows: Sequence[JumpRow], targets: Sequence[int] = REFERENCE_JUMPS,
                tol: Fraction = Fraction(1), reference_a: Sequence[int] = REFERENCE_INDICES) -> Optional[JumpMatch]:
    """First run of consecutive a whose beats sit within tol of ``targets``,
    together with the scan minimum.  None when no run matches."""
    rows = sorted(rows)
    k = len(targets)
    low = min(rows, key=lambda r: r.f_hz)
    for s in range(len(rows) - k + 1):
        run = rows[s: s + k]
        if any(run[j + 1].a != run[j].a + 1 for j in range(k - 1)):
            continue
        if all(abs(r.f_hz - t) <= tol for r, t in zip(run, targets)):
            return JumpMatch(tuple(r.a for r in run), tuple(r.f_hz for r in run), low, tuple(reference_a))
    return None
