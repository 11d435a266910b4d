"""Cross-module oracle checks, small enough to run from the command line.

Hard checks count as failures.  Tracked items are known disagreements
between a closed-form formula and its oracle; they are counted and
reported but do not fail the run.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from math import gcd
from typing import Optional

from . import exact, mixsim, resolution, spectrum, words


def _round_trip() -> tuple[bool, str]:
    bad = 0
    for q in range(1, 61):
        for p in range(0, 5 * q + 1):
            if gcd(p, q) == 1:
                x = exact.ProjectiveRational(p, q)
                bad += exact.rational_from_cf(exact.cf_from_rational(x)) != x
    return bad == 0, f"{bad} mismatches"


def _word_bijection() -> tuple[bool, str]:
    bad = 0
    for q in range(1, 40):
        for p in range(0, 3 * q + 1):
            if gcd(p, q) == 1:
                cf = exact.cf_from_rational(exact.ProjectiveRational(p, q))
                w = words.word_from_cf(cf)
                bad += exact.to_minimal_form(words.cf_from_word(w)) != cf
                bad += w.matrix.det != 1
    return bad == 0, f"{bad} mismatches"


def _zone_oracle(a: int = 3) -> tuple[bool, str]:
    grid = resolution.rational_grid(0, 2, 60)
    images = defaultdict(set)
    for x in grid:
        images[resolution.r_a(x, a)].add(x)
    bad = 0
    for c in resolution.rational_grid(0, 2, 10):
        if resolution.in_invariant_set(c, a):
            z = resolution.zone(c, a)
            bad += {x for x in grid if x in z} != images[c]
    return bad == 0, f"{bad} centers with a mismatched preimage"


def _functional() -> tuple[bool, str]:
    bad = 0
    for a in (3, 4, 5):
        for x in resolution.rational_grid(0, 3, 20):
            if resolution.in_invariant_set(x, a):
                bad += not resolution.functional_check(x, a)
    return bad == 0, f"{bad} failures"


def _basin_edge() -> tuple[bool, str]:
    b = resolution.basin(1, 3)
    P, D, Q = b.right_edge.surd
    ok = (P, D, Q) == (1, 3, 2)
    ok = ok and exact.surd_expand(P, D, Q, 7) == [1, 2, 1, 2, 1, 2, 1]
    return ok, str(b.right_edge)


def _gate() -> tuple[bool, str]:
    bad = 0
    for n in (3, 10):
        cfg = spectrum.DetectorConfig(n, 1)
        for q in range(1, 2 * n + 1):
            try:
                spectrum.spectrum_zone(Fraction(1, q), cfg)
                ok = True
            except spectrum.EmptyZone:
                ok = False
            bad += ok != (q <= n)
    return bad == 0, f"{bad} wrong gates"


def _stability() -> tuple[bool, str]:
    rows = spectrum.stability_profile(exact.QuadraticIrrational([], [1]), 30).rows
    ok = all(r.tau == 1 and 1 <= r.gamma < r.q for r in rows)
    return ok, f"{len(rows)} rows"


def _jumps() -> tuple[bool, str]:
    rows = spectrum.jump_scan([0, 1, 1, 2], range(1585, 1610), "1000000.07", "599975")
    m = spectrum.match_jumps(rows)
    if m is None:
        return False, "no run of three consecutive a matched"
    return True, f"a = {list(m.a_values)} (reference {list(m.reference_a)}, offset {m.offset})"


def _simulator(threads: Optional[int]) -> tuple[bool, str]:
    res = mixsim.sweep(5, 15, 51, 10, 1, mixsim.MixerModel("intermodulating", 5, 0.3), 100.0, threads=threads)
    good, total = res.agreement(0.02)
    return total > 0 and good >= 0.9 * total, f"{good}/{total} in-zone points agree"


def _branch_counts() -> dict:
    tree = words.build_farey_tree(20)
    counts = {}
    for f in (words.mother_origin, words.mother_slope, words.daughter_slope):
        flagged = {"a2n>1": 0, "a2n=1": 0}
        for pt, node in tree.nodes.items():
            if pt in ((1, 0), (1, 1)):
                continue
            r = f(node.cf)
            flagged[r.case] += r.discrepancy
        counts[f.__name__] = flagged
    return counts


def _asymmetry() -> int:
    n = 0
    for a in (3, 4, 5):
        for c in resolution.rational_grid(0, 3, 40):
            if resolution.in_invariant_set(c, a):
                lo, hi = resolution.zone(c, a).widths
                n += lo == hi
    return n


def run_selftest(threads: Optional[int] = None) -> dict:
    checks = {
        "cf_round_trip": _round_trip(),
        "word_bijection": _word_bijection(),
        "zone_oracle": _zone_oracle(),
        "functional_equations": _functional(),
        "basin_edge": _basin_edge(),
        "denominator_gate": _gate(),
        "stability_rows": _stability(),
        "jump_frequencies": _jumps(),
        "simulator": _simulator(threads),
    }
    branch = _branch_counts()
    hard_branch = branch["mother_origin"]["a2n>1"] + branch["daughter_slope"]["a2n>1"]
    checks["branch_formulas_origin_daughter"] = (hard_branch == 0, f"{hard_branch} discrepancies")
    failures = [k for k, (ok, _) in checks.items() if not ok]
    return {
        "checks": {k: {"passed": ok, "detail": d} for k, (ok, d) in checks.items()},
        "tracked": {"branch_discrepancies": branch, "symmetric_zones": _asymmetry()},
        "failures": failures,
    }
