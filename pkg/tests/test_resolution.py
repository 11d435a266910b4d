import random
from bisect import bisect_left, bisect_right
from collections import defaultdict
from fractions import Fraction
from math import gcd

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from resolution_spectra.exact import (
    INF,
    ContinuedFraction,
    QuadraticIrrational,
    cf_from_rational,
    rational_from_cf,
    surd_expand,
)
from resolution_spectra.resolution import (
    basin,
    classify,
    error_at,
    error_profile,
    error_profile_csv,
    functional_check,
    in_invariant_set,
    zone_bounds,
    mediant_grid,
    nu_minus,
    nu_plus,
    orbit,
    r_a,
    rational_grid,
    replay,
    resolution_tree,
    t_map,
    truncate_word,
    zone,
)
from resolution_spectra.words import GeneratorWord, word_from_cf

F = Fraction


def brute_r(x: Fraction, a: int):
    """Independent r_a: walk the Euclidean algorithm by hand."""
    p, q = x.numerator, x.denominator
    head = []
    while True:
        k, r = divmod(p, q)
        if k >= a:
            if not head:
                return INF
            num, den = 1, 0
            for t in reversed(head):
                num, den = t * num + den, num
            return F(num, den)
        head.append(k)
        if r == 0:
            return x
        p, q = q, r


# --- truncation and orbits ----------------------------------------------------


def test_truncate_word_examples():
    w = word_from_cf([0, 1, 2, 1, 3])
    t = truncate_word(w, 3)
    assert str(t.prefix) == "J^1 T^2 J^1" and t.terminal == "inf"
    assert t.value == F(3, 4)
    same = GeneratorWord.parse("T J")
    assert truncate_word(same, 3).prefix == same and truncate_word(same, 3).terminal is None
    t5 = truncate_word(GeneratorWord.parse("T^5"), 3)
    assert t5.prefix == GeneratorWord() and t5.value == INF


def test_j_offense_lands_on_zero_side():
    t = truncate_word(GeneratorWord.parse("T^2 J^4"), 3)
    assert t.terminal == "0" and t.value == 2


@pytest.mark.parametrize("x,a,img", [
    ([0, 1, 2, 1, 3], 3, F(3, 4)),
    ([0, 1, 3], 3, F(1)),
    ([0, 2], 3, F(1, 2)),
    ([4], 3, INF),
    ([1, 3], 3, F(1)),
])
def test_r_a_examples(x, a, img):
    assert r_a(x, a) == img


def test_r_a_infinity_fixed():
    assert r_a(INF, 2) == INF


def test_a_below_two_rejected():
    with pytest.raises(ValueError):
        r_a(F(1, 2), 1)


def test_orbit_examples():
    assert orbit([0, 1, 2, 1, 3], 3) == [F(3, 4), F(1)]
    assert orbit(F(1, 2), 3) == [F(1, 2)]
    assert orbit([2, 4], 3) == [F(2)]


def test_r_a_matches_brute_force():
    for a in (2, 3, 4, 5):
        for x in rational_grid(0, 4, 60):
            assert r_a(x, a) == brute_r(x.fraction, a)


def test_idempotence_is_invariance():
    for a in (2, 3, 4, 5):
        for x in rational_grid(0, 6, 300 if a == 3 else 120):
            assert (r_a(x, a) == x) == in_invariant_set(x, a)


@given(st.integers(0, 400), st.integers(1, 300), st.integers(2, 6), st.integers(0, 4))
def test_monotone_resolution(p, q, a, extra):
    x = F(p, q)
    if in_invariant_set(x, a):
        assert in_invariant_set(x, a + extra)


@given(st.integers(0, 2000), st.integers(1, 800), st.integers(2, 6))
def test_orbit_length_bounded_by_runs(p, q, a):
    x = F(p, q)
    runs = len(word_from_cf(cf_from_rational(x)).runs)
    path = orbit(x, a)
    assert len(path) <= max(runs, 1)
    assert r_a(path[-1], a) == path[-1]


def test_invariant_set_examples():
    assert in_invariant_set(ContinuedFraction([0, 1, 2, 1]), 3)
    assert not in_invariant_set(ContinuedFraction([0, 1, 3]), 3)
    assert in_invariant_set(QuadraticIrrational([], [1]), 2)
    assert not in_invariant_set(F(4, 3), 3)


# --- zones ----------------------------------------------------------------------


def test_nu_examples():
    assert (nu_minus(1, 3), nu_plus(1, 3)) == (F(3, 4), F(4, 3))
    assert (nu_minus(F(1, 2), 3), nu_plus(F(1, 2), 3)) == (F(3, 7), F(4, 7))
    assert (nu_minus(0, 3), nu_plus(0, 3)) == (0, F(1, 3))


def test_integer_formula():
    for m in range(1, 6):
        for a in range(m + 1, m + 5):
            assert nu_plus(m, a) == m + F(1, a)
            assert nu_minus(m, a) == m - 1 + 1 / (1 + F(1, a))


def test_zone_needs_invariant_center():
    with pytest.raises(ValueError):
        zone(F(3, 4), 3)
    with pytest.raises(ValueError):
        nu_plus(F(1, 3), 3)


@pytest.mark.parametrize("x,a", [(F(1, 2), 3), (F(1), 3), (F(2), 4), (F(2, 3), 5), (F(7, 5), 4)])
def test_functional_examples(x, a):
    assert functional_check(x, a)


def test_functional_instances():
    assert nu_plus(F(3, 2), 3) == 1 + nu_plus(F(1, 2), 3).fraction == F(11, 7)
    assert nu_plus(1, 3) == 1 / nu_minus(1, 3).fraction
    assert nu_minus(F(1, 2), 4) == 1 / nu_plus(2, 4).fraction


@given(st.integers(0, 300), st.integers(1, 120), st.integers(2, 6))
def test_functional_random(p, q, a):
    x = F(p, q)
    if in_invariant_set(x, a) and in_invariant_set(x + 1, a):
        assert functional_check(x, a)


def test_functional_thousand_random():
    rng = random.Random(11)
    done = 0
    while done < 1000:
        a = rng.randint(3, 7)
        x = rational_from_cf([rng.randint(0, a - 2)] + [rng.randint(1, a - 1) for _ in range(rng.randint(0, 8))])
        x = x.fraction
        if in_invariant_set(x, a) and in_invariant_set(x + 1, a):
            assert functional_check(x, a), (x, a)
            done += 1


def _preimages(a, grid):
    images = defaultdict(list)
    for x in grid:
        images[r_a(x, a)].append(x)
    return images


def test_zone_equals_preimage_scan():
    grid = rational_grid(F(7, 10), F(14, 10), 200)
    images = _preimages(3, grid)
    z = zone(1, 3)
    assert images[F(1)] == [x for x in grid if x in z]
    assert min(images[F(1)]) == F(3, 4) and max(images[F(1)]) == F(4, 3)


def test_zone_oracle_equivalence_small():
    grid = rational_grid(0, 3, 90)
    fr = [x.fraction for x in grid]
    for a in (2, 3, 4, 5):
        images = _preimages(a, grid)
        for c in rational_grid(0, 3, 15):
            if not in_invariant_set(c, a):
                continue
            z = zone(c, a)
            lo = bisect_left(fr, z.nu_minus.fraction)
            hi = bisect_right(fr, z.nu_plus.fraction)
            assert images[c] == grid[lo:hi], (a, c)


def test_zone_of_zero():
    z = zone(0, 3)
    assert (z.nu_minus, z.nu_plus) == (0, F(1, 3))
    assert all(r_a(x, 3) == 0 for x in rational_grid(0, F(1, 3), 80))


def test_asymmetry_worked_instance():
    assert zone(1, 3).widths == (F(1, 4), F(1, 3))


def test_half_integer_zones_are_symmetric():
    # x -> 1 - x conjugates r_a on (0, 1) and fixes 1/2, so its zone cannot
    # be lopsided; integer translation carries this to every k + 1/2
    for a in range(3, 9):
        lo, hi = zone(F(1, 2), a).widths
        assert lo == hi == F(1, 2 * (2 * a + 1))


def test_asymmetry_elsewhere():
    for a in (2, 3, 4, 5):
        for c in rational_grid(0, 3, 40):
            if in_invariant_set(c, a) and c.denominator != 2:
                lo, hi = zone(c, a).widths
                assert lo != hi


def test_zone_bounds_accepts_a_equal_one():
    lo, hi = zone_bounds(F(1, 2), 1)
    assert lo < F(1, 2) < hi


# --- error profile -------------------------------------------------------------


def test_error_examples():
    assert error_at(F(1, 2), 3) == 0
    assert error_at(F(4, 3), 3) == F(1, 3)
    assert error_at(F(7, 2), 3) == INF


def test_mediant_grid():
    g = mediant_grid(0, 1, 5)
    assert g == [0, F(1, 3), F(1, 2), F(2, 3), 1] or len(g) == 5
    assert g == sorted(g) and g[0] == 0 and g[-1] == 1
    with pytest.raises(ValueError):
        mediant_grid(1, 1, 3)


def test_error_profile_max_on_zone_endpoint():
    rows = error_profile(F(3, 4), F(4, 3), 3, 400)
    best = max(rows, key=lambda r: r[1])
    assert best[0] in (F(3, 4), F(4, 3))
    assert all(r_a(x, 3) == 1 for x, _ in rows)


def test_error_profile_csv():
    text = error_profile_csv(error_profile(0, 2, 3, 5))
    lines = text.splitlines()
    assert lines[0] == "x_num,x_den,x_decimal,error_decimal"
    assert lines[1] == "0,1,0,0"
    assert len(lines) == 6


def test_error_profile_threads_deterministic():
    assert error_profile(0, 3, 4, 300) == error_profile(0, 3, 4, 300, threads=4)


# --- basins ---------------------------------------------------------------------


def test_basin_of_one():
    b = basin(1, 3)
    assert b.right_edge.surd == (1, 3, 2)
    assert surd_expand(*b.right_edge.surd, 8) == [1, 2, 1, 2, 1, 2, 1, 2]
    assert b.left_edge.surd == (-1, 3, 1)


def test_right_edge_is_t_fixed_point():
    x = sympy.Symbol("x")
    P, D, Q = basin(1, 3).right_edge.surd
    v = (P + sympy.sqrt(D)) / Q
    assert sympy.simplify(t_map(v, 3) - v) == 0
    roots = sympy.solve(sympy.Eq(t_map(x, 3), x), x)
    assert any(sympy.simplify(r - v) == 0 for r in roots)


@pytest.mark.parametrize("a", [2, 3, 4, 5])
def test_basin_edges_are_exact(a):
    for c in rational_grid(0, 3, 8):
        if not in_invariant_set(c, a):
            continue
        b = basin(c, a)
        for e in (b.left_edge, b.right_edge):
            if e is None:
                continue
            P, D, Q = e.surd
            depth = len(e.preperiod) + 2 * len(e.period)
            assert surd_expand(P, D, Q, depth) == e.quotients(depth)


def test_basin_orbits_end_at_center():
    b = basin(1, 3)
    inside = [x for x in rational_grid(F(7, 10), F(14, 10), 150) if x in b]
    assert inside
    assert all(orbit(x, 3)[-1] == 1 for x in inside)


def test_basin_of_zero_has_no_left_edge():
    b = basin(0, 3)
    assert b.left_edge is None and 0 in b


# --- classification -------------------------------------------------------------


def test_classify_examples():
    assert classify(F(1, 2), 3).tag == "AttractiveRational"
    c = classify([0, 1, 2, 1, 3], 3)
    assert c.tag == "TransientRational" and c.certificate["orbit"] == ["11/15", "3/4", "1/1"]
    assert classify(QuadraticIrrational([1], [2, 1]), 3).tag == "TransientIrrational"


def test_classify_irrational_classes():
    assert classify(QuadraticIrrational([], [1]), 3).tag == "BlockingIrrational"
    assert classify(QuadraticIrrational([], [1, 2, 2]), 3).tag == "MixedIrrational"
    assert classify(QuadraticIrrational([], [1]), 2).tag == "TransientIrrational"


def test_classify_fuzzy():
    assert classify(F(89, 55), 3, depth=3).tag == "Fuzzy"


def test_classify_replay():
    for x in (F(11, 15), F(1, 2), F(17, 12), F(5, 7)):
        c = classify(x, 3)
        assert replay(x, 3, c)


# --- resolution tree -------------------------------------------------------------


def test_resolution_tree_a3():
    t = resolution_tree(3, 10)
    assert t.zones[(1, 1)].nu_minus == F(3, 4) and t.zones[(1, 1)].nu_plus == F(4, 3)
    for pt, node in t.tree.nodes.items():
        assert in_invariant_set(node.value, 3)
        z = t.zones[pt]
        assert all(r_a(x, 3) == node.value
                   for x in mediant_grid(z.nu_minus, z.nu_plus, 20))


def test_resolution_tree_a2_is_tiny():
    t = resolution_tree(2, 20)
    assert sorted(str(n.value) for n in t.tree.nodes.values()) == ["0/1", "1/1"]


def test_resolution_tree_exports():
    t = resolution_tree(3, 4)
    assert '"nu_minus": "3/4"' in t.to_json()
    assert "[3/4, 4/3]" in t.to_dot()
