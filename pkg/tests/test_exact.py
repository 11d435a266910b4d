from fractions import Fraction
from math import gcd

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.ntheory.continued_fraction import (
    continued_fraction_iterator,
    continued_fraction_periodic,
)

from resolution_spectra.exact import (
    INF,
    ContinuedFraction,
    ProjectiveRational,
    QuadraticIrrational,
    cf_from_rational,
    cf_of_decimal,
    convergents,
    normalize_surd,
    parse_rational,
    rational_from_cf,
    surd_expand,
    surd_value,
    to_minimal_form,
    to_word_form,
)

quotients = st.lists(st.integers(1, 30), min_size=0, max_size=12)


def canonical_cfs(max_sum):
    """Every minimal continued fraction with quotient sum <= max_sum."""
    out = [[a0] for a0 in range(max_sum + 1)]

    def tails(budget):
        if budget < 2:
            return
        for last in range(2, budget + 1):
            yield [last]
        for head in range(1, budget - 1):
            for rest in tails(budget - head):
                yield [head] + rest

    for a0 in range(max_sum + 1):
        for t in tails(max_sum - a0):
            out.append([a0] + t)
    return out


# --- ProjectiveRational --------------------------------------------------------


def test_projective_normalizes():
    assert ProjectiveRational(6, -4) == ProjectiveRational(-3, 2)
    assert str(ProjectiveRational(0, 7)) == "0/1"
    assert str(ProjectiveRational(-5, 0)) == "inf"
    assert ProjectiveRational(5, 0) is not None and ProjectiveRational(5, 0) == INF


def test_projective_zero_over_zero():
    with pytest.raises(ValueError):
        ProjectiveRational(0, 0)


def test_projective_order_and_mixed_equality():
    assert ProjectiveRational(1, 3) < ProjectiveRational(1, 2) < INF
    assert ProjectiveRational(2, 1) == 2
    assert ProjectiveRational(3, 4) == Fraction(3, 4)
    assert hash(ProjectiveRational(3, 4)) == hash(Fraction(3, 4))
    assert ProjectiveRational(4, 3).point == (3, 4)


@pytest.mark.parametrize("text,value", [
    ("3/4", Fraction(3, 4)),
    ("0.5", Fraction(1, 2)),
    ("1000000.07", Fraction(100000007, 100)),
    ("0.599975/1.00000007", Fraction(59997500, 100000007)),
    ("7", Fraction(7)),
])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["", "1/", "abc", "1.2.3", "1/2/3"])
def test_parse_rational_rejects(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


def test_parse_inf():
    assert parse_rational("inf").is_infinite


# --- continued fractions ------------------------------------------------------


@pytest.mark.parametrize("x,cf", [
    (Fraction(0), [0]),
    (Fraction(3, 4), [0, 1, 3]),
    (Fraction(59997500, 100000007), [0, 1, 1, 2, 1596, 1, 10, 1, 148, 7]),
    (Fraction(7), [7]),
])
def test_cf_from_rational_examples(x, cf):
    assert list(cf_from_rational(x)) == cf


def test_cf_from_rational_rejects_outside_cone():
    with pytest.raises(ValueError):
        cf_from_rational(INF)
    with pytest.raises(ValueError):
        cf_from_rational(Fraction(-1, 2))


@pytest.mark.parametrize("cf,value", [([2], 2), ([0, 1, 2, 1], Fraction(3, 4)), ([0, 0, 0, 1], 1)])
def test_rational_from_cf_examples(cf, value):
    assert rational_from_cf(cf) == value


def test_rational_from_cf_rejects_empty():
    with pytest.raises(ValueError):
        rational_from_cf([])


def test_cf_agrees_with_sympy():
    for q in range(1, 60):
        for p in range(0, 3 * q):
            expected = list(continued_fraction_iterator(sympy.Rational(p, q)))
            assert list(cf_from_rational(Fraction(p, q))) == expected


def test_round_trip_exhaustive():
    for q in range(1, 501, 7):
        for p in range(0, 10 * q + 1):
            if gcd(p, q) == 1:
                x = ProjectiveRational(p, q)
                assert rational_from_cf(cf_from_rational(x)) == x


def test_convergent_examples():
    rows = convergents([0, 1, 1, 2]).rows
    assert [(r.p, r.q) for r in rows] == [(0, 1), (1, 1), (1, 2), (3, 5)]
    assert convergents([0, 1, 1, 2, 1596]).last[1:] == (4789, 7982)
    assert [(r.p, r.q) for r in convergents([5])] == [(5, 1)]


def test_convergent_closed_form():
    for a in range(1, 300):
        last = convergents([0, 1, 1, 2, a]).last
        assert (last.p, last.q) == (3 * a + 1, 5 * a + 2)


@given(st.integers(0, 20), quotients)
def test_determinant_identity(a0, rest):
    rows = convergents([a0] + rest).rows
    p1, q1 = 1, 0
    for r in rows:
        assert r.p * q1 - p1 * r.q == (-1) ** (r.index + 1)
        p1, q1 = r.p, r.q


@given(st.integers(0, 20), quotients)
def test_last_convergent_is_value(a0, rest):
    cf = [a0] + rest
    last = convergents(cf).last
    assert rational_from_cf(cf) == Fraction(last.p, last.q)


@pytest.mark.parametrize("cf,word", [([0, 2], [0, 1, 1]), ([0, 1, 3], [0, 1, 3]), ([1, 3], [1, 2, 1])])
def test_word_form_examples(cf, word):
    assert list(to_word_form(cf)) == word
    assert list(to_minimal_form(word)) == cf


def test_form_round_trip_exhaustive():
    # quotient sum <= 16: about 10^5 sequences; sum 60 would be ~2^58
    for cf in canonical_cfs(16):
        c = ContinuedFraction(cf)
        w = to_word_form(c)
        assert len(w) % 2 == 1
        assert rational_from_cf(w) == rational_from_cf(c)
        assert to_minimal_form(w) == c


def test_canonical_enumeration_is_complete():
    cfs = {tuple(c) for c in canonical_cfs(8)}
    brute = set()
    for q in range(1, 60):
        for p in range(0, 9 * q):
            if gcd(p, q) == 1:
                c = tuple(cf_from_rational(Fraction(p, q)))
                if sum(c) <= 8:
                    brute.add(c)
    assert cfs == brute


@given(st.integers(0, 60), st.lists(st.integers(1, 60), max_size=12))
def test_form_round_trip_random(a0, rest):
    c = cf_from_rational(rational_from_cf([a0] + rest + [2]))
    assert to_minimal_form(to_word_form(c)) == c


@pytest.mark.parametrize("s,depth,expected", [
    ("0.5", 10, [0, 2]),
    ("0.599975/1.00000007", 7, [0, 1, 1, 2, 1596, 1, 10]),
    ("1.366", 4, [1, 2, 1, 2]),
])
def test_cf_of_decimal(s, depth, expected):
    assert list(cf_of_decimal(s, depth)) == expected


def test_cf_of_decimal_errors():
    with pytest.raises(ValueError):
        cf_of_decimal("0.5", 0)
    with pytest.raises(ValueError):
        cf_of_decimal("zero", 3)


def test_cf_parse_and_str():
    c = ContinuedFraction.parse("[0,1,2,1,3]")
    assert str(c) == "[0,1,2,1,3]"
    assert rational_from_cf(c) == Fraction(11, 15)


# --- quadratic irrationals ----------------------------------------------------


@pytest.mark.parametrize("pre,per,surd", [
    ([], [2, 1], (1, 3, 1)),
    ([1], [2, 1], (1, 3, 2)),
    ([], [1], (1, 5, 2)),
])
def test_surd_value_examples(pre, per, surd):
    assert surd_value(QuadraticIrrational(pre, per)) == surd


def _sympy_quotients(P, D, Q, depth):
    cf = continued_fraction_periodic(P, Q, D)
    pre = [a for a in cf if not isinstance(a, list)]
    per = cf[-1] if isinstance(cf[-1], list) else []
    out = list(pre)
    while len(out) < depth:
        out.extend(per)
    return out[:depth]


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(1, 10), max_size=3), st.integers(0, 10),
       st.lists(st.integers(1, 10), min_size=1, max_size=4))
def test_surd_consistency(pre, a0, per):
    pre = [a0] + pre
    qi = QuadraticIrrational(pre, per)
    P, D, Q = qi.surd
    assert (D - P * P) % Q == 0
    depth = len(pre) + 3 * len(per)
    assert surd_expand(P, D, Q, depth) == qi.quotients(depth)
    assert _sympy_quotients(P, D, Q, depth) == qi.quotients(depth)


def test_surd_expand_matches_sympy():
    for P, Q, D in [(1, 2, 3), (0, 1, 7), (3, 5, 11)]:
        cf = continued_fraction_periodic(P, Q, D)
        pre = [a for a in cf if not isinstance(a, list)]
        per = cf[-1]
        got = surd_expand(*normalize_surd(P, D, Q), len(pre) + 2 * len(per))
        assert got == pre + per + per


def test_surd_rejects_rational():
    with pytest.raises(ValueError):
        surd_expand(1, 4, 1, 3)


def test_surd_compare_and_float():
    qi = QuadraticIrrational([1], [2, 1])
    assert qi.compare(Fraction(1366, 1000)) > 0
    assert qi.compare(Fraction(1367, 1000)) < 0
    assert abs(float(qi) - 1.3660254037844386) < 1e-15


def test_surd_text_round_trip():
    qi = QuadraticIrrational([1], [2, 1])
    assert str(qi) == "[1;(2,1)] = (1+sqrt(3))/2"
    assert QuadraticIrrational.parse(str(qi)) == qi
    assert str(QuadraticIrrational([], [1])) == "[(1)] = (1+sqrt(5))/2"


def test_canonical_period():
    qi = QuadraticIrrational([1, 2, 1], [2, 1, 2, 1]).canonical()
    # [1;(2,1)] and [(1,2)] spell the same number; the latter is shorter
    assert (qi.preperiod, qi.period) == ((), (1, 2))
    assert qi.surd == (1, 3, 2)
