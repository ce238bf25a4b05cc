from fractions import Fraction
from math import factorial

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from thetaseed.series import ExactSeries, eval_miwa, exp_series, miwa_images, t_weights

W = 8


def t(i, W=W):
    return ExactSeries.t(i, W)


@st.composite
def series(draw, W=W, max_terms=5):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        mono = [0] * W
        budget = draw(st.integers(0, W))
        while budget:
            i = draw(st.integers(1, budget))
            mono[i - 1] += 1
            budget -= i
        terms[tuple(mono)] = Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4)))
    return ExactSeries(terms, t_weights(W), W)


class TestBasics:
    def test_drops_heavy_and_zero_terms(self):
        s = ExactSeries({(0, 0, 3): 1, (1, 0, 0): 0, (2, 0, 0): 1}, t_weights(3), 5)
        assert s.terms == {(2, 0, 0): mpq(1)}

    def test_arity_checked(self):
        with pytest.raises(ValueError, match="arity"):
            ExactSeries({(1,): 1}, t_weights(2), 3)

    def test_multiplication_truncates(self):
        p = (t(1) + t(3)) ** 3
        assert max(p.weights_present()) <= W
        assert p.coefficient({1: 1, 3: 2}) == 3
        assert p.coefficient({3: 3}) == 0

    def test_different_rings_rejected(self):
        with pytest.raises(ValueError):
            t(1, 4) + ExactSeries.t(1, 4, 5)

    def test_exp_needs_zero_constant(self):
        with pytest.raises(ValueError):
            exp_series(t(1) + 1)

    def test_records_round_trip_and_order(self):
        s = t(2) * t(1) / 3 - t(3) + 2
        recs = s.to_records()
        assert recs[0] == {"exponents": {}, "coeff": "2"}
        assert [r["coeff"] for r in recs] == ["2", "1/3", "-1"]
        assert ExactSeries.from_records(recs, s.weights, s.cutoff) == s


class TestDerive:
    def test_examples(self):
        s = t(1) ** 3 / 3 - t(3)
        assert s.derive([3]) == -1
        assert s.derive([1, 1, 1]) == 2
        assert s.derive([]) is s
        assert s.at_zero_derivative([1, 1, 1]) == 2

    def test_index_validation(self):
        with pytest.raises(ValueError):
            t(1).derive([0])

    @given(series(), st.lists(st.integers(1, W), max_size=3))
    def test_order_independent(self, s, I):
        assert s.derive(I) == s.derive(list(reversed(I)))

    @given(series(), series(), st.integers(1, W))
    def test_leibniz(self, a, b, i):
        # exact whenever no term of a*b was truncated
        a, b = a.truncate(W // 2).with_cutoff(W), b.truncate(W // 2).with_cutoff(W)
        assert (a * b).derive([i]) == a.derive([i]) * b + a * b.derive([i])


class TestRingLaws:
    @given(series(), series(), series())
    def test_associative_distributive(self, a, b, c):
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a - a == 0

    @given(series())
    def test_negate_variables_is_involution(self, a):
        assert a.negate_variables().negate_variables() == a


def naive_exp_generating(W):
    """exp(sum t_n k^n) in (t, k) with plain dicts and Fractions, returned as {n: {mono: coeff}}."""
    f = {}
    for n in range(1, W + 1):
        mono = tuple(1 if j == n - 1 else 0 for j in range(W))
        f[(mono, n)] = Fraction(1)
    total = {((0,) * W, 0): Fraction(1)}
    power = dict(total)
    for m in range(1, W + 1):
        nxt = {}
        for (ma, ka), ca in power.items():
            for (mb, kb), cb in f.items():
                if ka + kb <= W:
                    key = (tuple(x + y for x, y in zip(ma, mb)), ka + kb)
                    nxt[key] = nxt.get(key, 0) + ca * cb
        power = nxt
        for key, c in power.items():
            total[key] = total.get(key, 0) + c / factorial(m)
    out = {n: {} for n in range(W + 1)}
    for (mono, n), c in total.items():
        if c:
            out[n][mono] = c
    return out


def test_exp_series_matches_generating_function():
    expected = naive_exp_generating(W)
    # exp(f) for f = sum t_n k^n with k adjoined as a weight-0-free bookkeeping variable of weight 1
    weights = t_weights(W) + (1,)
    f = sum((ExactSeries.variable(n, weights, 2 * W) * ExactSeries.variable(W + 1, weights, 2 * W) ** n
             for n in range(1, W + 1)), ExactSeries.zero(weights, 2 * W))
    e = exp_series(f)
    for n in range(W + 1):
        got = {m[:-1]: Fraction(int(c.numerator), int(c.denominator)) for m, c in e.terms.items() if m[-1] == n}
        assert got == expected[n]


class TestMiwa:
    def test_images(self):
        imgs = miwa_images(2, 4)
        assert imgs[2].terms == {(3, 0): mpq(1, 3), (0, 3): mpq(1, 3)}

    def test_eval_examples(self):
        s21 = t(1, 3) ** 3 / 3 - t(3, 3)
        assert eval_miwa(s21, 1).is_zero()
        assert eval_miwa(t(1, 1), 2).terms == {(1, 0): 1, (0, 1): 1}
        assert eval_miwa(s21 + 5, 0).constant_term() == 5

    @given(series(), st.integers(1, 3))
    def test_homogeneous_image(self, s, k):
        for w in s.weights_present():
            img = eval_miwa(s.homogeneous(w), k)
            assert all(sum(m) == w for m in img.terms)

    @given(series(W=5, max_terms=3), series(W=5, max_terms=3))
    def test_ring_homomorphism(self, a, b):
        assert eval_miwa(a * b, 2) == eval_miwa(a, 2) * eval_miwa(b, 2)
        assert eval_miwa(a + b, 2) == eval_miwa(a, 2) + eval_miwa(b, 2)
