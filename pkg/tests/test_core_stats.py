import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from disco import (
    DataError,
    DomainError,
    IndexGroups,
    d_alpha,
    gini_mean,
    linearized_within_sums,
    pairwise_alpha_distances,
)

FOUR = [[0.0], [2.0], [1.0], [3.0]]


def brute_distances(x, alpha):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = len(x)
    out = np.zeros((n, n))
    for i in range(n):
        for m in range(n):
            out[i, m] = math.dist(x[i], x[m]) ** alpha
    return out


def brute_gini(x, a, b, alpha):
    return sum(math.dist(x[i], x[m]) ** alpha for i in a for m in b) / (len(a) * len(b))


def brute_pair_sum(values):
    return sum(abs(p - q) for p, q in itertools.combinations(values, 2))


class TestPairwiseDistances:
    def test_unit_distance(self):
        np.testing.assert_array_equal(pairwise_alpha_distances([[0], [1]], 1).values, [[0, 1], [1, 0]])

    @pytest.mark.parametrize("alpha, expected", [(1, 5.0), (2, 25.0)])
    def test_three_four_five(self, alpha, expected):
        D = pairwise_alpha_distances([[0, 0], [3, 4]], alpha)
        assert D.values[0, 1] == D.values[1, 0] == expected

    def test_fractional_index(self):
        D = pairwise_alpha_distances(FOUR, 0.5)
        assert D.values[0, 3] == pytest.approx(abs(0 - 3) ** 0.5, rel=1e-15)
        assert D.values[0, 3] == pytest.approx(1.7320508, abs=1e-7)

    def test_matches_brute_force(self, rng):
        x = rng.normal(size=(30, 4))
        for alpha in (0.3, 1.0, 1.7, 2.0):
            D = pairwise_alpha_distances(x, alpha)
            np.testing.assert_allclose(D.values, brute_distances(x, alpha), rtol=1e-12, atol=1e-14)
            assert D.alpha == alpha

    def test_invariants(self, rng):
        D = pairwise_alpha_distances(rng.normal(size=(50, 3)), 1.3)
        v = D.values
        assert np.array_equal(v, v.T)
        assert np.all(np.diag(v) == 0)
        assert np.all(v >= 0)
        assert not v.flags.writeable

    def test_one_dimensional_input_is_a_column(self):
        D = pairwise_alpha_distances([0.0, 2.0, 1.0], 1)
        assert D.n == 3 and D.values[0, 1] == 2.0

    @pytest.mark.parametrize("alpha", [0, -1, 2.0001, float("nan")])
    def test_index_domain(self, alpha):
        with pytest.raises(DomainError):
            pairwise_alpha_distances(FOUR, alpha)

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite(self, bad):
        with pytest.raises(DataError):
            pairwise_alpha_distances([[0.0], [bad]], 1)


class TestGiniMean:
    def test_single_pair(self):
        D = pairwise_alpha_distances([[0], [1]], 1)
        assert gini_mean(D, [0], [1]) == 1.0

    def test_within_includes_diagonal(self):
        D = pairwise_alpha_distances([[0], [1]], 1)
        assert gini_mean(D, [0, 1], [0, 1]) == 0.5

    def test_cross_sample(self):
        D = pairwise_alpha_distances(FOUR, 1)
        assert gini_mean(D, [0, 1], [2, 3]) == pytest.approx(brute_gini(np.array(FOUR), [0, 1], [2, 3], 1))
        assert gini_mean(D, [0, 1], [2, 3]) == 1.5

    def test_errors(self):
        D = pairwise_alpha_distances(FOUR, 1)
        with pytest.raises(DomainError):
            gini_mean(D, [], [1])
        with pytest.raises(DataError):
            gini_mean(D, [0], [4])

    @given(st.data())
    @settings(max_examples=50, deadline=None)
    def test_symmetric_exactly(self, data):
        n = data.draw(st.integers(2, 20))
        x = data.draw(arrays(float, (n, 2), elements=st.floats(-100, 100)))
        a = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n))
        b = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n))
        D = pairwise_alpha_distances(x, data.draw(st.floats(0.01, 2.0)))
        assert gini_mean(D, a, b) == gini_mean(D, b, a)


class TestDAlpha:
    def test_identical_points(self):
        D = pairwise_alpha_distances([[1.5, 2.0], [1.5, 2.0]], 1)
        assert d_alpha(D, [0], [1]) == 0.0

    def test_index_one(self):
        # samples {0, 2} and {1, 3}
        D = pairwise_alpha_distances(FOUR, 1)
        x = np.array(FOUR)
        a, b = [0, 1], [2, 3]
        oracle = 4 / 4 * (2 * brute_gini(x, a, b, 1) - brute_gini(x, a, a, 1) - brute_gini(x, b, b, 1))
        assert oracle == pytest.approx(1.0)
        assert d_alpha(D, a, b) == pytest.approx(1.0, rel=1e-14)

    def test_index_two_is_twice_sst(self):
        D = pairwise_alpha_distances(FOUR, 2)
        # means 1 and 2, pooled mean 1.5: 2 * (2 * 0.25 + 2 * 0.25) = 2
        assert d_alpha(D, [0, 1], [2, 3]) == pytest.approx(2.0, rel=1e-14)

    def test_overlap_rejected(self):
        D = pairwise_alpha_distances(FOUR, 1)
        with pytest.raises(DomainError):
            d_alpha(D, [0, 1], [1, 2])

    @given(st.data())
    @settings(max_examples=100, deadline=None)
    def test_nonnegative(self, data):
        n1 = data.draw(st.integers(1, 10))
        n2 = data.draw(st.integers(1, 10))
        p = data.draw(st.integers(1, 3))
        x = data.draw(arrays(float, (n1 + n2, p), elements=st.floats(-1e3, 1e3)))
        alpha = data.draw(st.floats(0.01, 2.0))
        D = pairwise_alpha_distances(x, alpha)
        scale = max(D.values.max(), 1.0)
        assert d_alpha(D, range(n1), range(n1, n1 + n2)) >= -1e-9 * scale

    @given(st.data())
    @settings(max_examples=50, deadline=None)
    def test_duplicated_sample_is_zero(self, data):
        n = data.draw(st.integers(1, 10))
        a = data.draw(arrays(float, (n, 2), elements=st.floats(-100, 100)))
        alpha = data.draw(st.floats(0.01, 2.0))
        D = pairwise_alpha_distances(np.vstack([a, a[::-1]]), alpha)
        scale = max(gini_mean(D, range(2 * n), range(2 * n)), 1e-300)
        assert abs(d_alpha(D, range(n), range(n, 2 * n))) <= 1e-9 * n * scale

    @given(st.data())
    @settings(max_examples=100, deadline=None)
    def test_index_two_closed_form(self, data):
        n1 = data.draw(st.integers(1, 12))
        n2 = data.draw(st.integers(1, 12))
        x = data.draw(arrays(float, n1 + n2, elements=st.floats(-100, 100)))
        a, b = x[:n1], x[n1:]
        c = x.mean()
        closed = 2 * (n1 * (a.mean() - c) ** 2 + n2 * (b.mean() - c) ** 2)
        D = pairwise_alpha_distances(x, 2)
        scale = max(np.var(x) * (n1 + n2), 1e-12)
        assert d_alpha(D, range(n1), range(n1, n1 + n2)) == pytest.approx(closed, rel=1e-9, abs=1e-9 * scale)


class TestLinearizedSums:
    @pytest.mark.parametrize("values, expected", [([5], 0.0), ([0, 1, 2], 4.0), ([3, 1, 2, 0], 10.0)])
    def test_examples(self, values, expected):
        assert brute_pair_sum(values) == expected
        assert linearized_within_sums(values) == expected

    def test_empty(self):
        with pytest.raises(DomainError):
            linearized_within_sums([])

    @given(arrays(float, st.integers(1, 200), elements=st.floats(-1e6, 1e6)))
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force(self, x):
        brute = math.fsum(abs(p - q) for p, q in itertools.combinations(x.tolist(), 2))
        assert linearized_within_sums(x) == pytest.approx(brute, rel=1e-10, abs=1e-6)


class TestIndexGroups:
    def test_first_appearance_order(self):
        g = IndexGroups.from_labels(["b", "a", "b", "c"])
        assert g.levels == ("b", "a", "c")
        assert g.codes.tolist() == [0, 1, 0, 2]
        assert g.sizes.tolist() == [2, 1, 1]

    def test_empty_group_rejected(self):
        with pytest.raises(DataError):
            IndexGroups(np.array([0, 0, 2]), ("x", "y", "z"))

    def test_indicator(self):
        g = IndexGroups.from_labels([1, 2, 1])
        np.testing.assert_array_equal(g.indicator(), [[1, 0], [0, 1], [1, 0]])
