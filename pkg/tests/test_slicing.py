import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swar.exceptions import DimensionMismatch, InvalidSliceCount, NonFinite, SliceTooSmall
from swar.numerics import ols_fit
from swar.slicing import Dataset, assign_slices, slice_counts, slice_statistics, sorted_slice_slopes


def enumerate_stable_ranks(y):
    # O(n^2) rank: count strictly smaller values, then earlier equal values.
    n = len(y)
    return [sum(1 for j in range(n) if y[j] < y[i] or (y[j] == y[i] and j < i)) for i in range(n)]


def normal_equation_slope(X, y):
    n, p = X.shape
    A = np.column_stack([np.ones(n), X])
    G = A.T @ A
    rhs = A.T @ y
    # Gauss-Jordan with partial pivoting.
    M = np.column_stack([G, rhs]).astype(float)
    k = p + 1
    for c in range(k):
        piv = c + int(np.argmax(np.abs(M[c:, c])))
        M[[c, piv]] = M[[piv, c]]
        M[c] /= M[c, c]
        for r in range(k):
            if r != c:
                M[r] -= M[r, c] * M[c]
    return M[1:, -1]


class TestDataset:
    def test_shapes(self):
        d = Dataset([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], [1.0, 2.0, 3.0])
        assert (d.n, d.p) == (3, 2)

    def test_vector_predictor_is_rejected(self):
        with pytest.raises(DimensionMismatch):
            Dataset([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])

    def test_drop(self):
        d = Dataset(np.arange(6.0).reshape(3, 2), [0.0, 1.0, 2.0])
        r = d.drop(1)
        np.testing.assert_array_equal(r.y, [0.0, 2.0])
        np.testing.assert_array_equal(r.X, [[0, 1], [4, 5]])

    def test_rejects_bad_input(self):
        with pytest.raises(DimensionMismatch):
            Dataset(np.ones((3, 2)), np.ones(2))
        with pytest.raises(NonFinite):
            Dataset(np.ones((2, 2)), [1.0, np.inf])


class TestAssignSlices:
    def test_even_split(self):
        y = np.array([5.0, 3.0, 9.0, 1.0, 7.0, 2.0, 8.0, 4.0, 6.0, 0.0])
        s = assign_slices(y, 5)
        assert s.counts.tolist() == [2, 2, 2, 2, 2]
        assert s.assignment[np.argmin(y)] == 0
        assert s.assignment[np.argmax(y)] == 4

    def test_remainder_goes_low(self):
        assert slice_counts(11, 5).tolist() == [3, 2, 2, 2, 2]
        assert assign_slices(np.arange(11.0), 5).assignment.tolist() == [0, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4]

    def test_ties_follow_row_order(self):
        y = np.zeros(7)
        s = assign_slices(y, 3)
        ranks = enumerate_stable_ranks(y)
        expected = np.repeat(np.arange(3), slice_counts(7, 3))[ranks]
        np.testing.assert_array_equal(s.assignment, expected)
        np.testing.assert_array_equal(s.order, np.arange(7))

    def test_partial_ties_match_enumeration(self):
        rng = np.random.default_rng(4)
        y = rng.integers(0, 4, size=25).astype(float)
        s = assign_slices(y, 4)
        expected = np.repeat(np.arange(4), slice_counts(25, 4))[enumerate_stable_ranks(y)]
        np.testing.assert_array_equal(s.assignment, expected)

    @pytest.mark.parametrize("H", [0, 4])
    def test_invalid_counts(self, H):
        with pytest.raises(InvalidSliceCount):
            assign_slices([1.0, 2.0, 3.0], H)

    @settings(max_examples=80, deadline=None)
    @given(
        y=st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=60),
        data=st.data(),
    )
    def test_partition_properties(self, y, data):
        y = np.array(y)
        H = data.draw(st.integers(1, len(y)))
        s = assign_slices(y, H)
        assert s.counts.sum() == len(y)
        assert s.counts.max() - s.counts.min() <= 1
        members = np.concatenate([s.members(h) for h in range(H)])
        assert sorted(members.tolist()) == list(range(len(y)))
        # contiguous in the response ordering
        for h in range(H - 1):
            assert y[s.members(h)].max() <= y[s.members(h + 1)].min()
        np.testing.assert_array_equal(np.bincount(s.assignment, minlength=H), s.counts)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 40))
    def test_permutation_equivariance(self, seed, n):
        rng = np.random.default_rng(seed)
        y = rng.standard_normal(n)
        H = int(rng.integers(1, n + 1))
        perm = rng.permutation(n)
        a = assign_slices(y, H).assignment
        b = assign_slices(y[perm], H).assignment
        np.testing.assert_array_equal(b, a[perm])


class TestSliceStatistics:
    def test_single_slice_is_global_ols(self):
        rng = np.random.default_rng(0)
        d = Dataset(rng.standard_normal((30, 3)), rng.standard_normal(30))
        (st1,) = slice_statistics(d, assign_slices(d.y, 1))
        np.testing.assert_allclose(st1.slope, ols_fit(d.X, d.y)[1], atol=1e-12)
        assert st1.weight == 1.0

    def test_too_small(self):
        rng = np.random.default_rng(1)
        d = Dataset(rng.standard_normal((50, 20)), rng.standard_normal(50))
        with pytest.raises(SliceTooSmall) as exc:
            slice_statistics(d, assign_slices(d.y, 5))
        assert exc.value.slice_index == 0

    def test_slopes_match_normal_equations(self):
        rng = np.random.default_rng(100)
        X = rng.standard_normal((100, 3))
        y = X @ [1.0, -2.0, 0.5] + rng.standard_normal(100)
        d = Dataset(X, y)
        scheme = assign_slices(y, 4)
        stats = slice_statistics(d, scheme)
        for h, s in enumerate(stats):
            idx = scheme.members(h)
            np.testing.assert_allclose(s.slope, normal_equation_slope(X[idx], y[idx]), atol=1e-8)
        o = scheme.order
        batched = sorted_slice_slopes(X[o], y[o], scheme.counts)
        np.testing.assert_allclose(batched, [s.slope for s in stats], atol=1e-10)

    def test_mixture_identity(self):
        rng = np.random.default_rng(2)
        d = Dataset(rng.standard_normal((53, 4)) + 3.0, rng.standard_normal(53))
        stats = slice_statistics(d, assign_slices(d.y, 5))
        mixed = sum(s.weight * s.mean for s in stats)
        np.testing.assert_allclose(mixed, d.X.mean(axis=0), atol=1e-12)
        assert sum(s.weight for s in stats) == pytest.approx(1.0, abs=1e-15)
        for s in stats:
            assert np.linalg.eigvalsh(s.cov)[0] >= -1e-12
