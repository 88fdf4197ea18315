"""Response-ordered slicing and per-slice moments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .exceptions import DimensionMismatch, InvalidSliceCount, SingularCovariance, SliceTooSmall


@dataclass(frozen=True)
class Dataset:
    """``n`` observations of a response ``y`` and a ``p``-vector predictor."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = numerics._as_matrix(self.X)
        y = numerics._as_vector(self.y, name="y")
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if X.shape[0] < 1:
            raise DimensionMismatch("dataset is empty")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def drop(self, i: int) -> "Dataset":
        """Copy of the dataset without observation ``i``."""
        return Dataset(np.delete(self.X, i, axis=0), np.delete(self.y, i))

    def take(self, index) -> "Dataset":
        return Dataset(self.X[index], self.y[index])


@dataclass(frozen=True)
class SliceScheme:
    """Partition of the observations into ``H`` contiguous response slices.

    ``assignment[i]`` is the 0-based slice of observation ``i``; ``order`` lists
    observation indices by increasing response (ties by original index).
    """

    H: int
    assignment: np.ndarray
    counts: np.ndarray
    order: np.ndarray

    @property
    def bounds(self) -> np.ndarray:
        """Start positions of each slice within ``order``, plus the end."""
        return np.concatenate(([0], np.cumsum(self.counts)))

    def members(self, h: int) -> np.ndarray:
        """Observation indices in slice ``h``, in response order."""
        b = self.bounds
        return self.order[b[h] : b[h + 1]]

    def drop(self, i: int) -> "SliceScheme":
        """Scheme for the data without observation ``i``; other memberships are kept."""
        n = self.assignment.shape[0]
        if not 0 <= i < n:
            raise IndexError(f"observation {i} out of range for n={n}")
        counts = self.counts.copy()
        counts[self.assignment[i]] -= 1
        order = self.order[self.order != i]
        order = order - (order > i)
        return SliceScheme(self.H, np.delete(self.assignment, i), counts, order)


@dataclass
class SliceStats:
    n: int
    mean: np.ndarray
    ymean: float
    cov: np.ndarray
    slope: np.ndarray
    weight: float


def slice_counts(n: int, H: int) -> np.ndarray:
    """Equal allocation with the remainder placed in the lowest slices."""
    if not 1 <= H <= n:
        raise InvalidSliceCount(f"need 1 <= H <= n, got H={H}, n={n}")
    counts = np.full(H, n // H, dtype=int)
    counts[: n % H] += 1
    return counts


def assign_slices(y, H: int) -> SliceScheme:
    y = numerics._as_vector(y)
    n = y.shape[0]
    counts = slice_counts(n, H)
    order = np.argsort(y, kind="stable")
    assignment = np.empty(n, dtype=int)
    assignment[order] = np.repeat(np.arange(H), counts)
    return SliceScheme(H, assignment, counts, order)


def slice_statistics(data: Dataset, scheme: SliceScheme) -> list[SliceStats]:
    """Moments and least-squares slope within every slice.

    Slice weights default to ``n_h / n``.
    """
    if scheme.assignment.shape[0] != data.n:
        raise DimensionMismatch("slice scheme does not match the dataset")
    stats = []
    for h in range(scheme.H):
        idx = scheme.members(h)
        if idx.size <= data.p:
            raise SliceTooSmall(h, int(idx.size), data.p)
        Xh, yh = data.X[idx], data.y[idx]
        mean, ymean, cov, _ = numerics.sample_moments(Xh, yh)
        _, slope = numerics.ols_fit(Xh, yh)
        stats.append(SliceStats(int(idx.size), mean, ymean, cov, slope, idx.size / data.n))
    return stats


def sorted_slice_slopes(Xs, ys, counts):
    """Slopes of every slice for data already sorted by response.

    Batched equivalent of calling :func:`numerics.ols_fit` on each block of
    ``counts`` consecutive rows; used in the leave-one-out loops.
    """
    p = Xs.shape[1]
    H = len(counts)
    S = np.empty((H, p, p))
    c = np.empty((H, p))
    start = 0
    for h, m in enumerate(counts):
        if m <= p:
            raise SliceTooSmall(h, int(m), p)
        Xh = Xs[start : start + m]
        yh = ys[start : start + m]
        Xc = Xh - Xh.mean(axis=0)
        S[h] = Xc.T @ Xc
        c[h] = Xc.T @ (yh - yh.mean())
        start += m
    ev = np.linalg.eigvalsh(S)
    bad = (ev[:, 0] <= 0) | (ev[:, -1] > numerics.MAX_CONDITION * ev[:, 0])
    if np.any(bad):
        raise SingularCovariance(
            f"slice {int(np.flatnonzero(bad)[0])} has a singular predictor covariance"
        )
    return np.linalg.solve(S, c[..., None])[..., 0]
