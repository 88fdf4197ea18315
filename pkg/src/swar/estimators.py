"""Dimension-reduction estimators built from slices of the response.

``swar`` forms ``R = sum_h w_h b_h b_h^T`` from the least-squares slopes
``b_h`` of each slice and returns its leading eigenvectors. ``swar_w`` and
``swar_t`` re-weight the slices by their mean influence.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .exceptions import (
    DegenerateProjection,
    DegenerateSliceWarning,
    DimensionMismatch,
    InvalidConfig,
    InvalidParameters,
    InvalidWeights,
    NoFeasiblePair,
    NumericalInfeasibility,
    RankDeficientWarning,
    SliceTooSmall,
    ZeroMeanInfluenceWarning,
)
from .slicing import Dataset, SliceScheme, assign_slices, sorted_slice_slopes

METHODS = ("ols", "sir", "swar", "swar_w", "swar_t")

#: Floor applied to slice mean influences before taking reciprocals.
MIN_MEAN_INFLUENCE = 1e-12


@dataclass
class DirectionBasis:
    """Estimated basis of the dimension-reduction subspace.

    ``directions`` is ``p x K`` with orthonormal columns ordered by
    ``eigenvalues``. ``slopes`` holds the slice slopes (``H x p``) for the
    slope-based methods and is ``None`` for SIR.
    """

    directions: np.ndarray
    eigenvalues: np.ndarray
    method: str
    H: int
    weights: np.ndarray | None = None
    slopes: np.ndarray | None = None

    @property
    def K(self) -> int:
        return self.directions.shape[1]

    def scores(self, X) -> np.ndarray:
        """Projections ``X @ directions`` used for summary plots."""
        return np.asarray(X, dtype=float) @ self.directions


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = "swar"
    H: int = 2
    K: int = 1

    def __post_init__(self):
        method = self.method.lower()
        if method not in METHODS:
            raise InvalidConfig(f"unknown method {self.method!r}; choose from {METHODS}")
        object.__setattr__(self, "method", method)
        if self.K < 1 or self.H < 1:
            raise InvalidConfig("H and K must be positive")
        if method == "ols" and self.K != 1:
            raise InvalidConfig("OLS estimates a single direction (K=1)")
        if method.startswith("swar") and self.K > self.H:
            raise InvalidConfig(f"SWAR finds at most H={self.H} directions, K={self.K} requested")


def fit(data: Dataset, config: EstimatorConfig, scheme: SliceScheme | None = None) -> DirectionBasis:
    """Fit the estimator described by ``config``.

    ``scheme`` overrides the default equal-count slicing of ``data.y``.
    """
    if config.method == "ols":
        return ols_direction(data)
    if config.method == "sir":
        return sir(data, config.H, config.K, scheme=scheme)
    if config.method == "swar":
        return swar(data, config.H, config.K, scheme=scheme)
    if config.method == "swar_w":
        return swar_w(data, config.H, config.K, scheme=scheme)
    return swar_t(data, config.H, config.K, scheme=scheme)


def _scheme_for(data: Dataset, H: int, scheme):
    if scheme is None:
        return assign_slices(data.y, H)
    if scheme.H != H or scheme.assignment.shape[0] != data.n:
        raise DimensionMismatch(f"slice scheme (H={scheme.H}) does not match the data or H={H}")
    return scheme


def ols_direction(data: Dataset) -> DirectionBasis:
    _, slope = numerics.ols_fit(data.X, data.y)
    norm = np.linalg.norm(slope)
    if norm == 0:
        raise DegenerateProjection("least-squares slope is zero")
    direction = numerics.fix_signs(slope / norm)[:, None]
    return DirectionBasis(
        direction, np.array([norm**2]), "ols", 1, weights=np.ones(1), slopes=slope[None, :]
    )


def _inverse_sqrt(cov):
    values, vectors = np.linalg.eigh(cov)
    if values[0] <= 0 or values[-1] > numerics.MAX_CONDITION * values[0]:
        raise numerics.SingularCovariance("predictor covariance is singular or ill-conditioned")
    return (vectors / np.sqrt(values)) @ vectors.T


def sir(data: Dataset, H: int, K: int, *, scheme=None) -> DirectionBasis:
    """Sliced inverse regression.

    Directions are the leading eigenvectors of the standardized slice-mean
    covariance, mapped back to the predictor scale and orthonormalized.
    Requesting more than ``H - 1`` directions only warns: the extra columns
    come from the null space and carry no information.
    """
    if H < 2:
        raise InvalidParameters("SIR needs at least two slices")
    if K > data.p:
        raise InvalidParameters(f"K={K} exceeds the predictor dimension {data.p}")
    if K > H - 1:
        warnings.warn(
            f"SIR with H={H} slices identifies at most {H - 1} directions; K={K} requested",
            RankDeficientWarning,
            stacklevel=2,
        )
    scheme = _scheme_for(data, H, scheme)
    mean, _, cov, _ = numerics.sample_moments(data.X, data.y)
    root = _inverse_sqrt(cov)
    M = np.zeros((data.p, data.p))
    for h in range(H):
        d = data.X[scheme.members(h)].mean(axis=0) - mean
        M += scheme.counts[h] / data.n * np.outer(d, d)
    V = root @ M @ root
    eig = numerics.sym_eigen(0.5 * (V + V.T))
    directions = numerics.orthonormalize(root @ eig.vectors[:, :K])
    return DirectionBasis(
        directions, np.maximum(eig.values[:K], 0.0), "sir", H, weights=scheme.counts / data.n
    )


def _check_weights(weights, H):
    w = np.asarray(weights, dtype=float)
    if w.shape != (H,):
        raise InvalidWeights(f"expected {H} slice weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise InvalidWeights("slice weights must be positive and finite")
    return w


def _swar_eigen(data: Dataset, H: int, weights=None, scheme=None):
    scheme = _scheme_for(data, H, scheme)
    o = scheme.order
    slopes = sorted_slice_slopes(data.X[o], data.y[o], scheme.counts)
    w = scheme.counts / data.n if weights is None else _check_weights(weights, H)
    R = slopes.T @ (w[:, None] * slopes)
    return numerics.sym_eigen(0.5 * (R + R.T)), slopes, w


def swar(data: Dataset, H: int, K: int, weights=None, *, method="swar", scheme=None) -> DirectionBasis:
    """Slice weighted average regression.

    Slice weights default to the slice proportions ``n_h / n``; custom
    weights multiply the raw (unnormalized) slice slopes.
    """
    if K > H:
        raise InvalidParameters(f"SWAR finds at most H={H} directions, K={K} requested")
    if K > data.p:
        raise InvalidParameters(f"K={K} exceeds the predictor dimension {data.p}")
    eig, slopes, w = _swar_eigen(data, H, weights, scheme)
    return DirectionBasis(
        eig.vectors[:, :K].copy(), np.maximum(eig.values[:K], 0.0), method, H, w, slopes
    )


def _centered_slope(X, y):
    Xc = X - X.mean(axis=0)
    return np.linalg.solve(Xc.T @ Xc, Xc.T @ (y - y.mean()))


def _sq_corr(a, b):
    a = a - a.mean()
    b = b - b.mean()
    denom = (a @ a) * (b @ b)
    if denom == 0:
        raise DegenerateProjection("slice projection has zero variance")
    return (a @ b) ** 2 / denom


def swar_weights_within(data: Dataset, scheme: SliceScheme) -> np.ndarray:
    """Within-slice mean influence weights.

    For observation ``i`` of slice ``h`` the influence is
    ``(n_h - 1)^2 (1 - cor^2(X b_h, X b_h(i)))`` with both projections taken
    over the slice rows other than ``i``. The weight of a slice is the
    reciprocal of its mean influence times ``1 / ||b_h||^2``; weights sum
    to one.
    """
    p = data.p
    H = scheme.H
    dbar = np.empty(H)
    norms2 = np.empty(H)
    for h in range(H):
        idx = scheme.members(h)
        m = idx.size
        if m <= p + 1:
            raise SliceTooSmall(h, int(m), p + 1)
        Xh, yh = data.X[idx], data.y[idx]
        _, b = numerics.ols_fit(Xh, yh)
        norms2[h] = b @ b
        if norms2[h] == 0:
            raise DegenerateProjection(f"slice {h} slope is zero")
        delta = np.empty(m)
        for j in range(m):
            Xr = np.delete(Xh, j, axis=0)
            bj = _centered_slope(Xr, np.delete(yh, j))
            delta[j] = (m - 1) ** 2 * (1.0 - _sq_corr(Xr @ b, Xr @ bj))
        dbar[h] = delta.mean()
    if np.any(dbar <= 1e-12 * (scheme.counts - 1) ** 2):
        warnings.warn(
            "within-slice influence vanished in a slice; using equal weights",
            DegenerateSliceWarning,
            stacklevel=2,
        )
        return np.full(H, 1.0 / H)
    w = 1.0 / (dbar * norms2)
    return w / w.sum()


def swar_w(data: Dataset, H: int, K: int, *, scheme=None) -> DirectionBasis:
    """SWAR with within-slice mean influence weights."""
    scheme = _scheme_for(data, H, scheme)
    weights = swar_weights_within(data, scheme)
    return swar(data, H, K, weights, method="swar_w", scheme=scheme)


def total_influence_weights(sif_values, scheme: SliceScheme, slopes) -> np.ndarray:
    """Slice weights ``1 / (|mean SIF| ||b_h||^2)`` normalized to sum to one."""
    H = scheme.H
    means = np.abs(np.array([sif_values[scheme.members(h)].mean() for h in range(H)]))
    if np.any(means < MIN_MEAN_INFLUENCE):
        warnings.warn(
            "slice mean influence below 1e-12 was floored",
            ZeroMeanInfluenceWarning,
            stacklevel=2,
        )
        means = np.maximum(means, MIN_MEAN_INFLUENCE)
    w = 1.0 / (means * np.einsum("hp,hp->h", slopes, slopes))
    return w / w.sum()


def swar_t(data: Dataset, H: int, K: int, *, scheme=None) -> DirectionBasis:
    """SWAR re-weighted once by the total mean influence of each slice.

    The first pass is plain SWAR; the sample influence of every observation
    on the subspace estimate is then averaged within slices and used to
    weight a second SWAR fit.
    """
    from .influence import sif_rho

    scheme = _scheme_for(data, H, scheme)
    base = swar(data, H, K, scheme=scheme)
    report = sif_rho(data, EstimatorConfig("swar", H, K), base=base, scheme=scheme)
    weights = total_influence_weights(report.values, scheme, base.slopes)
    return swar(data, H, K, weights, method="swar_t", scheme=scheme)


@dataclass
class Selection:
    """Outcome of :func:`select_h_k`.

    ``table`` maps every candidate ``(H, K)`` to its mean absolute sample
    influence, or ``None`` when the pair could not be fitted.
    """

    H: int
    K: int
    table: dict = field(default_factory=dict)


def select_h_k(data: Dataset, H_candidates, K_candidates, *, reslice=False) -> Selection:
    """Choose ``(H, K)`` for SWAR by minimum mean absolute sample influence.

    ``reslice`` is passed on to :func:`swar.influence.loo_directions`.
    """
    from .influence import loo_directions, rho_from_bases

    table = {}
    best = None
    for H in H_candidates:
        Ks = [K for K in K_candidates if K <= min(H, data.p)]
        for K in K_candidates:
            table[(H, K)] = None
        if not Ks or H > data.n - 1:
            continue
        Kmax = max(Ks)
        try:
            base = swar(data, H, Kmax)
            loo = loo_directions(data, EstimatorConfig("swar", H, Kmax), reslice=reslice)
        except NumericalInfeasibility:
            continue
        for K in Ks:
            values = rho_from_bases(base.directions[:, :K], loo[:, :, :K])
            score = float(np.mean(np.abs(values)))
            table[(H, K)] = score
            if best is None or score < best[0]:
                best = (score, H, K)
    if best is None:
        raise NoFeasiblePair("no candidate (H, K) pair can be fitted")
    return Selection(best[1], best[2], table)
