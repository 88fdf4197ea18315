"""Influence functions for SWAR.

Population-level influence functions and the asymptotic variance of the
leading direction are evaluated on a :class:`PopulationSpec`; sample-level
diagnostics come from leave-one-out refits (SIF) or from plugging sample
estimates into the population formula (EIF).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from . import numerics
from .estimators import DirectionBasis, EstimatorConfig, fit
from .exceptions import (
    DegenerateEigenvalue,
    InvalidParameters,
    LeaveOneOutInfeasible,
    MissingResidualMoments,
    NumericalInfeasibility,
    OutOfRange,
)
from .slicing import Dataset, assign_slices, slice_counts


@dataclass
class PopulationSpec:
    """Population quantities of a sliced regression.

    Slice ``h`` covers responses in ``[boundaries[h], boundaries[h + 1])``;
    the last slice is closed on the right.
    """

    mean: np.ndarray
    cov: np.ndarray
    boundaries: np.ndarray
    weights: np.ndarray
    slice_means: np.ndarray
    slice_ymeans: np.ndarray
    slice_covs: np.ndarray
    slopes: np.ndarray
    directions: np.ndarray
    eigenvalues: np.ndarray
    residual_moments: np.ndarray | None = None

    @property
    def H(self) -> int:
        return len(self.weights)

    @property
    def K(self) -> int:
        return self.directions.shape[1]

    def slice_of(self, y0: float) -> int:
        q = self.boundaries
        if not np.isfinite(y0) or y0 < q[0] or y0 > q[-1]:
            raise OutOfRange(f"response {y0} lies outside the slice range [{q[0]}, {q[-1]}]")
        h = int(np.searchsorted(q, y0, side="right")) - 1
        return min(h, self.H - 1)


@dataclass(frozen=True)
class ContaminantPoint:
    y: float
    x: np.ndarray


@dataclass
class InfluenceReport:
    """Per-observation influence values.

    ``values`` is ``(n,)`` for scalar measures and ``(n, p)`` for directions;
    ``slices`` gives the 0-based slice of each observation in the full fit.
    """

    values: np.ndarray
    slices: np.ndarray
    kind: str


def truncated_normal_moments(a, b):
    """Mass, mean and second moment of a standard normal restricted to ``[a, b]``."""
    if a > 0:
        mass = special.ndtr(-a) - special.ndtr(-b)
    else:
        mass = special.ndtr(b) - special.ndtr(a)
    pa, pb = stats.norm.pdf(a), stats.norm.pdf(b)
    apa = a * pa if np.isfinite(a) else 0.0
    bpb = b * pb if np.isfinite(b) else 0.0
    mean = (pa - pb) / mass
    second = 1.0 + (apa - bpb) / mass
    return mass, mean, second


def gaussian_linear_population(beta, sigma_eps, H, mean=None, cov=None) -> PopulationSpec:
    """Exact slice quantities for ``Y = beta^T X + sigma_eps * e``.

    ``X ~ N(mean, cov)`` (standard normal by default) and ``e ~ N(0, 1)``;
    the response range is cut into ``H`` equiprobable slices.
    """
    beta = np.asarray(beta, dtype=float)
    p = beta.shape[0]
    if not (sigma_eps > 0 and H >= 1 and np.any(beta != 0)):
        raise InvalidParameters("need sigma_eps > 0, H >= 1 and a nonzero beta")
    mu = np.zeros(p) if mean is None else np.asarray(mean, dtype=float)
    Sigma = np.eye(p) if cov is None else np.asarray(cov, dtype=float)
    if np.linalg.eigvalsh(Sigma)[0] <= 0:
        raise InvalidParameters("predictor covariance must be positive definite")

    Sb = Sigma @ beta
    my = beta @ mu
    s2 = beta @ Sb + sigma_eps**2
    s = np.sqrt(s2)
    coef = Sb / s2
    z = special.ndtri(np.arange(H + 1) / H)
    weights = np.full(H, 1.0 / H)
    means = np.empty((H, p))
    ymeans = np.empty(H)
    covs = np.empty((H, p, p))
    slopes = np.empty((H, p))
    resid = np.empty(H)
    for h in range(H):
        _, e1, e2 = truncated_normal_moments(z[h], z[h + 1])
        vy = s2 * (e2 - e1**2)
        ymeans[h] = my + s * e1
        means[h] = mu + coef * s * e1
        covs[h] = Sigma - np.outer(Sb, Sb) / s2 + vy * np.outer(coef, coef)
        cxy = vy * coef
        slopes[h] = np.linalg.solve(covs[h], cxy)
        resid[h] = vy - cxy @ slopes[h]
    R = slopes.T @ (weights[:, None] * slopes)
    eig = numerics.sym_eigen(0.5 * (R + R.T))
    return PopulationSpec(
        mean=mu,
        cov=Sigma,
        boundaries=my + s * z,
        weights=weights,
        slice_means=means,
        slice_ymeans=ymeans,
        slice_covs=covs,
        slopes=slopes,
        directions=eig.vectors[:, :1].copy(),
        eigenvalues=eig.values[:1].copy(),
        residual_moments=resid,
    )


def _as_point(w0):
    if isinstance(w0, ContaminantPoint):
        return float(w0.y), np.asarray(w0.x, dtype=float)
    y0, x0 = w0
    return float(y0), np.asarray(x0, dtype=float)


def _contaminant_terms(pop: PopulationSpec, w0):
    y0, x0 = _as_point(w0)
    h = pop.slice_of(y0)
    r = y0 - pop.slice_ymeans[h] - pop.slopes[h] @ (x0 - pop.slice_means[h])
    u = np.linalg.solve(pop.cov, x0 - pop.mean)
    G = pop.directions
    v = u - G @ (G.T @ u)
    return h, r, v


def population_if_gamma1(pop: PopulationSpec, w0) -> np.ndarray:
    """Influence of a contaminant ``(y0, x0)`` on the leading SWAR direction."""
    if pop.K != 1:
        raise InvalidParameters("the direction influence function is available for K=1 only")
    lam = pop.eigenvalues[0]
    if lam <= 0:
        raise DegenerateEigenvalue("leading eigenvalue must be positive")
    h, r, v = _contaminant_terms(pop, w0)
    g = pop.directions[:, 0]
    return (r / lam) * (pop.slopes[h] @ g) * v


def population_if_rho(pop: PopulationSpec, w0) -> float:
    """Influence of a contaminant on the subspace similarity measure (always <= 0)."""
    if np.any(pop.eigenvalues <= 0):
        raise DegenerateEigenvalue("all eigenvalues must be positive")
    h, r, v = _contaminant_terms(pop, w0)
    loads = np.abs(pop.directions.T @ pop.slopes[h]) / pop.eigenvalues
    return -abs(r) / pop.K * loads.sum() * np.linalg.norm(v)


def asv_gamma1(pop: PopulationSpec) -> np.ndarray:
    """Asymptotic covariance of ``sqrt(n)`` times the leading direction estimate."""
    if pop.residual_moments is None:
        raise MissingResidualMoments("slice residual second moments are required")
    if pop.K != 1:
        raise InvalidParameters("the asymptotic variance is available for K=1 only")
    g = pop.directions[:, 0]
    lam = pop.eigenvalues[0]
    if lam <= 0:
        raise DegenerateEigenvalue("leading eigenvalue must be positive")
    scale = np.sum(pop.weights * (pop.slopes @ g) ** 2 * pop.residual_moments) / lam**2
    Q = np.eye(len(g)) - np.outer(g, g)
    A = scale * Q @ np.linalg.solve(pop.cov, Q)
    return 0.5 * (A + A.T)


# ---------------------------------------------------------------------------
# sample influence


def _min_loo_slice(config: EstimatorConfig, p: int) -> int:
    if config.method == "sir":
        return 1
    if config.method == "swar_w":
        return p + 2
    return p + 1


def _check_loo_feasible(data: Dataset, config: EstimatorConfig, reslice: bool):
    n, H = data.n, (1 if config.method == "ols" else config.H)
    need = _min_loo_slice(config, data.p)
    if reslice:
        smallest = slice_counts(n - 1, H).min() if n - 1 >= H else 0
    else:
        smallest = slice_counts(n, H).min() - 1 if n >= H else 0
    if smallest < need:
        raise LeaveOneOutInfeasible(
            f"deleting an observation leaves a slice with {smallest} rows; "
            f"{config.method} needs {need} (n={n}, H={H}, p={data.p})"
        )


def _swar_loo_fast(data: Dataset, scheme, K: int) -> np.ndarray:
    # Exact deletion update of each slice's least-squares coefficients:
    # c_(j) = c - (A'A)^-1 a_j e_j / (1 - h_jj) with A = [1, X_h].
    n, p = data.n, data.p
    counts = scheme.counts
    slopes = np.empty((scheme.H, p))
    loo_slope = np.empty((n, p))
    for h in range(scheme.H):
        idx = scheme.members(h)
        A = np.column_stack([np.ones(idx.size), data.X[idx]])
        numerics._check_condition(A.T @ A)
        Minv = np.linalg.inv(A.T @ A)
        coef = Minv @ (A.T @ data.y[idx])
        resid = data.y[idx] - A @ coef
        AM = A @ Minv
        lev = np.einsum("ij,ij->i", AM, A)
        if np.any(1.0 - lev < 1e-10):
            bad = int(idx[np.argmax(lev)])
            raise LeaveOneOutInfeasible(f"deleting observation {bad} makes slice {h} singular")
        slopes[h] = coef[1:]
        loo_slope[idx] = coef[1:] - AM[:, 1:] * (resid / (1.0 - lev))[:, None]
    full = np.einsum("h,hi,hj->ij", counts.astype(float), slopes, slopes)
    own = scheme.assignment
    b = slopes[own]
    R = (
        full[None]
        - counts[own, None, None] * np.einsum("ni,nj->nij", b, b)
        + (counts[own] - 1)[:, None, None] * np.einsum("ni,nj->nij", loo_slope, loo_slope)
    ) / (n - 1)
    _, V = np.linalg.eigh(R)
    return V[:, :, ::-1][:, :, :K].copy()


def loo_directions(data: Dataset, config: EstimatorConfig, *, reslice=False, scheme=None) -> np.ndarray:
    """Direction estimates with each observation deleted in turn, shape ``(n, p, K)``.

    By default every other observation stays in the slice it occupies in the
    full data, so a deletion changes only its own slice. ``reslice=True``
    instead recomputes equal-count slices on each reduced dataset, which also
    moves one boundary observation between neighbouring slices per boundary.
    Column signs are arbitrary.
    """
    _check_loo_feasible(data, config, reslice)
    if config.method == "ols":
        reslice = True
    if not reslice and scheme is None:
        scheme = assign_slices(data.y, config.H)
    if not reslice and config.method == "swar":
        return _swar_loo_fast(data, scheme, config.K)
    out = np.empty((data.n, data.p, config.K))
    for i in range(data.n):
        try:
            sub = None if reslice else scheme.drop(i)
            out[i] = fit(data.drop(i), config, scheme=sub).directions
        except NumericalInfeasibility as exc:
            raise LeaveOneOutInfeasible(f"refit without observation {i} failed: {exc}") from exc
    return out


def rho_from_bases(G, loo_bases) -> np.ndarray:
    """``(n - 1) (r(G, G_(i)) - 1)`` for each leave-one-out basis."""
    n = len(loo_bases)
    return np.array([(n - 1) * (numerics.benasseni_distance(G, Gi) - 1.0) for Gi in loo_bases])


def _slices(data, config):
    if config.method == "ols":
        return np.zeros(data.n, dtype=int)
    return assign_slices(data.y, config.H).assignment


def sif_direction(
    data: Dataset, config: EstimatorConfig, k: int = 0, *, base=None, reslice=False
) -> InfluenceReport:
    """Sample influence ``(n - 1)(g_k - g_k(i))`` on the ``k``-th direction (0-based).

    Leave-one-out directions are sign-aligned with the full-data direction
    before differencing. See :func:`loo_directions` for ``reslice``.
    """
    base = fit(data, config) if base is None else base
    if not 0 <= k < base.K:
        raise InvalidParameters(f"direction index {k} out of range for K={base.K}")
    g = base.directions[:, k]
    gi = loo_directions(data, config, reslice=reslice)[:, :, k]
    gi = gi * np.where(gi @ g < 0, -1.0, 1.0)[:, None]
    values = (data.n - 1) * (g[None, :] - gi)
    return InfluenceReport(values, _slices(data, config), f"sif_direction_{k}")


def sif_rho(
    data: Dataset, config: EstimatorConfig, *, base=None, reslice=False, scheme=None
) -> InfluenceReport:
    """Sample influence of each observation on the subspace similarity."""
    base = fit(data, config, scheme=scheme) if base is None else base
    loo = loo_directions(data, config, reslice=reslice, scheme=scheme)
    values = rho_from_bases(base.directions, loo)
    slices = _slices(data, config) if scheme is None else scheme.assignment
    return InfluenceReport(values, slices, "sif_rho")


def eif_rho(data: Dataset, fitted: DirectionBasis) -> InfluenceReport:
    """Empirical influence on the subspace similarity, without refitting.

    Population quantities in the influence function are replaced by the
    full-data estimates. Non-default slice weights enter through the ratio
    of each weight to its slice proportion.
    """
    if fitted.slopes is None:
        raise InvalidParameters(f"{fitted.method} has no slice slopes; EIF needs a SWAR-type fit")
    lam = fitted.eigenvalues
    if np.any(lam <= 0):
        raise DegenerateEigenvalue("all fitted eigenvalues must be positive")
    scheme = assign_slices(data.y, fitted.H)
    mean, _, cov, _ = numerics.sample_moments(data.X, data.y)
    G = fitted.directions
    U = numerics.solve_spd(cov, (data.X - mean).T)
    V = U - G @ (G.T @ U)
    vnorm = np.linalg.norm(V, axis=0)

    resid = np.empty(data.n)
    for h in range(scheme.H):
        idx = scheme.members(h)
        Xh, yh = data.X[idx], data.y[idx]
        resid[idx] = yh - yh.mean() - (Xh - Xh.mean(axis=0)) @ fitted.slopes[h]
    loads = (np.abs(fitted.slopes @ G) / lam).sum(axis=1)
    proportions = scheme.counts / data.n
    ratio = np.ones(scheme.H) if fitted.weights is None else fitted.weights / proportions
    h_of = scheme.assignment
    values = -np.abs(resid) / fitted.K * (ratio * loads)[h_of] * vnorm
    return InfluenceReport(values, h_of, "eif_rho")
