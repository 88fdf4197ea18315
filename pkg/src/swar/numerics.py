"""Dense linear-algebra kernel shared by the estimators.

All functions are pure and operate on float64 numpy arrays.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .exceptions import (
    DegenerateProjection,
    DimensionMismatch,
    InsufficientData,
    NonFinite,
    NotOrthonormal,
    NotSymmetric,
    SingularCovariance,
)

#: Covariance matrices whose condition number exceeds this are treated as singular.
MAX_CONDITION = 1e12


class SymEigen(NamedTuple):
    """Eigenpairs of a symmetric matrix, largest eigenvalue first."""

    values: np.ndarray
    vectors: np.ndarray


def _as_matrix(X, name="X"):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFinite(f"{name} contains non-finite entries")
    return X


def _as_vector(y, n=None, name="y"):
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-dimensional, got shape {y.shape}")
    if n is not None and y.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {y.shape[0]}, expected {n}")
    if not np.all(np.isfinite(y)):
        raise NonFinite(f"{name} contains non-finite entries")
    return y


def sample_moments(X, y):
    """Sample means, covariance and predictor/response covariance.

    Uses the unbiased ``n - 1`` denominator.

    Returns
    -------
    mean : (p,) ndarray
    ymean : float
    cov : (p, p) ndarray
    cxy : (p,) ndarray
    """
    X = _as_matrix(X)
    n = X.shape[0]
    y = _as_vector(y, n)
    if n < 2:
        raise InsufficientData(f"need at least 2 observations, got {n}")
    mean = X.mean(axis=0)
    ymean = float(y.mean())
    Xc = X - mean
    yc = y - ymean
    cov = Xc.T @ Xc / (n - 1)
    cov = 0.5 * (cov + cov.T)
    cxy = Xc.T @ yc / (n - 1)
    return mean, ymean, cov, cxy


def fix_signs(vectors):
    """Flip columns so the entry of largest magnitude is positive.

    Entries within a relative 1e-10 of the column maximum count as ties, and
    ties go to the lowest index.
    """
    V = np.array(vectors, dtype=float, copy=True)
    if V.ndim == 1:
        return fix_signs(V[:, None])[:, 0]
    A = np.abs(V)
    top = A.max(axis=0)
    for j in range(V.shape[1]):
        if top[j] == 0:
            continue
        lead = np.flatnonzero(A[:, j] >= top[j] * (1 - 1e-10))[0]
        if V[lead, j] < 0:
            V[:, j] = -V[:, j]
    return V


def sym_eigen(A) -> SymEigen:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues come back in descending order; each eigenvector follows the
    :func:`fix_signs` convention so repeated fits are comparable. The LAPACK
    ``syevr`` driver is used; for repeated or zero eigenvalues the returned
    basis of the eigenspace is whatever that routine produces.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix contains non-finite entries")
    scale = np.abs(A).max() if A.size else 0.0
    if np.abs(A - A.T).max(initial=0.0) > 1e-10 * max(scale, 1e-300):
        raise NotSymmetric("matrix is not symmetric")
    values, vectors = scipy.linalg.eigh(0.5 * (A + A.T), driver="evr")
    values = values[::-1].copy()
    vectors = fix_signs(vectors[:, ::-1])
    return SymEigen(values, vectors)


def _check_condition(cov):
    ev = np.linalg.eigvalsh(cov)
    if ev[0] <= 0 or ev[-1] / ev[0] > MAX_CONDITION:
        raise SingularCovariance(
            "predictor covariance is singular or ill-conditioned "
            f"(eigenvalues {ev[0]:.3g} .. {ev[-1]:.3g})"
        )


def solve_spd(cov, rhs):
    """Solve ``cov @ x = rhs`` for a symmetric positive definite ``cov``.

    Raises :class:`SingularCovariance` when the condition number is above
    :data:`MAX_CONDITION`.
    """
    _check_condition(cov)
    factor = scipy.linalg.cho_factor(cov, lower=True, check_finite=False)
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def ols_fit(X, y):
    """Least-squares intercept and slope of ``y`` on the columns of ``X``.

    The slope solves ``cov(X) b = cov(X, y)``, so it does not depend on the
    covariance denominator.
    """
    X = _as_matrix(X)
    n, p = X.shape
    y = _as_vector(y, n)
    if n <= p:
        raise InsufficientData(f"{n} observations cannot identify {p} slopes")
    mean, ymean, cov, cxy = sample_moments(X, y)
    slope = solve_spd(cov, cxy)
    return ymean - slope @ mean, slope


def check_orthonormal(G, tol=1e-8, name="basis"):
    G = _as_matrix(G, name)
    K = G.shape[1]
    if np.abs(G.T @ G - np.eye(K)).max(initial=0.0) > tol:
        raise NotOrthonormal(f"{name} columns are not orthonormal")
    return G


def projection(G):
    """Orthogonal projection matrix ``G G^T`` onto the span of ``G``."""
    G = check_orthonormal(G)
    P = G @ G.T
    return 0.5 * (P + P.T)


def orthonormalize(B):
    """Orthonormal basis for the columns of ``B``, preserving column order."""
    Q, _ = np.linalg.qr(np.asarray(B, dtype=float))
    return fix_signs(Q)


def _score_basis(S, name):
    S = S - S.mean(axis=0)
    norms = np.linalg.norm(S, axis=0)
    if np.any(norms == 0):
        raise DegenerateProjection(f"{name} projection has a zero-variance column")
    Q, R = np.linalg.qr(S / norms)
    d = np.abs(np.diag(R))
    if d.min() <= 1e-12 * d.max():
        raise DegenerateProjection(f"{name} projection scores are linearly dependent")
    return Q


def squared_canonical_correlations(B_true, G_hat, X):
    """Squared sample canonical correlations between ``X B_true`` and ``X G_hat``.

    Returns ``min(K1, K2)`` values in ``[0, 1]``, largest first. For single
    columns this is the squared Pearson correlation of the two score vectors.
    """
    X = _as_matrix(X)
    B_true = _as_matrix(np.reshape(B_true, (X.shape[1], -1)), "B_true")
    G_hat = _as_matrix(np.reshape(G_hat, (X.shape[1], -1)), "G_hat")
    n = X.shape[0]
    K1, K2 = B_true.shape[1], G_hat.shape[1]
    if n <= K1 + K2:
        raise InsufficientData(f"{n} observations for {K1}+{K2} canonical variates")
    Qa = _score_basis(X @ B_true, "true")
    Qb = _score_basis(X @ G_hat, "estimated")
    s = np.linalg.svd(Qa.T @ Qb, compute_uv=False)
    return np.clip(s[: min(K1, K2)], 0.0, 1.0) ** 2


def benasseni_distance(G, G_eps):
    """Subspace similarity ``1 - mean_k ||(I - P_eps) g_k||``.

    Equals 1 when the spans coincide and 0 when they are orthogonal.
    """
    G = check_orthonormal(G, name="G")
    G_eps = check_orthonormal(G_eps, name="G_eps")
    if G.shape != G_eps.shape:
        raise DimensionMismatch(f"basis shapes differ: {G.shape} vs {G_eps.shape}")
    if np.array_equal(G, G_eps):
        return 1.0
    resid = G - G_eps @ (G_eps.T @ G)
    r = 1.0 - np.linalg.norm(resid, axis=0).mean()
    return float(min(1.0, max(0.0, r)))
