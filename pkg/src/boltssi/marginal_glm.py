"""Exact marginal GLM fits for one pair of predictors.

For a pair ``(i, j)`` two canonical-link GLMs are fitted by maximum
likelihood: one on ``(1, x_i, x_j)`` and one that adds ``x_i * x_j``.
The per-sample loss is ``l(theta, y) = b(theta) - theta * y`` with
``b(t) = t^2 / 2`` (gaussian, unit dispersion) or ``log(1 + e^t)``
(binomial).  The screening score is the drop in mean loss.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import Collinear, IndexOutOfRange
from .ingest import Family

MAX_IRLS_ITER = 50
BETA_CAP = 30.0


@dataclass(frozen=True, eq=False)
class MarginalFit:
    beta: np.ndarray
    neg_loglik: float
    iterations: int
    converged: bool
    separated: bool = False


def design(x, i, j, with_interaction):
    xi = x[:, i]
    xj = x[:, j]
    cols = [np.ones_like(xi), xi, xj]
    if with_interaction:
        cols.append(xi * xj)
    return np.column_stack(cols)


def _gaussian_fit(X, y):
    G = X.T @ X
    try:
        Lc = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise Collinear("normal matrix is not positive definite") from None
    if np.min(np.diag(Lc)) ** 2 <= 1e-12 * np.max(np.diag(G)):
        raise Collinear("normal matrix is numerically singular")
    beta = np.linalg.solve(Lc.T, np.linalg.solve(Lc, X.T @ y))
    theta = X @ beta
    nll = float(np.mean(theta * theta / 2.0 - theta * y))
    return MarginalFit(beta, nll, 1, True)


def _logistic_fit(X, y, start=None):
    n, k = X.shape
    beta = np.zeros(k) if start is None else np.array(start, dtype=np.float64)
    if start is None:
        ybar = min(max(y.mean(), 1e-12), 1 - 1e-12)
        beta[0] = math.log(ybar / (1 - ybar))
    X = np.ascontiguousarray(X)
    nll, it, status = _kernels.irls_logistic(
        X, y, k, beta, MAX_IRLS_ITER, BETA_CAP,
        np.empty(n), np.empty((k, k)), np.empty(k), np.empty((k, k)), np.empty(k), np.empty(k),
    )
    if status == 3:
        raise Collinear("information matrix is numerically singular")
    return MarginalFit(beta, float(nll), int(it), status == 0, status == 2)


def fit_marginal(ds, pair, with_interaction=True, start=None):
    """Maximum-likelihood fit of the marginal model for ``pair``.

    Gaussian fits solve the normal equations; binomial fits run IRLS with
    step-halving, capped at 50 iterations.  Logistic coefficients are
    held to ``|beta| <= 30``; a fit that hits the cap is flagged
    ``separated`` and ``converged=False``.

    Raises
    ------
    Collinear
        The design columns are linearly dependent to working precision.
    """
    i, j = pair
    if not (0 <= i < ds.p and 0 <= j < ds.p) or i == j:
        raise IndexOutOfRange(f"invalid pair ({i}, {j}) for p={ds.p}")
    X = design(ds.x, i, j, with_interaction)
    if ds.family is Family.GAUSSIAN:
        return _gaussian_fit(X, ds.y)
    if start is not None and len(start) < X.shape[1]:
        start = np.append(start, np.zeros(X.shape[1] - len(start)))
    return _logistic_fit(X, ds.y, start)


def ssi_score(ds, pair):
    """Drop in mean marginal loss from adding the pair's product term.

    Returns ``nan`` when either fit is collinear, so callers can skip the
    pair without aborting a sweep.
    """
    try:
        fit3 = fit_marginal(ds, pair, with_interaction=False)
        start = fit3.beta if ds.family is Family.BINOMIAL else None
        fit4 = fit_marginal(ds, pair, with_interaction=True, start=start)
    except Collinear:
        return math.nan
    return max(fit3.neg_loglik - fit4.neg_loglik, 0.0)
