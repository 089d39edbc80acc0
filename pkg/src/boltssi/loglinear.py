"""Log-linear scoring of a three-way table.

Two models are compared on each ``I x J x K`` table: the saturated model
(fitted counts equal observed counts) and the homogeneous-association
model (all two-way terms, no three-way term), fitted by iterative
proportional fitting.  Log-likelihoods are reported as the Poisson kernel
``L(mu) = sum n log mu - sum mu``.  The screening increment is the drop
in that kernel when the three-way term is removed, ``L_S - L_H``, which
is the gap between the negative log-likelihoods ``l_H - l_S`` and is
never negative.  The test statistic is twice the increment (the G^2
deviance), referred to chi-square with ``(I-1)(J-1)(K-1)`` degrees of
freedom.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from . import _kernels
from .contingency import ContingencyTable3
from .exceptions import NotConverged
from .ingest import PairIndex

DEFAULT_IPF_TOL = 1e-8
DEFAULT_MAX_CYCLES = 100


@dataclass(frozen=True, eq=False)
class LogLinearFit:
    mu: np.ndarray
    loglik_kernel: float
    iterations: int
    converged: bool
    discrepancy: float = 0.0


@dataclass(frozen=True)
class PairScore:
    pair: Optional[PairIndex]
    increment: float
    statistic: float
    df: int
    ksa_bound: Optional[float] = None
    converged: bool = True


def _table_array(t, pseudo_count=0.0):
    if isinstance(t, ContingencyTable3):
        arr = t.as_float()
    else:
        arr = np.ascontiguousarray(t, dtype=np.float64)
    if pseudo_count:
        arr = arr + pseudo_count
    return arr


def _scratch(shape):
    I, J, K = shape
    return (np.empty((I, J, K)), np.empty((I, J)), np.empty((I, K)), np.empty((J, K)))


def saturated_loglik(t, pseudo_count=0.0):
    """Kernel at the saturated fit, ``sum n log n - sum n``."""
    return float(_kernels.saturated_kernel(_table_array(t, pseudo_count)))


def ipf_fit(t, tol=DEFAULT_IPF_TOL, max_cycles=DEFAULT_MAX_CYCLES, pseudo_count=0.0,
            strict=False, start=None):
    """Homogeneous-association fit by iterative proportional fitting.

    Starts from a uniform table (or the strictly positive ``start``) and
    cycles through the ``ab``, ``ac`` and ``bc`` margins until every
    fitted two-way margin is within ``tol`` of the observed one.  Cells
    in a zero observed margin are fitted as zero.  A fit that exhausts
    ``max_cycles`` is returned with ``converged=False``, or raises
    :class:`NotConverged` if ``strict``.
    """
    n = _table_array(t, pseudo_count)
    if n.sum() <= 0:
        raise ValueError("table is empty")
    mu, m_ab, m_ac, m_bc = _scratch(n.shape)
    if start is None:
        cycles, disc = _kernels.ipf(n, tol, max_cycles, mu, m_ab, m_ac, m_bc)
    else:
        start = np.asarray(start, dtype=np.float64)
        if start.shape != n.shape or not np.all(start > 0):
            raise ValueError("start must be a strictly positive table of the same shape")
        mu[...] = start
        cycles, disc = _kernels.ipf_from(n, tol, max_cycles, mu, m_ab, m_ac, m_bc)
    converged = disc <= tol
    if strict and not converged:
        raise NotConverged(f"IPF did not converge in {max_cycles} cycles", disc)
    return LogLinearFit(mu, float(_kernels.loglik_kernel(n, mu)), int(cycles),
                        bool(converged), float(disc))


def ksa_fit(t, pseudo_count=0.0):
    """Kirkwood superposition approximation to the homogeneous fit."""
    n = _table_array(t, pseudo_count)
    I, J, K = n.shape
    mu = np.empty_like(n)
    _kernels.ksa_fit(n, mu, np.empty((I, J)), np.empty((I, K)), np.empty((J, K)),
                     np.empty(I), np.empty(J), np.empty(K))
    return mu


def ksa_loglik(t, pseudo_count=0.0):
    """Kernel at the superposition estimate; never above the IPF optimum."""
    n = _table_array(t, pseudo_count)
    return float(_kernels.loglik_kernel(n, ksa_fit(n)))


def degrees_of_freedom(t):
    return int(_kernels.effective_df(_table_array(t)))


def score_pair(t, with_ksa=False, ipf_tol=DEFAULT_IPF_TOL, max_cycles=DEFAULT_MAX_CYCLES,
               pseudo_count=0.0, pair=None):
    """Likelihood increment of the three-way term for one table."""
    n = _table_array(t, pseudo_count)
    sat = _kernels.saturated_kernel(n)
    fit = ipf_fit(n, ipf_tol, max_cycles)
    inc = max(sat - fit.loglik_kernel, 0.0)
    bound = None
    if with_ksa:
        bound = max(sat - ksa_loglik(n), 0.0)
    return PairScore(
        pair=None if pair is None else PairIndex(*pair),
        increment=inc,
        statistic=2.0 * inc,
        df=degrees_of_freedom(t),
        ksa_bound=bound,
        converged=fit.converged,
    )


def chisq_critical(df, alpha):
    """Upper-tail chi-square quantile: ``P(X >= c) = alpha`` for ``X ~ chi2(df)``.

    Inverts the regularized upper incomplete gamma function.
    """
    df = np.asarray(df, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    if np.any(df < 1) or np.any(~np.isfinite(df)):
        raise ValueError(f"df must be >= 1, got {df}")
    if np.any((alpha <= 0) | (alpha >= 1)):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    out = 2.0 * special.gammainccinv(df / 2.0, alpha)
    return float(out) if out.ndim == 0 else out
