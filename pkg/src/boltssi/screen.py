"""The all-pairs sweep and the selection rules applied to its scores."""

import enum
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np

from . import _kernels
from .bitmat import build_bitmatrix
from .discretize import DiscretizationSpec, discretize
from .ingest import Family, PairIndex, n_pairs, pair_arrays
from .loglinear import DEFAULT_IPF_TOL, DEFAULT_MAX_CYCLES, chisq_critical
from .marginal_glm import BETA_CAP, MAX_IRLS_ITER

log = logging.getLogger(__name__)

SCORED = _kernels.SCORED
PRUNED = _kernels.PRUNED
SKIP_DEGENERATE = _kernels.SKIP_DEGENERATE
SKIP_COLLINEAR = _kernels.SKIP_COLLINEAR
STATUS_REASON = {
    SCORED: "",
    PRUNED: "ksa",
    SKIP_DEGENERATE: "degenerate",
    SKIP_COLLINEAR: "collinear",
}


class Method(str, enum.Enum):
    SSI = "ssi"
    BOLT = "bolt"
    BOLT_KSA = "bolt-ksa"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"boltssi": "bolt", "bolt_ssi": "bolt", "boltssiksa": "bolt-ksa",
                   "bolt_ksa": "bolt-ksa"}
        v = str(value).lower()
        return cls(aliases.get(v, v))


# ---------------------------------------------------------------------------
# selection rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TopD:
    """Keep the ``d`` largest scores.

    ``d`` may be an integer, ``"auto"`` (``n - 1`` for SSI, ``max(n, p)``
    otherwise), ``"max"`` for ``max(n, p)`` or ``"nlogn"`` for
    ``floor(n / log n)``.
    """

    d: Union[int, str] = "auto"

    def resolve(self, n, p, method=Method.BOLT):
        d = self.d
        if d == "auto":
            d = n - 1 if Method.parse(method) is Method.SSI else max(n, p)
        elif d == "max":
            d = max(n, p)
        elif d == "nlogn":
            d = int(math.floor(n / math.log(n)))
        d = int(d)
        if d < 1:
            raise ValueError(f"top-d needs d >= 1, got {d}")
        return d


@dataclass(frozen=True)
class Threshold:
    """Keep scores ``>= gamma``."""

    gamma: float

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"threshold must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class BonferroniAlpha:
    """Keep pairs whose statistic reaches the chi-square critical value at
    level ``alpha / (p (p - 1) / 2)``, using each pair's own df."""

    alpha: float = 0.05

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    def critical(self, df, p):
        return chisq_critical(df, self.alpha / n_pairs(p))


SelectionRule = Union[TopD, Threshold, BonferroniAlpha]


def parse_rule(text):
    """Parse ``topd:<d|auto|max|nlogn>``, ``threshold:<gamma>`` or
    ``bonferroni:<alpha>``."""
    if not isinstance(text, str):
        return text
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    arg = arg.strip()
    if kind == "topd":
        arg = arg or "auto"
        return TopD(arg if arg in ("auto", "max", "nlogn") else int(arg))
    if kind == "threshold":
        return Threshold(float(arg))
    if kind == "bonferroni":
        return BonferroniAlpha(float(arg) if arg else 0.05)
    raise ValueError(f"unknown selection rule {text!r}")


def select(scores, rule, n, p, statistic=None, df=None, method=Method.BOLT):
    """Boolean selection flags for ``scores`` under ``rule``.

    ``scores`` are assumed to be in lexicographic pair order; ties in the
    top-d rule go to the earlier pair.  NaN scores (skipped or pruned
    pairs) are never selected.
    """
    scores = np.asarray(scores, dtype=np.float64)
    valid = ~np.isnan(scores)
    flags = np.zeros(scores.shape, dtype=bool)
    if isinstance(rule, TopD):
        d = rule.resolve(n, p, method)
        idx = np.flatnonzero(valid)
        order = idx[np.lexsort((idx, -scores[idx]))]
        flags[order[:d]] = True
    elif isinstance(rule, Threshold):
        flags[valid] = scores[valid] >= rule.gamma
    elif isinstance(rule, BonferroniAlpha):
        if statistic is None or df is None:
            raise ValueError("Bonferroni selection needs statistics and df")
        statistic = np.asarray(statistic, dtype=np.float64)
        df = np.asarray(df)
        ok = valid & (df >= 1)
        crit = np.full(scores.shape, np.inf)
        if ok.any():
            crit[ok] = rule.critical(df[ok], p)
        flags[ok] = statistic[ok] >= crit[ok]
    else:
        raise TypeError(f"unknown selection rule {rule!r}")
    return flags


# ---------------------------------------------------------------------------
# configuration and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScreenConfig:
    """Sweep settings.

    ``ksa_gamma`` is the pruning threshold on the deviance scale (a float
    or a :class:`BonferroniAlpha`); it only applies to ``bolt-ksa`` and
    defaults to Bonferroni at 0.05 there.  ``threads=0`` uses every
    available CPU.  ``debug_rescore_pruned`` also fits the pairs that KSA
    pruned, so the bound can be audited.
    """

    method: Method = Method.BOLT
    selection: Optional[SelectionRule] = None
    ksa_gamma: Optional[Union[float, BonferroniAlpha]] = None
    arity: object = 3
    threads: int = 1
    ipf_tol: float = DEFAULT_IPF_TOL
    max_cycles: int = DEFAULT_MAX_CYCLES
    pseudo_count: float = 0.0
    debug_rescore_pruned: bool = False
    chunk_size: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        object.__setattr__(self, "selection", parse_rule(self.selection) if self.selection is not None
                           else TopD("auto"))
        if isinstance(self.ksa_gamma, str):
            object.__setattr__(self, "ksa_gamma", parse_ksa_gamma(self.ksa_gamma))
        if isinstance(self.ksa_gamma, (int, float)) and not self.ksa_gamma >= 0:
            raise ValueError("ksa_gamma must be >= 0")
        if self.threads < 0:
            raise ValueError("threads must be >= 0")
        if self.ipf_tol <= 0 or self.max_cycles < 1:
            raise ValueError("ipf_tol must be > 0 and max_cycles >= 1")
        if self.pseudo_count < 0:
            raise ValueError("pseudo_count must be >= 0")


def parse_ksa_gamma(text):
    text = text.strip().lower()
    if text.startswith("bonferroni"):
        _, _, arg = text.partition(":")
        return BonferroniAlpha(float(arg) if arg else 0.05)
    return float(text)


class RankedPair(NamedTuple):
    rank: int
    pair: PairIndex
    score: float
    statistic: float
    df: int
    selected: bool


@dataclass(eq=False)
class ScreenResult:
    """Scores for every pair, in lexicographic pair order, plus a ranking.

    ``order`` lists indices of scored pairs by score descending with ties
    broken lexicographically; ``ranked`` materializes it as records.
    """

    method: Method
    n: int
    p: int
    i: np.ndarray
    j: np.ndarray
    score: np.ndarray
    statistic: np.ndarray
    df: np.ndarray
    status: np.ndarray
    selected: np.ndarray
    converged: np.ndarray
    order: np.ndarray
    ksa_bound: Optional[np.ndarray] = None
    pruned_statistic: Optional[np.ndarray] = None
    wall_time: float = 0.0
    column_names: tuple = ()
    config: Optional[ScreenConfig] = field(default=None, repr=False)

    @property
    def n_evaluated(self):
        return int(np.count_nonzero(self.status == SCORED))

    @property
    def n_pruned_by_ksa(self):
        return int(np.count_nonzero(self.status == PRUNED))

    @property
    def n_skipped(self):
        return int(np.count_nonzero(self.status >= SKIP_DEGENERATE))

    @property
    def n_selected(self):
        return int(np.count_nonzero(self.selected))

    @property
    def n_pairs(self):
        return self.i.shape[0]

    def ranked(self, limit=None):
        idx = self.order if limit is None else self.order[:limit]
        return [
            RankedPair(r + 1, PairIndex(int(self.i[t]), int(self.j[t])), float(self.score[t]),
                       float(self.statistic[t]), int(self.df[t]), bool(self.selected[t]))
            for r, t in enumerate(idx)
        ]

    @property
    def selected_pairs(self):
        """``(k, 2)`` array of selected pairs in rank order."""
        idx = self.order[self.selected[self.order]]
        return np.column_stack([self.i[idx], self.j[idx]])

    def selected_set(self):
        return {(int(a), int(b)) for a, b in self.selected_pairs}


# ---------------------------------------------------------------------------
# the sweep
# ---------------------------------------------------------------------------


def resolve_threads(threads):
    if threads == 0:
        return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
    return int(threads)


def _chunks(q, threads, chunk_size):
    if chunk_size is None:
        chunk_size = max(2048, -(-q // (threads * 8)))
    return [(s, min(s + chunk_size, q)) for s in range(0, q, chunk_size)]


def _run_chunks(fn, q, threads, chunk_size):
    chunks = _chunks(q, threads, chunk_size)
    if threads <= 1 or len(chunks) == 1:
        for s, e in chunks:
            fn(s, e)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for fut in [pool.submit(fn, s, e) for s, e in chunks]:
            fut.result()


def _gamma_by_df(cfg, p, max_df):
    g = cfg.ksa_gamma
    if cfg.method is not Method.BOLT_KSA:
        return np.zeros(max_df + 1)
    if g is None:
        g = BonferroniAlpha(0.05)
    if isinstance(g, BonferroniAlpha):
        out = np.zeros(max_df + 1)
        out[1:] = g.critical(np.arange(1, max_df + 1), p)
        return out
    return np.full(max_df + 1, float(g))


def _sweep_bolt(ds, cfg, ii, jj, out):
    dm = discretize(ds, DiscretizationSpec(cfg.arity))
    bm = build_bitmatrix(dm)
    lmax = int(bm.arities.max())
    gamma = _gamma_by_df(cfg, ds.p, (lmax - 1) ** 2 * (bm.m - 1))
    with_ksa = cfg.method is Method.BOLT_KSA

    def run(s, e):
        _kernels.bolt_chunk(bm.words, bm.row_offset, bm.arities, bm.word_offset, bm.m,
                            ii, jj, s, e, with_ksa, gamma, cfg.ipf_tol, cfg.max_cycles,
                            float(cfg.pseudo_count), cfg.debug_rescore_pruned,
                            out["score"], out["df"], out["ksa"], out["status"], out["conv"],
                            out["pruned"])

    return run


def _sweep_ssi(ds, cfg, ii, jj, out):
    xt = np.ascontiguousarray(ds.x.T)
    y = np.ascontiguousarray(ds.y)
    out["df"][:] = 1
    if ds.family is Family.GAUSSIAN:
        out["conv"][:] = True

        def run(s, e):
            _kernels.ssi_gaussian_chunk(xt, y, ii, jj, s, e, out["score"], out["status"])
    else:
        ybar = min(max(float(y.mean()), 1e-12), 1 - 1e-12)
        b0 = math.log(ybar / (1 - ybar))

        def run(s, e):
            _kernels.ssi_logistic_chunk(xt, y, b0, ii, jj, s, e, MAX_IRLS_ITER, BETA_CAP,
                                        out["score"], out["status"], out["conv"])
    return run


def screen(ds, cfg=None, **kwargs):
    """Score every pair of columns of ``ds`` and apply the selection rule.

    Keyword arguments build a :class:`ScreenConfig` when ``cfg`` is not
    given.  The output depends only on the data and configuration, never
    on the thread count.
    """
    cfg = cfg or ScreenConfig(**kwargs)
    threads = resolve_threads(cfg.threads)
    t0 = time.perf_counter()
    ii, jj = pair_arrays(ds.p)
    q = ii.shape[0]
    out = {
        "score": np.full(q, np.nan),
        "df": np.zeros(q, dtype=np.int64),
        "ksa": np.full(q, np.nan),
        "status": np.zeros(q, dtype=np.int8),
        "conv": np.zeros(q, dtype=np.bool_),
        "pruned": np.full(q, np.nan),
    }
    if cfg.method is Method.SSI:
        run = _sweep_ssi(ds, cfg, ii, jj, out)
    else:
        run = _sweep_bolt(ds, cfg, ii, jj, out)
    _run_chunks(run, q, threads, cfg.chunk_size)

    score = out["score"]
    scored = out["status"] == SCORED
    if cfg.method is Method.SSI:
        statistic = 2.0 * ds.n * score
    else:
        statistic = 2.0 * score
    flags = select(score, cfg.selection, ds.n, ds.p, statistic=statistic, df=out["df"],
                   method=cfg.method)
    idx = np.flatnonzero(scored)
    order = idx[np.lexsort((idx, -score[idx]))]
    n_noconv = int(np.count_nonzero(scored & ~out["conv"]))
    if n_noconv:
        log.warning("%d pair fits did not converge", n_noconv)
    return ScreenResult(
        method=cfg.method,
        n=ds.n,
        p=ds.p,
        i=ii,
        j=jj,
        score=score,
        statistic=statistic,
        df=out["df"],
        status=out["status"],
        selected=flags,
        converged=out["conv"],
        order=order,
        ksa_bound=out["ksa"] if cfg.method is Method.BOLT_KSA else None,
        pruned_statistic=out["pruned"] if cfg.debug_rescore_pruned else None,
        wall_time=time.perf_counter() - t0,
        column_names=tuple(ds.column_names),
        config=cfg,
    )
