"""Simulation designs with planted interactions, and screening metrics."""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .ingest import Dataset, Family, PairIndex

MAIN_EFFECTS = tuple(range(1, 11))


class Heredity(str, enum.Enum):
    STRONG = "strong"
    WEAK = "weak"
    ANTI = "anti"
    MIXED = "mixed"


# interaction sets as published, 1-indexed
INTERACTIONS = {
    Heredity.STRONG: ((1, 2), (1, 3), (2, 3), (2, 5), (3, 4), (6, 8), (6, 10), (7, 8), (7, 9), (9, 10)),
    Heredity.WEAK: ((1, 2), (1, 13), (2, 3), (2, 15), (3, 4), (6, 10), (6, 18), (7, 9), (7, 18), (10, 19)),
    Heredity.ANTI: ((11, 12), (11, 13), (12, 13), (12, 15), (13, 14), (16, 18), (16, 20), (17, 18),
                    (17, 19), (19, 20)),
    Heredity.MIXED: ((1, 2), (1, 3), (2, 3), (2, 15), (6, 18), (7, 18), (16, 20), (17, 18), (17, 19),
                     (19, 20)),
}

EXAMPLES = {
    1: (Family.GAUSSIAN, Heredity.STRONG),
    2: (Family.GAUSSIAN, Heredity.WEAK),
    3: (Family.GAUSSIAN, Heredity.ANTI),
    4: (Family.GAUSSIAN, Heredity.MIXED),
    5: (Family.BINOMIAL, Heredity.STRONG),
    6: (Family.BINOMIAL, Heredity.WEAK),
    7: (Family.BINOMIAL, Heredity.ANTI),
    8: (Family.BINOMIAL, Heredity.MIXED),
}


@dataclass(frozen=True)
class SimDesign:
    """One simulation setting.

    Covariates are AR(1) Gaussian with unit marginal variance and lag-k
    correlation ``rho**k``.  Main effects 1..10 have coefficient 1; the
    ten interactions of ``heredity`` have coefficient 2 (gaussian) or
    ``beta_inter`` (binomial).  Gaussian noise has sd ``sigma``.
    """

    n: int = 500
    p: int = 500
    rho: float = 0.5
    family: Family = Family.GAUSSIAN
    heredity: Heredity = Heredity.STRONG
    sigma: float = 2.0
    beta_inter: float = 2.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "heredity", Heredity(self.heredity))
        if not 0 <= self.rho < 1:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if self.p < max(max(t) for t in INTERACTIONS[self.heredity]):
            raise ValueError(f"p={self.p} is smaller than the largest planted index")
        if self.n < 4:
            raise ValueError("n must be >= 4")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    @classmethod
    def from_example(cls, example, **kwargs):
        if example not in EXAMPLES:
            raise ValueError(f"example must be one of 1..8, got {example}")
        family, heredity = EXAMPLES[example]
        return cls(family=family, heredity=heredity, **kwargs)

    @property
    def main_set(self):
        return tuple(k - 1 for k in MAIN_EFFECTS)

    @property
    def inter_set(self):
        """Planted pairs as 0-indexed :class:`PairIndex` tuples."""
        return tuple(PairIndex(a - 1, b - 1) for a, b in INTERACTIONS[self.heredity])

    @property
    def inter_coef(self):
        return 2.0 if self.family is Family.GAUSSIAN else float(self.beta_inter)


def ar1_covariates(n, p, rho, rng):
    """Rows from N(0, S) with ``S[j, k] = rho**|j-k|`` via the stationary recursion."""
    z = rng.standard_normal((n, p))
    x = np.empty((n, p))
    x[:, 0] = z[:, 0]
    c = math.sqrt(1.0 - rho * rho)
    for k in range(1, p):
        x[:, k] = rho * x[:, k - 1] + c * z[:, k]
    return x


def linear_predictor(design, x):
    eta = x[:, list(design.main_set)].sum(axis=1)
    b = design.inter_coef
    for i, j in design.inter_set:
        eta = eta + b * x[:, i] * x[:, j]
    return eta


def generate(design, rng=None):
    """Draw one dataset; returns ``(Dataset, truth)`` with ``truth`` the
    set of planted 0-indexed pairs."""
    if rng is None:
        rng = np.random.default_rng(design.seed)
    x = ar1_covariates(design.n, design.p, design.rho, rng)
    eta = linear_predictor(design, x)
    if design.family is Family.GAUSSIAN:
        y = eta + design.sigma * rng.standard_normal(design.n)
    else:
        prob = 1.0 / (1.0 + np.exp(-eta))
        y = (rng.random(design.n) < prob).astype(np.float64)
    names = [f"X{k + 1}" for k in range(design.p)]
    return Dataset(x, y, design.family, names), set(design.inter_set)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RepMetrics:
    coverage: float
    model_size: int
    r2_out: Optional[float] = None
    pmr: Optional[float] = None
    wall_time: float = 0.0


@dataclass(frozen=True)
class SimMetrics:
    acr: float
    ams: float
    reps: int
    se: dict = field(default_factory=dict)
    r2_out: Optional[float] = None
    pmr: Optional[float] = None


def out_of_sample_r2(y_true, y_pred):
    """Percentage of test-set variance explained."""
    y_true = np.asarray(y_true, dtype=np.float64)
    resid = np.sum((y_true - np.asarray(y_pred)) ** 2)
    total = np.sum((y_true - y_true.mean()) ** 2)
    return 100.0 * (1.0 - resid / total)


def misclassification_rate(y_true, y_pred):
    """Percentage of test labels predicted wrongly."""
    return 100.0 * float(np.mean(np.asarray(y_true) != np.asarray(y_pred)))


def evaluate_rep(selected, truth, wall_time=0.0, r2_out=None, pmr=None):
    """Coverage and size for one replication.

    ``selected`` is a :class:`~boltssi.screen.ScreenResult` or any
    iterable of ``(i, j)`` pairs.
    """
    if hasattr(selected, "selected_set"):
        selected = selected.selected_set()
    sel = {(int(a), int(b)) for a, b in selected}
    truth = {(int(a), int(b)) for a, b in truth}
    cov = len(sel & truth) / len(truth) if truth else 1.0
    return RepMetrics(cov, len(sel), r2_out, pmr, wall_time)


def _mean_se(values):
    v = np.asarray(values, dtype=np.float64)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def aggregate(reps: Sequence[RepMetrics]):
    acr, acr_se = _mean_se([r.coverage for r in reps])
    ams, ams_se = _mean_se([r.model_size for r in reps])
    se = {"acr": acr_se, "ams": ams_se}
    r2 = pmr = None
    if all(r.r2_out is not None for r in reps):
        r2, se["r2_out"] = _mean_se([r.r2_out for r in reps])
    if all(r.pmr is not None for r in reps):
        pmr, se["pmr"] = _mean_se([r.pmr for r in reps])
    return SimMetrics(acr, ams, len(reps), se, r2, pmr)


def evaluate(results, truth):
    """Aggregate metrics over one result or a list of results.

    ``truth`` is one planted set shared by all results, or a list with
    one set per result.
    """
    if not isinstance(results, (list, tuple)):
        results = [results]
    truths = truth if isinstance(truth, (list, tuple)) else [truth] * len(results)
    return aggregate([evaluate_rep(r, t) for r, t in zip(results, truths)])


Predictor = Callable[[Dataset, np.ndarray, np.ndarray], np.ndarray]


def run_replication(design, cfg, seed, predictor: Optional[Predictor] = None, train_frac=0.75):
    """Generate, screen and score one replication.

    With a ``predictor`` the data are split into train/test; screening
    runs on the training part and ``predictor(train, selected_pairs,
    x_test)`` supplies test predictions for R^2 or misclassification.
    """
    from .screen import screen

    rng = np.random.default_rng(seed)
    ds, truth = generate(design, rng)
    if predictor is None:
        res = screen(ds, cfg)
        return evaluate_rep(res, truth, res.wall_time)
    n_train = int(round(train_frac * ds.n))
    train = Dataset(ds.x[:n_train], ds.y[:n_train], ds.family, ds.column_names)
    x_test, y_test = ds.x[n_train:], ds.y[n_train:]
    res = screen(train, cfg)
    y_pred = predictor(train, res.selected_pairs, x_test)
    if ds.family is Family.GAUSSIAN:
        return evaluate_rep(res, truth, res.wall_time, r2_out=out_of_sample_r2(y_test, y_pred))
    return evaluate_rep(res, truth, res.wall_time, pmr=misclassification_rate(y_test, y_pred))


def run_simulation(design, cfg, reps, predictor=None, workers=1):
    """Run ``reps`` replications with seeds spawned from ``design.seed``.

    Returns ``(SimMetrics, [RepMetrics, ...])``; per-replication results
    are in seed order whatever ``workers`` is.
    """
    seeds = np.random.SeedSequence(design.seed).spawn(reps)
    if workers <= 1:
        per_rep = [run_replication(design, cfg, s, predictor) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(lambda s: run_replication(design, cfg, s, predictor), seeds))
    return aggregate(per_rep), per_rep
