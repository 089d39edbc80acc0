"""Equal-frequency (quantile) discretization of predictors and response."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import BadResponse, DegenerateColumn
from .ingest import Family

MAX_ARITY = 16


@dataclass(frozen=True)
class DiscretizationSpec:
    """Arity settings.

    ``predictor_arity`` is either one integer for every column or a
    sequence with one entry per column.  A continuous response is always
    split in two at its median.
    """

    predictor_arity: object = 3
    response_arity: int = 2

    def __post_init__(self):
        ar = np.atleast_1d(np.asarray(self.predictor_arity))
        if ar.dtype.kind not in "iu" or np.any(ar < 2) or np.any(ar > MAX_ARITY):
            raise ValueError(
                f"predictor arity must be an integer in [2, {MAX_ARITY}], "
                f"got {self.predictor_arity!r}"
            )
        if self.response_arity != 2:
            raise ValueError("a continuous response is always split at its median (m=2)")

    def arity_for(self, p):
        ar = np.asarray(self.predictor_arity, dtype=np.int64)
        if ar.ndim == 0:
            return np.full(p, int(ar), dtype=np.int64)
        if ar.shape != (p,):
            raise ValueError(f"{ar.shape[0]} arities given for {p} columns")
        return ar.copy()


@dataclass(frozen=True, eq=False)
class DiscreteMatrix:
    """Level codes for every covariate plus the response classes.

    Attributes
    ----------
    codes : ndarray of uint8, shape (n, p)
        Level of each sample; ``codes[:, k] < arities[k]``.
    arities : ndarray of int64, shape (p,)
        Number of nonempty levels per column (after merging).
    response_codes : ndarray of uint8, shape (n,)
    response_arity : int
    cutpoints : list of ndarray
        Upper bounds of the lower levels for each column; ``x`` gets level
        ``k`` when ``cut[k-1] < x <= cut[k]``.
    """

    codes: np.ndarray
    arities: np.ndarray
    response_codes: np.ndarray
    response_arity: int
    cutpoints: tuple = ()

    @property
    def n(self):
        return self.codes.shape[0]

    @property
    def p(self):
        return self.codes.shape[1]

    @property
    def degenerate(self):
        """Mask of columns that collapsed to a single level."""
        return self.arities < 2


def quantile_cutpoints(col, arity):
    """Cutpoints ``c_k = x_(ceil(n k / l))`` for ``k = 1..l-1``.

    Duplicate cutpoints, and cutpoints at or above the column maximum,
    are dropped so that every resulting level is nonempty.
    """
    col = np.asarray(col, dtype=np.float64)
    n = col.shape[0]
    s = np.sort(col)
    k = np.arange(1, arity)
    # ceil(n*k/l) in exact integer arithmetic, then to 0-based
    ranks = -((-n * k) // arity) - 1
    cuts = np.unique(s[ranks])
    return cuts[cuts < s[-1]]


def apply_cutpoints(col, cuts):
    """Level = number of cutpoints strictly below the value."""
    return np.searchsorted(cuts, col, side="left").astype(np.uint8)


def discretize_column(col, arity):
    cuts = quantile_cutpoints(col, arity)
    return apply_cutpoints(col, cuts), cuts


def median_split(y):
    """``1`` where ``y`` exceeds its sample median, else ``0``."""
    y = np.asarray(y, dtype=np.float64)
    return (y > np.median(y)).astype(np.uint8)


def discretize_response(y, family):
    family = Family.parse(family)
    if family is Family.BINOMIAL:
        codes = np.asarray(y).astype(np.uint8)
    else:
        codes = median_split(y)
    m = int(np.unique(codes).size)
    if m < 2:
        raise BadResponse("response has a single class after discretization")
    return codes, m


def discretize(ds, spec=None, strict=False):
    """Bin every covariate at its empirical quantiles.

    Columns whose cutpoints all coincide end up with arity 1; they are
    flagged in :attr:`DiscreteMatrix.degenerate` and excluded from
    screening.  With ``strict=True`` such a column raises
    :class:`DegenerateColumn` instead.
    """
    spec = spec or DiscretizationSpec()
    n, p = ds.x.shape
    arity = spec.arity_for(p)
    codes = np.empty((n, p), dtype=np.uint8)
    arities = np.empty(p, dtype=np.int64)
    cutpoints = []
    for k in range(p):
        codes[:, k], cuts = discretize_column(ds.x[:, k], int(arity[k]))
        arities[k] = cuts.size + 1
        cutpoints.append(cuts)
        if strict and arities[k] < 2:
            raise DegenerateColumn(f"column {ds.column_names[k]!r} has a single level")
    ycodes, m = discretize_response(ds.y, ds.family)
    codes.setflags(write=False)
    return DiscreteMatrix(codes, arities, ycodes, m, tuple(cutpoints))


class QuantileDiscretizer(TransformerMixin, BaseEstimator):
    """Equal-frequency binning as a scikit-learn transformer.

    Cutpoints are learned in :meth:`fit` and reused by :meth:`transform`.

    Parameters
    ----------
    arity : int, default=3
        Target number of levels per column; fewer are produced when ties
        force cutpoints to merge.
    """

    def __init__(self, arity=3):
        self.arity = arity

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        DiscretizationSpec(self.arity)
        self.cutpoints_ = [quantile_cutpoints(X[:, k], self.arity) for k in range(X.shape[1])]
        self.n_levels_ = np.array([c.size + 1 for c in self.cutpoints_])
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "cutpoints_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        out = np.empty(X.shape, dtype=np.uint8)
        for k, cuts in enumerate(self.cutpoints_):
            out[:, k] = apply_cutpoints(X[:, k], cuts)
        return out
