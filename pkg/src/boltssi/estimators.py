"""scikit-learn wrapper around :func:`boltssi.screen.screen`."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .ingest import Dataset, Family
from .screen import ScreenConfig, screen


class InteractionScreener(TransformerMixin, BaseEstimator):
    """Screen all pairwise interactions and keep the selected products.

    Parameters
    ----------
    method : {'bolt', 'bolt-ksa', 'ssi'}, default='bolt'
    selection : str or rule, default='topd:auto'
        See :func:`boltssi.screen.parse_rule`.
    family : {'gaussian', 'binomial'}, default='gaussian'
    arity : int, default=3
        Levels per covariate for the bolt methods.
    ksa_gamma : float, str or None, default=None
        Pruning threshold for ``bolt-ksa``.
    threads : int, default=1
        ``0`` uses every CPU.

    Attributes
    ----------
    result_ : ScreenResult
    pairs_ : ndarray of shape (k, 2)
        Selected pairs, best first.
    scores_ : ndarray of shape (k,)
    """

    def __init__(self, method="bolt", selection="topd:auto", family="gaussian", arity=3,
                 ksa_gamma=None, threads=1):
        self.method = method
        self.selection = selection
        self.family = family
        self.arity = arity
        self.ksa_gamma = ksa_gamma
        self.threads = threads

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        ds = Dataset(X, y, Family.parse(self.family))
        cfg = ScreenConfig(method=self.method, selection=self.selection, arity=self.arity,
                           ksa_gamma=self.ksa_gamma, threads=self.threads)
        self.result_ = screen(ds, cfg)
        self.pairs_ = self.result_.selected_pairs
        idx = self.result_.order[self.result_.selected[self.result_.order]]
        self.scores_ = self.result_.score[idx]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Columns ``X[:, i] * X[:, j]`` for each selected pair."""
        check_is_fitted(self, "pairs_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X[:, self.pairs_[:, 0]] * X[:, self.pairs_[:, 1]]

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "pairs_")
        if input_features is None:
            input_features = [f"x{k}" for k in range(self.n_features_in_)]
        return np.array([f"{input_features[i]}*{input_features[j]}" for i, j in self.pairs_],
                        dtype=object)
