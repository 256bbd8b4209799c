"""scikit-learn wrappers over the path-level tools.

Each estimator takes a path matrix ``X`` (one row per path, one column per
grid time) so they compose in a :class:`~sklearn.pipeline.Pipeline`.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_paths
from .brownian import PathEnsemble, holder_sup_ratio, refine_bridge, transform
from .kc_bounds import kolmogorov_ratio_matrix


def _times(times, n_cols):
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.shape[0] != n_cols:
        raise ValueError(f"times must list {n_cols} grid points")
    return t


class KolmogorovConditionEstimator(BaseEstimator):
    """Estimate ``M`` in ``E|X_s - X_t|^p <= M |s - t|^q`` from sample paths."""

    def __init__(self, times=None, p=4.0, q=2.0):
        self.times = times
        self.p = p
        self.q = q

    def fit(self, X, y=None):
        X = check_paths(X)
        t = _times(self.times, X.shape[1])
        self.ratio_matrix_ = kolmogorov_ratio_matrix(PathEnsemble(t, X), self.p, self.q)
        self.M_ = float(self.ratio_matrix_.max())
        self.n_features_in_ = X.shape[1]
        return self


class HolderRatioTransformer(BaseEstimator, TransformerMixin):
    """Map each path to its Hoelder sup-ratio at exponent ``beta``."""

    def __init__(self, times=None, beta=0.45, window=math.inf):
        self.times = times
        self.beta = beta
        self.window = window

    def fit(self, X, y=None):
        X = check_paths(X)
        self.times_ = _times(self.times, X.shape[1])
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_paths(X, n_times=self.n_features_in_)
        return holder_sup_ratio(self.times_, X, self.beta, self.window)[:, None]


class InvarianceTransformer(BaseEstimator, TransformerMixin):
    """Apply a path transform (``Scaling``, ``Shift``, ``Inversion``, ``DriftRatio``)."""

    def __init__(self, times=None, spec=None):
        self.times = times
        self.spec = spec

    def fit(self, X, y=None):
        X = check_paths(X)
        t = _times(self.times, X.shape[1])
        self.times_out_ = transform(PathEnsemble(t, X[:1]), self.spec).times
        self.times_ = t
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_paths(X, n_times=self.n_features_in_)
        return transform(PathEnsemble(self.times_, X), self.spec).paths


class BridgeRefiner(BaseEstimator, TransformerMixin):
    """Refine dyadic paths by Brownian-bridge midpoints; row ``i`` is path ``start + i``."""

    def __init__(self, level=0, target_level=1, horizon=1.0, seed=0, start=0):
        self.level = level
        self.target_level = target_level
        self.horizon = horizon
        self.seed = seed
        self.start = start

    def fit(self, X, y=None):
        X = check_paths(X, n_times=2**self.level + 1)
        self.n_features_in_ = X.shape[1]
        self.times_ = self.horizon * (np.arange(2**self.target_level + 1) / 2.0**self.target_level)
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_paths(X, n_times=self.n_features_in_)
        coarse = self.horizon * (np.arange(X.shape[1]) / 2.0**self.level)
        ens = PathEnsemble(coarse, X, start=self.start, level=self.level, horizon=self.horizon)
        return refine_bridge(ens, self.target_level, self.seed).paths
