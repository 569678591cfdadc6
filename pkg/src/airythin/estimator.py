"""scikit-learn style wrapper that maps (X, T) rows to tau-function features."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_nodes, check_precision, check_xt
from .ckdv import evaluate
from .kernels import as_points
from .thinning import parse_sigma

__all__ = ["JanossyTransformer"]


class JanossyTransformer(TransformerMixin, BaseEstimator):
    """Transform rows (X, T) into [J, log_J, V] for a fixed sigma and nu.

    Parameters
    ----------
    sigma : str, dict or SigmaModel
        Thinning model, in the mini-language accepted by ``parse_sigma``.
    nu : sequence of float
        Conditioning points of the Janossy density.
    nodes : int
        Quadrature node count.
    precision : {"double", "high"}
    """

    _columns = ("J", "log_J", "V")

    def __init__(self, sigma="fermi", nu=(), nodes=200, precision="double"):
        self.sigma = sigma
        self.nu = nu
        self.nodes = nodes
        self.precision = precision

    def fit(self, XT=None, y=None):
        self.sigma_ = parse_sigma(self.sigma)
        self.nu_ = as_points(self.nu)
        self.nodes_ = check_nodes(self.nodes)
        self.precision_ = check_precision(self.precision)
        self.n_features_in_ = 2
        return self

    def transform(self, XT):
        check_is_fitted(self, "sigma_")
        rows = check_xt(XT)
        out = np.empty((len(rows), 3))
        for i, (x, t) in enumerate(rows):
            p = evaluate(self.sigma_, x, t, self.nu_, self.nodes_, self.precision_)
            out[i] = (p.J, p.log_J, p.V)
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(self._columns, dtype=object)
