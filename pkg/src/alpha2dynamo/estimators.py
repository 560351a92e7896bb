"""scikit-learn style wrappers over the functional solvers.

Samples are rows of a one-column array of profile centres x0. Cells without
a bound state come back as NaN so that outputs stay rectangular.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import InvalidParameterError
from .kernels import Grid
from .pencil import reduced_spectrum, sweep


def _x0_column(X) -> np.ndarray:
    X = check_array(X, ensure_2d=True, dtype=np.float64)
    if X.shape[1] != 1:
        raise InvalidParameterError(f"expected a single x0 column, got {X.shape[1]}")
    return X[:, 0]


class _GridParams(BaseEstimator):
    def _validate(self):
        if not (isinstance(self.l, (int, np.integer)) and self.l >= 0):
            raise InvalidParameterError(f"l must be a non-negative integer, got {self.l!r}")
        self.grid_ = Grid(float(self.L), int(self.n))
        self.n_features_in_ = 1


class ReducedLevel(RegressorMixin, _GridParams):
    """Top level lambda of the reduced operator as a function of x0."""

    def __init__(self, l: int = 0, L: float = 100.0, n: int = 8000):
        self.l = l
        self.L = L
        self.n = n

    def fit(self, X, y=None):
        _x0_column(X)
        self._validate()
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "grid_")
        out = []
        for x0 in _x0_column(X):
            lam = reduced_spectrum(float(x0), self.l, self.grid_, k=1)
            out.append(lam[0] if lam else np.nan)
        return np.asarray(out)


class PencilTransformer(TransformerMixin, _GridParams):
    """Maps x0 to the bound-state pair (lambda, epsilon) of the l-pencil.

    Rows are solved in increasing x0 so that root selection follows
    continuity; the output keeps the input order.
    """

    def __init__(self, l: int = 0, L: float = 100.0, n: int = 8000):
        self.l = l
        self.L = L
        self.n = n

    def fit(self, X, y=None):
        _x0_column(X)
        self._validate()
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "grid_")
        x0 = _x0_column(X)
        rows = {r.x0: r.solution for r in sweep(np.unique(x0), [self.l], self.grid_)}
        out = np.full((x0.size, 2), np.nan)
        for i, v in enumerate(x0):
            sol = rows[float(v)]
            if sol is not None:
                out[i] = sol.lam, sol.epsilon
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(["lambda", "epsilon"], dtype=object)
