import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from alpha2dynamo.errors import InvalidParameterError
from alpha2dynamo.estimators import PencilTransformer, ReducedLevel

SMALL = {"L": 100.0, "n": 2000}


def test_params_round_trip():
    est = ReducedLevel(l=1, **SMALL)
    assert est.get_params() == {"l": 1, "L": 100.0, "n": 2000}
    twin = clone(est)
    assert twin.get_params() == est.get_params() and twin is not est
    est.set_params(l=2)
    assert est.l == 2


def test_reduced_predict():
    X = np.array([[0.5], [2.0], [-1.0]])
    y = ReducedLevel(**SMALL).fit(X).predict(X)
    assert y[0] == pytest.approx(math.tanh(0.5) ** 2, abs=1e-5)
    assert y[1] == pytest.approx(math.tanh(2.0) ** 2, abs=1e-5)
    assert math.isnan(y[2])


def test_not_fitted():
    with pytest.raises(NotFittedError):
        ReducedLevel().predict([[0.5]])
    with pytest.raises(NotFittedError):
        PencilTransformer().transform([[0.5]])


def test_two_columns_rejected():
    with pytest.raises(InvalidParameterError):
        ReducedLevel(**SMALL).fit(np.ones((3, 2)))


def test_bad_l_rejected():
    with pytest.raises(InvalidParameterError):
        PencilTransformer(l=-1, **SMALL).fit([[0.5]])


def test_transform_shape_and_order():
    X = np.array([[1.2], [0.4], [0.4], [-2.0]])
    tr = PencilTransformer(**SMALL).fit(X)
    out = tr.transform(X)
    assert out.shape == (4, 2)
    assert np.array_equal(out[1], out[2])
    assert out[1, 1] > 0 > out[0, 1]
    assert np.allclose(out[:2, 0], 0.5 - out[:2, 1] ** 2, atol=1e-12)
    assert np.isnan(out[3]).all()
    assert list(tr.get_feature_names_out()) == ["lambda", "epsilon"]
    assert tr.n_features_in_ == 1


def test_fit_transform():
    out = PencilTransformer(**SMALL).fit_transform([[0.5]])
    assert out.shape == (1, 2) and np.isfinite(out).all()
