import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alpha2dynamo.errors import InvalidParameterError
from alpha2dynamo.profile import (AlphaProfile, alpha, alpha_derivatives, ode_residual,
                                  rescale_to_unit_a, unit_alpha)

finite = st.floats(-3.0, 3.0, allow_nan=False)
scale = st.floats(0.1, 5.0, allow_nan=False)


def test_peak_value():
    assert alpha(AlphaProfile(1.0, 0.5), 0.5) == 2.0


def test_decay_far_right_is_monotone():
    x = np.linspace(0.0, 200.0, 4001)
    a = alpha(AlphaProfile(1.0, 0.0), x)
    assert np.all(np.diff(a) <= 0)
    assert a[-1] < 1e-80


def test_closed_form_value_a2():
    assert alpha(AlphaProfile(2.0, 1.0), 1.5) == pytest.approx(4.0 / math.cosh(1.0), rel=1e-15)


def test_derivative_zero_at_peak():
    d1, _ = alpha_derivatives(AlphaProfile(1.0, 0.0), 0.0)
    assert d1 == 0.0


def test_first_derivative_value_and_finite_difference():
    p = AlphaProfile(1.0, 0.0)
    d1, _ = alpha_derivatives(p, 1.0)
    assert d1 == pytest.approx(-2.0 * math.sinh(1.0) / math.cosh(1.0) ** 2, rel=1e-14)
    h = 1e-5
    fd = (alpha(p, 1.0 + h) - alpha(p, 1.0 - h)) / (2 * h)
    assert abs(fd - d1) < 1e-8


def test_second_derivative_finite_difference():
    p = AlphaProfile(1.3, -0.4)
    x = np.linspace(-3, 3, 41)
    h = 1e-4
    fd = (alpha(p, x + h) - 2 * alpha(p, x) + alpha(p, x - h)) / h**2
    _, d2 = alpha_derivatives(p, x)
    assert np.abs(fd - d2).max() < 1e-6


def test_ode_residual_random_points():
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = AlphaProfile(rng.uniform(0.1, 5.0), rng.uniform(-3.0, 3.0))
        x = rng.uniform(-10.0, 10.0, 1000)
        assert np.abs(ode_residual(p, x)).max() < 1e-12


@given(a=scale, x0=finite, d=st.floats(0.0, 20.0))
def test_evenness(a, x0, d):
    p = AlphaProfile(a, x0)
    assert alpha(p, x0 + d) == pytest.approx(alpha(p, x0 - d), rel=1e-12, abs=1e-300)


@given(a=scale, x0=finite, x=st.floats(-20, 20))
def test_bounded_by_peak(a, x0, x):
    v = alpha(AlphaProfile(a, x0), x)
    assert 0.0 <= v <= 2.0 * a


@given(a=scale, x0=finite, x=st.floats(-10, 10))
def test_scaling_covariance(a, x0, x):
    p = AlphaProfile(a, x0)
    q = rescale_to_unit_a(p)
    assert q.a == 1.0
    assert alpha(p, x) == pytest.approx(a * alpha(q, a * x), rel=1e-12, abs=1e-300)


def test_rescale_identity_for_unit_a():
    p = AlphaProfile(1.0, 0.7)
    assert rescale_to_unit_a(p) == p


@pytest.mark.parametrize("a", [0.0, -1.0])
def test_rescale_rejects_nonpositive_a(a):
    with pytest.raises(InvalidParameterError):
        rescale_to_unit_a(AlphaProfile(a, 0.0))


def test_non_finite_parameters_rejected():
    with pytest.raises(InvalidParameterError):
        AlphaProfile(float("nan"), 0.0)


def test_unit_alpha_broadcasts():
    out = unit_alpha(np.array([0.0, 1.0])[:, None], np.linspace(0, 1, 5)[None, :])
    assert out.shape == (2, 5)
    assert out[1, -1] == 2.0


def test_callable_profile():
    p = AlphaProfile(2.0, 1.0)
    assert p(1.0) == 4.0
