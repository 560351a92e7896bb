import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from alpha2dynamo.errors import BlowUpError, DiscretizationError, InvalidParameterError
from alpha2dynamo.kernels import (Grid, TridiagonalOperator, cumulative_quadrature, d1, d2,
                                  derivative_matrix, discretize_schrodinger,
                                  discretize_schrodinger4, fornberg_weights, ground_state4,
                                  integrate_ivp, integrate_linear_ivp, lowest_eigenpairs,
                                  lowest_eigenvalues, quadrature, refine_eigenpair, sturm_count)
from alpha2dynamo.profile import unit_alpha


def test_grid_nodes():
    g = Grid(10.0, 9)
    assert g.h == 1.0
    assert g.x[0] == 1.0 and g.x[-1] == 9.0
    assert np.all(np.diff(g.x) > 0)
    with pytest.raises(ValueError):
        g.x[0] = 3.0


@pytest.mark.parametrize("L,n", [(0.0, 10), (-1.0, 10), (1.0, 3), (1.0, 7.5)])
def test_grid_rejects_bad_input(L, n):
    with pytest.raises(InvalidParameterError):
        Grid(L, n)


def test_three_point_spectrum():
    T = TridiagonalOperator(np.array([2.0, 2.0, 2.0]), np.array([-1.0, -1.0]))
    w = lowest_eigenvalues(T, 3)
    assert np.allclose(w, [2 - math.sqrt(2), 2.0, 2 + math.sqrt(2)], atol=1e-12)


def test_eigenvector_normalization_and_sign():
    g = Grid(math.pi, 199)
    (mu, v), = lowest_eigenpairs(discretize_schrodinger(g, 0.0), 1, g.h)
    assert g.norm(v) == pytest.approx(1.0, abs=1e-12)
    assert v[0] > 0


def test_box_modes_second_order():
    g = Grid(math.pi, 399)
    w = lowest_eigenvalues(discretize_schrodinger(g, 0.0), 3)
    for k, mu in enumerate(w, 1):
        assert abs(mu - k * k) < 2 * k**4 * g.h**2


def test_box_mode_convergence_ratio():
    errs = []
    for n in (99, 199, 399):
        g = Grid(math.pi, n)
        errs.append(lowest_eigenvalues(discretize_schrodinger(g, 0.0), 1)[0] - 1.0)
    for r in (errs[0] / errs[1], errs[1] / errs[2]):
        assert O.BOX_RATIO_RANGE[0] <= r <= O.BOX_RATIO_RANGE[1]


def test_constant_shift():
    g = Grid(5.0, 120)
    w0 = lowest_eigenvalues(discretize_schrodinger(g, 0.0), 4)
    w1 = lowest_eigenvalues(discretize_schrodinger(g, 3.25), 4)
    assert np.allclose(w1 - w0, 3.25, atol=1e-9)


def test_non_finite_potential_names_node():
    g = Grid(1.0, 20)
    q = np.zeros(20)
    q[7] = np.inf
    with pytest.raises(DiscretizationError, match="node 7"):
        discretize_schrodinger(g, q)


def test_soliton_well_richardson():
    vals = []
    for n in (2000, 4000, 8000):
        g = Grid(100.0, n)
        vals.append(lowest_eigenvalues(
            discretize_schrodinger(g, -0.5 * unit_alpha(O.SOLITON_X0, g.x) ** 2), 1)[0])
    extrapolated = (4 * vals[2] - vals[1]) / 3
    assert abs(extrapolated - O.SOLITON_LEVEL) < 1e-8
    assert abs(vals[2] - O.SOLITON_LEVEL) < O.TOL_SOLITON


def test_fourth_order_ground_state(grid):
    mu, v = ground_state4(grid, -0.5 * unit_alpha(O.SOLITON_X0, grid.x) ** 2)
    assert abs(mu - O.WALLED_LEVEL_AT_10) < 1e-9
    assert grid.norm(v) == pytest.approx(1.0, abs=1e-12)


def test_fourth_order_convergence_box():
    errs = []
    for n in (49, 99, 199):
        g = Grid(math.pi, n)
        mu, _ = ground_state4(g, 0.0)
        errs.append(abs(mu - 1.0))
    assert 12 < errs[0] / errs[1] < 20 and 12 < errs[1] / errs[2] < 20


def test_refine_raises_nothing_on_exact_pair():
    g = Grid(math.pi, 99)
    op = discretize_schrodinger4(g, 0.0)
    mu, v = refine_eigenpair(op, 1.0, np.sin(g.x), g.h)
    assert abs(mu - 1.0) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 50), st.integers(0, 2**31 - 1))
def test_sturm_count_matches_full_extraction(n, seed):
    rng = np.random.default_rng(seed)
    T = TridiagonalOperator(rng.normal(size=n), rng.normal(size=n - 1))
    w = np.linalg.eigvalsh(np.diag(T.diagonal) + np.diag(T.offdiagonal, 1)
                           + np.diag(T.offdiagonal, -1))
    for mu in rng.uniform(w.min() - 1, w.max() + 1, 5):
        if np.min(np.abs(w - mu)) > 1e-9:
            assert sturm_count(T, mu) == int(np.sum(w < mu))


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 40), st.integers(0, 2**31 - 1))
def test_matvec_matches_dense(n, seed):
    rng = np.random.default_rng(seed)
    T = TridiagonalOperator(rng.normal(size=n), rng.normal(size=n - 1))
    A = np.diag(T.diagonal) + np.diag(T.offdiagonal, 1) + np.diag(T.offdiagonal, -1)
    v = rng.normal(size=n)
    assert np.allclose(T.matvec(v), A @ v)


def test_fornberg_centred_second_derivative():
    assert np.allclose(fornberg_weights(0.0, [-1, 0, 1], 2), [1, -2, 1])
    assert np.allclose(fornberg_weights(0.0, [-2, -1, 0, 1, 2], 1),
                       [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12])


@pytest.mark.parametrize("accuracy", [4, 6])
@pytest.mark.parametrize("order", [1, 2])
def test_derivative_matrix_convergence(order, accuracy):
    errs = []
    for n in (29, 59):
        h = math.pi / (n + 1)
        x = h * np.arange(1, n + 1)
        D = derivative_matrix(n, h, order, True, accuracy)
        exact = np.cos(x) if order == 1 else -np.sin(x)
        errs.append(np.abs(D @ np.sin(x) - exact).max())
    assert math.log2(errs[0] / errs[1]) > accuracy - 0.6


def test_derivative_matrix_rejects_bad_order():
    with pytest.raises(InvalidParameterError):
        derivative_matrix(20, 0.1, 3)
    with pytest.raises(InvalidParameterError):
        derivative_matrix(20, 0.1, 2, accuracy=8)


def test_grid_derivative_helpers():
    g = Grid(math.pi, 400)
    assert np.abs(d1(g, np.sin(g.x)) - np.cos(g.x)).max() < 1e-9
    assert np.abs(d2(g, np.sin(g.x)) + np.sin(g.x)).max() < 1e-9


def test_rk4_exponential():
    tr = integrate_ivp(lambda x, y: y, 0.0, 1.0, [1.0], 1e-3)
    assert abs(tr.y[-1, 0] - math.e) < 1e-8


def test_rk4_cosh():
    tr = integrate_ivp(lambda x, y: np.array([y[1], y[0]]), 0.0, 1.0, [1.0, 0.0], 1e-3)
    assert abs(tr.y[-1, 0] - math.cosh(1.0)) < 1e-8


def test_rk4_nodes_of_sine():
    tr = integrate_ivp(lambda x, y: np.array([y[1], -y[0]]), 0.0, 10.0, [0.0, 1.0], 1e-2)
    # the start value 0 is not a crossing; sin changes sign at pi, 2 pi, 3 pi
    assert tr.node_count() == 3
    assert np.allclose(tr.nodes[0], [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-6)


def test_rk4_blowup_reports_last_x():
    with pytest.raises(BlowUpError) as info:
        integrate_ivp(lambda x, y: y * y, 0.0, 2.0, [1.0], 1e-3, blowup=1e12)
    assert 0.99 < info.value.last_x <= 1.0 + 1e-9


def test_linear_propagator_matches_generic():
    def rhs(x, y):
        return np.array([y[1], (0.5 - 2 / np.cosh(x - 1) ** 2) * y[0]])

    def coeff(x):
        A = np.zeros(x.shape + (2, 2))
        A[..., 0, 1] = 1.0
        A[..., 1, 0] = 0.5 - 2 / np.cosh(x - 1) ** 2
        return A

    a = integrate_ivp(rhs, 0.0, 5.0, [0.0, 1.0], 1e-2)
    b = integrate_linear_ivp(coeff, 0.0, 5.0, np.array([0.0, 1.0]), 1e-2)
    assert np.allclose(a.y[-1], b.y[-1], rtol=1e-12)
    assert a.node_count() == b.node_count() == 1


def test_simpson_sine():
    h = math.pi / 3142
    x = np.linspace(0, math.pi, 3143)
    assert abs(quadrature(np.sin(x), x[1] - x[0]) - 2.0) < 1e-8


def test_simpson_sech2():
    x = np.linspace(0.0, 40.0, 40001)
    assert abs(quadrature(1 / np.cosh(x) ** 2, x[1] - x[0]) - 1.0) < 1e-10


def test_simpson_even_count():
    x = np.linspace(0.0, 1.0, 1000)
    assert abs(quadrature(x**3, x[1] - x[0]) - 0.25) < 1e-10


def test_quadrature_too_few_samples():
    with pytest.raises(InvalidParameterError):
        quadrature([1.0, 2.0], 0.1)
    with pytest.raises(InvalidParameterError):
        cumulative_quadrature([1.0], 0.1)


def test_cumulative_quadrature():
    x = np.linspace(0.0, 2.0, 2001)
    c = cumulative_quadrature(np.cos(x), x[1] - x[0])
    assert np.abs(c - np.sin(x)).max() < 1e-10
