import dataclasses
import math

import numpy as np
import pytest

import oracles as O
from alpha2dynamo.errors import InvalidParameterError
from alpha2dynamo.kernels import refine_eigenpair
from alpha2dynamo.pencil import (auxiliary_lambda, is_localized, reduced_potential,
                                 reduced_spectrum, solve_pencil, solve_pencil_report, sweep,
                                 tail_ratio, x0_grid)
from alpha2dynamo.profile import AlphaProfile, rescale_to_unit_a


def test_reduced_at_jordan_point(grid):
    assert abs(reduced_spectrum(O.X_J, 0, grid)[0] - O.LAMBDA_J) < O.TOL_REDUCED


def test_reduced_at_two(grid):
    assert abs(reduced_spectrum(2.0, 0, grid)[0] - O.TANH2_AT_2) < O.TOL_REDUCED


def test_reduced_second_order_path(grid):
    lam = reduced_spectrum(0.5, 0, grid, order=2)[0]
    assert abs(lam - O.TANH2_AT_HALF) < 1e-4
    with pytest.raises(InvalidParameterError):
        reduced_spectrum(0.5, 0, grid, order=3)


def test_no_reduced_level_for_l1_near_wall(grid):
    assert reduced_spectrum(0.1, 1, grid) == []


def test_auxiliary_matches_reduced_at_b0(grid):
    assert auxiliary_lambda(1.3, 0, 0.0, grid) == pytest.approx(math.tanh(1.3) ** 2, abs=1e-6)


def test_auxiliary_monotone_in_b(coarse_grid):
    # a larger b alpha raises the potential, so lambda(b) decreases
    bs = np.arange(-1.0, 1.0001, 0.05)
    lams = [auxiliary_lambda(1.0, 0, float(b), coarse_grid) for b in bs]
    assert np.all(np.diff(lams) < 0)


def test_solve_at_jordan_point(grid):
    sol = solve_pencil(O.X_J, 0, grid)
    assert abs(sol.epsilon) < 1e-5
    assert abs(sol.lam - O.LAMBDA_J) < O.TOL_JORDAN_LAMBDA


def test_far_below_jordan(grid):
    sol = solve_pencil(O.X_J + O.FAR_DELTA, 0, grid)
    assert sol.epsilon == pytest.approx(0.1, rel=O.FAR_DELTA_REL)
    assert sol.branch == "+"


def test_sign_flips_above_jordan(grid):
    sol = solve_pencil(O.X_J + 0.2, 0, grid, previous_epsilon=0.0)
    assert sol.epsilon < 0
    assert sol.branch == "-"


@pytest.mark.parametrize("x0,l", [(0.4, 0), (1.5, 0), (1.2, 1), (2.5, 2)])
def test_solution_invariants(x0, l, grid):
    sol = solve_pencil(x0, l, grid)
    assert sol is not None
    assert abs(sol.lam - (0.5 - sol.epsilon**2)) < O.TOL_DEFINITIONAL
    assert sol.localized and is_localized(sol.F, grid)
    assert sol.residual < O.TOL_PENCIL_RESIDUAL
    assert abs(sol.diagnostics["constraint_residual"]) < O.TOL_PENCIL_RESIDUAL
    assert sol.b == -sol.epsilon


def test_rayleigh_quotient(grid):
    sol = solve_pencil(0.6, 0, grid)
    op = sol.pencil_operator()
    F = sol.F
    rq = -float(F @ op.matvec(F)) / float(F @ F)
    assert abs(rq - sol.lam) < O.TOL_RAYLEIGH


def test_branch_symmetry(grid):
    # (eps, F_+) -> (-eps, F_-): the F_- pencil at -eps has the same level
    sol = solve_pencil(0.6, 0, grid)
    mirrored = dataclasses.replace(sol, epsilon=-sol.epsilon)
    op = mirrored.pencil_operator(sign=-1)
    mu, _ = refine_eigenpair(op, -sol.lam, sol.F, grid.h)
    assert abs(-mu - sol.lam) < 1e-8
    plus = reduced_potential(sol.x0, 0, grid, -sol.epsilon)
    minus = reduced_potential(sol.x0, 0, grid, sol.epsilon)
    assert np.allclose(plus + minus, 2 * reduced_potential(sol.x0, 0, grid), atol=1e-12)


def test_rescaled_profile(grid):
    p = rescale_to_unit_a(AlphaProfile(2.0, 1.0))
    lam = 2.0**2 * reduced_spectrum(p.x0, 0, grid)[0]
    assert abs(lam - O.RESCALED_LAMBDA_A2_X1) < 4 * O.TOL_REDUCED


def test_real_epsilon_below_jordan(grid):
    for x0 in (0.2, 0.5, 0.8):
        sol = solve_pencil(x0, 0, grid)
        assert isinstance(sol.epsilon, float) and math.isfinite(sol.epsilon)
        assert 0 < sol.epsilon < 0.5
        lo, hi, glo, ghi = sol.diagnostics["bracket"]
        assert lo <= sol.b <= hi and glo * ghi <= 0


def test_wall_centred_profile(grid):
    # x0=0: the bound state survives with a finite eps; lambda=0.25 up to the box truncation
    sol = solve_pencil(0.0, 0, grid)
    assert sol is not None
    assert sol.epsilon == pytest.approx(0.5, abs=1e-4)


def test_no_state_reports_reason(grid):
    rep = solve_pencil_report(0.1, 3, grid)
    assert rep.solution is None
    assert rep.reason


def test_negative_centre_has_no_bound_state(grid):
    assert solve_pencil(-3.0, 0, grid) is None


def test_bad_l(grid):
    with pytest.raises(InvalidParameterError):
        solve_pencil(0.5, -1, grid)
    with pytest.raises(InvalidParameterError):
        reduced_potential(0.5, 1.5, grid)


def test_tail_ratio():
    from alpha2dynamo.kernels import Grid
    g = Grid(10.0, 99)
    assert tail_ratio(np.exp(-g.x), g) < 1e-3
    assert tail_ratio(np.ones(99), g) == pytest.approx(1.0)


def test_x0_grid_inclusive():
    xs = x0_grid(0.0, 4.0, 0.05)
    assert xs.size == 81 and xs[-1] == 4.0 and xs[1] == 0.05
    with pytest.raises(InvalidParameterError):
        x0_grid(0.0, 1.0, 0.0)


def test_sweep_order_and_continuity(coarse_grid):
    rows = sweep([0.9, 0.5, 0.7], [1, 0], coarse_grid)
    assert [(r.l, r.x0) for r in rows] == [(0, 0.5), (0, 0.7), (0, 0.9), (1, 0.5), (1, 0.7), (1, 0.9)]
    eps = [r.solution.epsilon for r in rows if r.l == 0]
    assert eps[0] > eps[1] > 0 > eps[2]
