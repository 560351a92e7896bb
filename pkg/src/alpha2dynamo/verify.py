"""Cross-module invariant suite behind the ``verify`` command."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dirac, kernels, pencil, perturbation, profile, susy, transform
from .errors import PoleError
from .kernels import Grid


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<44s} value={self.value:.3e}  tol={self.tol:.1e}"


def _below(name: str, fn: Callable[[], float], tol: float) -> Check:
    v = float(fn())
    return Check(name, v, tol, bool(v < tol))


def _box_ratio() -> float:
    errs = []
    for n in (99, 199, 399):
        g = Grid(math.pi, n)
        mu = kernels.lowest_eigenvalues(kernels.discretize_schrodinger(g, 0.0), 1)[0]
        errs.append(abs(mu - 1.0))
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    # distance of the worse ratio from the ideal 4
    return max(abs(r1 - 4.0), abs(r2 - 4.0))


def _soliton_well(grid: Grid) -> float:
    mu, _ = kernels.ground_state4(grid, -0.5 * profile.unit_alpha(10.0, grid.x) ** 2)
    return abs(mu + 1.0)


def _reduced_tanh(grid: Grid) -> float:
    return max(abs(pencil.reduced_spectrum(x0, 0, grid)[0] - math.tanh(x0) ** 2)
               for x0 in (0.5, susy.X_J, 2.0))


def _pencil_jordan(grid: Grid) -> float:
    sol = pencil.solve_pencil(susy.X_J, 0, grid)
    return abs(sol.epsilon) + abs(sol.lam - 0.5)


def _reconstruction(grid: Grid) -> tuple[float, float, float]:
    sol = pencil.solve_pencil(0.5, 0, grid)
    pipe = transform.build_pipeline(sol.x0, sol.l, sol.epsilon, grid)
    p1, p2 = transform.reconstruct_phi(sol, pipe)
    return (transform.full_system_residual(p1, p2, pipe),
            transform.field_link_residual(p1, p2, pipe),
            transform.selection_rule(sol, pipe).suppressed_ratio)


def _pk(grid: Grid) -> float:
    pipe = transform.build_pipeline(0.7, 1, 0.2, grid)
    return float(np.abs(np.einsum("nij,njk->nik", pipe.P, pipe.P) - pipe.K).max())


def _dirac_lift(grid: Grid) -> float:
    sol = pencil.solve_pencil(0.5, 0, grid)
    sys = dirac.build_dirac_system(0.5, 0, grid)
    p1, p2 = dirac.lift_to_dirac(sol, sys)
    return dirac.dirac_residual(p1, p2, sys, sol.epsilon)


def _dirac_refusal(grid: Grid) -> float:
    sol = pencil.solve_pencil(1.2, 0, grid)
    sys = dirac.build_dirac_system(1.2, 0, grid)
    try:
        dirac.lift_to_dirac(sol, sys)
    except PoleError:
        return 0.0
    return 1.0


def _chi_residual(grid: Grid) -> float:
    chi = perturbation.first_order_correction(perturbation.solvability_e1(), grid)
    return perturbation.correction_residual(chi, perturbation.solvability_e1(), grid)


def run_suite(grid: Grid | None = None) -> list[Check]:
    """Run every invariant at the given grid; returns one Check per item."""
    g = grid or Grid()
    x = np.linspace(-10.0, 10.0, 2001)
    p = profile.AlphaProfile(1.0, 0.3)
    recon = _reconstruction(g)
    slope = perturbation.local_slope_check(grid=g)
    checks = [
        _below("profile ODE residual", lambda: np.abs(profile.ode_residual(p, x)).max(), 1e-12),
        _below("box-mode order-2 ratio |r-4|", _box_ratio, 0.5),
        _below("soliton well level at x0=10", lambda: _soliton_well(g), 1e-5),
        _below("Wronskian at kappa=2^-1/2",
               lambda: np.abs(perturbation.wronskian_samples() - perturbation.W_J).max(), 1e-10),
        _below("intertwining residual",
               lambda: susy.intertwining_residual("x*exp(-x**2/4)", g, 0.4), 1e-6),
        _below("reduced level vs tanh^2", lambda: _reduced_tanh(g), 1e-6),
        _below("pencil at Jordan point", lambda: _pencil_jordan(g), 1e-4),
        _below("P^2 = K", lambda: _pk(g), 1e-12),
        _below("Jordan form deviation", lambda: transform.jordan_form_check(susy.X_J, 0, g), 1e-10),
        Check("full-system residual", recon[0], 1e-5, recon[0] < 1e-5),
        Check("field link residual", recon[1], 1e-6, recon[1] < 1e-6),
        Check("suppressed branch ratio", recon[2], 1e-6, recon[2] < 1e-6),
        _below("Dirac residual at x0=0.5", lambda: _dirac_lift(g), 1e-6),
        _below("Dirac lift refused at x0=1.2", lambda: _dirac_refusal(g), 0.5),
        _below("|e1| - 1/2", lambda: abs(abs(perturbation.solvability_e1()) - 0.5), 1e-6),
        _below("first-order correction residual", lambda: _chi_residual(g), 1e-5),
        Check("slope remainder c (quadratic)", slope.c_fit, 1.0,
              bool(slope.quadratic and slope.complete and slope.c_fit < 1.0)),
    ]
    return checks


def format_table(checks) -> str:
    return "\n".join(c.line() for c in checks)
