"""Expansion of the l=0 bound state around the Jordan point.

At x0 = x_J the pencil degenerates (eps = 0, lambda = 1/2) and the bound
state becomes the zero mode phi_- of H1 + 1/2 at kappa = 2^{-1/2}. Writing
eps = e1*delta + O(delta^2) with delta = x0 - x_J, the first-order
correction chi obeys

    [-d^2 - alpha_J^2/2 + 1/2] chi = -g1 Xi1,   g1 = alpha_J (alpha_J' -/+ e1),

and a decaying chi exists only when int_0^inf g1 phi_-^2 = 0, which fixes e1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .errors import DegenerateQuadratureError, InvalidParameterError, SolvabilityError
from .kernels import Grid, d2
from .pencil import solve_pencil
from .susy import KAPPA_J, X_J, _sign, phi_exact, wronskian

LAMBDA_J = 0.5
W_J = -(2**-0.5)
DEFAULT_DELTAS = (-0.1, -0.05, -0.025, 0.025, 0.05, 0.1)
SOLVABILITY_TOL = 1e-6
TAIL_TOL = 1e-6
QUADRATURE_NODES = 20001
QUADRATURE_L = 100.0


def _closed_nodes(grid: Grid) -> np.ndarray:
    # grid.x plus both walls, so Simpson sees the full [0, L]
    return grid.h * np.arange(grid.n + 2)


def _running_integral(x, f) -> np.ndarray:
    # spline antiderivative: smooth in x, unlike cumulative Simpson whose
    # even/odd sawtooth survives a second difference
    return CubicSpline(x, f).antiderivative()(x)


def _jordan_alpha(x):
    s = 1.0 / np.cosh(x - X_J)
    return 2.0 * s, -2.0 * s * np.tanh(x - X_J)


def jordan_chain_solution(grid: Grid, C1: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Bound-state Jordan chain at x_J on the interior grid nodes.

    The chain (Xi1, Xi0) has Xi0 identically zero and Xi1 = C1 phi_- with
    kappa = 2^{-1/2}; a nonzero Xi0 would force a growing Xi1 (see
    :func:`divergence_witness`).
    """
    xi1 = C1 * phi_exact(X_J, KAPPA_J, -1)(grid.x)
    return xi1, np.zeros_like(xi1)


def chain_residual(xi1, grid: Grid) -> float:
    """||[-d^2 - alpha_J^2/2 + 1/2] Xi1|| / ||Xi1|| with fourth-order d^2."""
    a, _ = _jordan_alpha(grid.x)
    r = -d2(grid, xi1) + (0.5 - 0.5 * a * a) * xi1
    return grid.norm(r) / grid.norm(xi1)


def divergence_witness(grid: Grid, x_ref: float = 20.0) -> tuple[float, float]:
    """phi_+(x) int_0^x alpha_J phi_-^2, evaluated at x_ref and at L."""
    x = _closed_nodes(grid)
    a, _ = _jordan_alpha(x)
    pm = phi_exact(X_J, KAPPA_J, -1)(x)
    pp = phi_exact(X_J, KAPPA_J, +1)(x)
    prod = pp * _running_integral(x, a * pm * pm)
    return float(np.interp(x_ref, x, prod)), float(prod[-1])


def xi1_with_xi0(grid: Grid, C0: float = 1.0, C1: float = 1.0) -> np.ndarray:
    """Xi1 solving [-d^2 - alpha_J^2/2 + 1/2] Xi1 = alpha_J Xi0 for Xi0 = C0 phi_-.

    Variation of parameters on the closed nodes [0, L]; for C0 != 0 the
    phi_+ term grows without bound.
    """
    x = _closed_nodes(grid)
    a, _ = _jordan_alpha(x)
    pm = phi_exact(X_J, KAPPA_J, -1)(x)
    pp = phi_exact(X_J, KAPPA_J, +1)(x)
    i_pm = _running_integral(x, a * pp * pm)
    i_mm = _running_integral(x, a * pm * pm)
    return C1 * pm + (C0 / W_J) * (pp * i_mm - pm * i_pm)


def wronskian_samples(n: int = 100, x_max: float = 20.0) -> np.ndarray:
    """W(phi_+, phi_-) at kappa = 2^{-1/2}, x0 = x_J on n points of [0, x_max]."""
    return wronskian(X_J, KAPPA_J, np.linspace(0.0, x_max, n))


def _weights(n: int = QUADRATURE_NODES, L: float = QUADRATURE_L):
    x = np.linspace(0.0, L, n)
    a, da = _jordan_alpha(x)
    pm = phi_exact(X_J, KAPPA_J, -1)(x)
    return x, a, da, pm


def solvability_e1(branch="+", n: int = QUADRATURE_NODES, L: float = QUADRATURE_L) -> float:
    """e1 fixed by int g1 phi_-^2 = 0, with the branch sign applied.

    Returns +R on the F+ branch and -R on the F- branch, where
    R = int alpha_J alpha_J' phi_-^2 / int alpha_J phi_-^2.
    """
    s = _sign(branch)
    x, a, da, pm = _weights(n, L)
    dx = x[1] - x[0]
    den = simpson(a * pm * pm, dx=dx)
    if abs(den) < 1e-14:
        raise DegenerateQuadratureError(f"denominator quadrature {den:.3e} below 1e-14")
    return s * float(simpson(a * da * pm * pm, dx=dx) / den)


def g1(x, e1: float, branch="+") -> np.ndarray:
    """Inhomogeneity weight alpha_J (alpha_J' -/+ e1)."""
    a, da = _jordan_alpha(np.asarray(x, dtype=float))
    return a * (da - _sign(branch) * e1)


def solvability_defect(e1: float, branch="+", n: int = QUADRATURE_NODES,
                       L: float = QUADRATURE_L) -> float:
    """int g1 phi_-^2 / int alpha_J phi_-^2; zero exactly at the admissible e1."""
    x, a, _, pm = _weights(n, L)
    dx = x[1] - x[0]
    return float(simpson(g1(x, e1, branch) * pm * pm, dx=dx) / simpson(a * pm * pm, dx=dx))


def first_order_correction(e1: float, grid: Grid, branch="+", C1: float = 1.0) -> np.ndarray:
    """Decaying first-order correction chi on the interior grid nodes.

    chi = (C1/W)[phi_- int_0^x g1 phi_+ phi_- - phi_+ int_0^x g1 phi_-^2]
    with both running integrals taken from a cubic-spline antiderivative.
    The second integral tends to the solvability defect D, so chi grows
    like D phi_+ unless D = 0. When |D| < 1e-6 (in units of
    int alpha_J phi_-^2) the integral is evaluated as -int_x^L, which is
    the same function with D set to zero and avoids amplifying rounding
    by phi_+(L) ~ e^{70}.

    Raises SolvabilityError if the defect is too large or the resulting
    tail |chi(L)| exceeds 1e-6 max|chi|.
    """
    defect = solvability_defect(e1, branch)
    x = _closed_nodes(grid)
    pm = phi_exact(X_J, KAPPA_J, -1)(x)
    pp = phi_exact(X_J, KAPPA_J, +1)(x)
    if abs(defect) >= SOLVABILITY_TOL:
        norm = simpson(_jordan_alpha(x)[0] * pm * pm, dx=grid.h)
        growth = abs(defect * norm * C1 / W_J) * pp[-1]
        raise SolvabilityError(
            f"e1={e1:.6g} violates solvability (defect {defect:.3e}); "
            f"chi(L) would be of order {growth:.3e}")
    w = g1(x, e1, branch)
    head = _running_integral(x, w * pp * pm)
    inner = _running_integral(x, w * pm * pm)
    tail = inner[-1] - inner
    chi = (C1 / W_J) * (pm * head + pp * tail)
    peak = np.max(np.abs(chi))
    if not abs(chi[-1]) < TAIL_TOL * peak:
        raise SolvabilityError(f"chi(L)={chi[-1]:.3e} fails tail decay against max {peak:.3e}")
    return chi[1:-1]


def correction_residual(chi, e1: float, grid: Grid, branch="+", C1: float = 1.0) -> float:
    """Relative residual of [-d^2 - alpha_J^2/2 + 1/2] chi + g1 Xi1."""
    a, _ = _jordan_alpha(grid.x)
    xi1, _ = jordan_chain_solution(grid, C1)
    rhs = g1(grid.x, e1, branch) * xi1
    r = -d2(grid, chi) + (0.5 - 0.5 * a * a) * chi + rhs
    return grid.norm(r) / grid.norm(rhs)


@dataclass(frozen=True)
class SlopeRow:
    delta: float
    epsilon_pencil: float | None
    epsilon_linear: float
    deviation: float | None


@dataclass(frozen=True)
class SlopeTable:
    rows: tuple[SlopeRow, ...]
    c_fit: float
    e2_fit: float
    quadratic: bool

    @property
    def complete(self) -> bool:
        return all(r.epsilon_pencil is not None for r in self.rows)


def local_slope_check(delta_list=DEFAULT_DELTAS, grid: Grid | None = None,
                      e1: float = -0.5) -> SlopeTable:
    """Compare pencil eps(x_J + delta) with e1*delta.

    ``c_fit`` is max |deviation|/delta^2 over the rows and ``e2_fit`` the
    least-squares coefficient of deviation ~ e2 delta^2. ``quadratic`` holds
    when |deviation|/delta^2 varies by less than a factor 2 across the
    rows, which rules out a residual linear term.
    """
    grid = grid or Grid()
    rows = []
    for d in delta_list:
        d = float(d)
        sol = solve_pencil(X_J + d, 0, grid, previous_epsilon=e1 * d)
        lin = e1 * d
        if sol is None:
            rows.append(SlopeRow(d, None, lin, None))
        else:
            rows.append(SlopeRow(d, sol.epsilon, lin, sol.epsilon - lin))
    ok = [r for r in rows if r.deviation is not None and r.delta != 0.0]
    if not ok:
        raise InvalidParameterError("no nonzero delta produced a bound state")
    dd = np.array([r.delta for r in ok])
    dev = np.array([r.deviation for r in ok])
    scaled = np.abs(dev) / dd**2
    e2 = float(np.dot(dev, dd**2) / np.dot(dd**2, dd**2))
    quadratic = bool(scaled.max() < 2.0 * scaled.min())
    return SlopeTable(tuple(rows), float(scaled.max()), e2, quadratic)


@dataclass(frozen=True)
class JordanExpansion:
    """First-order expansion data around the Jordan point (l = 0)."""

    e1: float
    chi: np.ndarray = field(repr=False)
    delta_range: tuple[float, float]
    x_J: float = X_J
    lambda_J: float = LAMBDA_J
    C1: float = 1.0
    branch: str = "+"

    def epsilon(self, x0):
        """Linear estimate eps ~ e1 (x0 - x_J)."""
        return self.e1 * (np.asarray(x0, dtype=float) - self.x_J)


def jordan_expansion(grid: Grid | None = None, branch="+",
                     deltas=DEFAULT_DELTAS) -> JordanExpansion:
    """Assemble e1, chi and the delta interval on which the quadratic fit holds."""
    grid = grid or Grid()
    b = "+" if _sign(branch) > 0 else "-"
    e1 = solvability_e1(b)
    chi = first_order_correction(e1, grid, b)
    table = local_slope_check(deltas, grid, e1=solvability_e1("+"))
    good = [r.delta for r in table.rows if r.deviation is not None]
    rng = (min(good), max(good)) if table.quadratic else (0.0, 0.0)
    return JordanExpansion(e1, chi, rng, branch=b)
