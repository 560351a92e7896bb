"""Dirac form of the pencils.

With the zero-energy seed u of H_{2,l} and w = u'/u, the F_+ pencil becomes

    L psi1 = eps psi2,   L^+ psi2 - (alpha + eps) psi1 = 0,
    L = -d/dx + w,       L^+ = d/dx + w,

i.e. (gamma d/dx + V) Psi = eps Psi with gamma = [[0, 1], [-1, 0]] and
V = [[-alpha, w], [w, 0]] (upper signs; the F_- form flips alpha).
The system has continuous coefficients, and hence a self-adjoint
realization with purely real spectrum, exactly while u is nodeless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import JordanRegimeError, PoleError
from .kernels import Grid, d1
from .pencil import JORDAN_EPS, PencilSolution, solve_pencil
from .profile import unit_alpha
from .susy import FactorizationSeed, h2l_factorization_seed

GAMMA = np.array([[0.0, 1.0], [-1.0, 0.0]])
GUARD = 1e-12


@dataclass
class DiracSystem:
    x0: float
    l: int
    grid: Grid = field(repr=False)
    sign: int
    w: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    nodes: int
    regular: bool
    seed: FactorizationSeed = field(repr=False)

    @property
    def gamma(self) -> np.ndarray:
        return GAMMA

    @property
    def potential(self) -> np.ndarray:
        """V_D sampled on the grid, shape (n, 2, 2)."""
        V = np.zeros((self.grid.n, 2, 2))
        V[:, 0, 0] = -self.sign * self.alpha
        V[:, 0, 1] = V[:, 1, 0] = self.w
        return V


def _guarded(u, du, h):
    # the global max of u is useless as a scale (u grows like exp(x/sqrt 2)),
    # so compare |u| with the local scale h |u'|
    return bool(np.any(np.abs(u) <= GUARD * h * np.abs(du)))


def build_dirac_system(x0: float, l: int, grid: Grid, sign: int = +1,
                       seed: FactorizationSeed | None = None) -> DiracSystem:
    seed = h2l_factorization_seed(x0, l, grid) if seed is None else seed
    nodes = int(seed.nodes)
    near_zero = _guarded(seed.u, seed.du, grid.h)
    regular = nodes == 0 and not near_zero
    with np.errstate(divide="ignore", invalid="ignore"):
        w = seed.du / seed.u
    return DiracSystem(float(x0), int(l), grid, 1 if sign >= 0 else -1, w,
                       unit_alpha(x0, grid.x), nodes, regular, seed)


def lift_to_dirac(sol: PencilSolution, sys: DiracSystem):
    """psi1 = F, psi2 = L psi1 / eps."""
    if abs(sol.epsilon) <= JORDAN_EPS:
        raise JordanRegimeError(f"eps={sol.epsilon:.3g}: psi2 = L psi1 / eps is undefined")
    if not sys.regular:
        raise PoleError(
            f"seed u has {sys.nodes} node(s) for x0={sys.x0:.6g}, l={sys.l}; "
            "w has a pole and the Dirac lift is not available")
    psi1 = np.asarray(sol.F, dtype=float)
    psi2 = (-d1(sys.grid, psi1, dirichlet=True) + sys.w * psi1) / sol.epsilon
    return psi1, psi2


def dirac_residual(psi1, psi2, sys: DiracSystem, eps: float) -> float:
    """||(gamma d/dx + V) Psi - eps Psi|| / ||Psi||."""
    g = sys.grid
    dpsi1 = d1(g, psi1, dirichlet=True)
    # psi2 = L psi1 / eps is O(x^(l+2)) at the origin and decays at L
    dpsi2 = d1(g, psi2, dirichlet=True)
    r1 = dpsi2 - sys.sign * sys.alpha * psi1 + sys.w * psi2 - eps * psi1
    r2 = -dpsi1 + sys.w * psi1 - eps * psi2
    num = g.norm(r1) ** 2 + g.norm(r2) ** 2
    den = g.norm(psi1) ** 2 + g.norm(psi2) ** 2
    return math.sqrt(num / den)


def pencil_identity_residual(psi1, psi2, sys: DiracSystem, eps: float) -> float:
    """Relative residual of the pencil rebuilt from the lift.

    Multiplying the second Dirac row by eps and substituting eps psi2 =
    L psi1 gives eps L^+ psi2 -/+ eps alpha psi1 - eps^2 psi1 =
    [L^+L -/+ eps alpha - eps^2] psi1, which must vanish.
    """
    g = sys.grid
    Ldag_psi2 = d1(g, psi2, dirichlet=True) + sys.w * psi2
    r = eps * Ldag_psi2 - sys.sign * sys.alpha * eps * psi1 - eps * eps * psi1
    return g.norm(r) / g.norm(psi1)


def factorization_residual(F, sys: DiracSystem) -> float:
    """||L^+ L F - H_{2,l} F|| / ||F|| for a grid function F vanishing at 0 and L."""
    g = sys.grid
    x = g.x
    LF = -d1(g, F, dirichlet=True) + sys.w * F
    LdagLF = d1(g, LF, dirichlet=True) + sys.w * LF
    H2F = -_d2(g, F) + (sys.l * (sys.l + 1) / x**2 - 0.5 * sys.alpha**2 + 0.5) * F
    return g.norm(LdagLF - H2F) / g.norm(F)


def _d2(g, F):
    from .kernels import d2

    return d2(g, F, dirichlet=True)


@dataclass
class RegularityRow:
    x0: float
    l: int
    nodes: int
    regular: bool
    epsilon: float | None = None
    dirac_residual: float | None = None
    note: str = ""


def regularity_report(x0_range, l: int, grid: Grid, with_residual: bool = True) -> list[RegularityRow]:
    """Node count of u, regularity and (when available) the Dirac residual per x0."""
    x0s = np.asarray(sorted(float(v) for v in x0_range))
    seeds = h2l_factorization_seed(x0s, l, grid)
    rows = []
    prev = None
    for j, x0 in enumerate(x0s):
        seed = FactorizationSeed(float(x0), l, grid.x, seeds.u[:, j], seeds.du[:, j],
                                 seeds.node_positions[j])
        sys = build_dirac_system(float(x0), l, grid, +1, seed)
        row = RegularityRow(float(x0), int(l), sys.nodes, sys.regular)
        if with_residual and sys.regular:
            sol = solve_pencil(float(x0), l, grid, prev)
            if sol is None:
                row.note = "no bound state"
            else:
                prev = sol.epsilon
                row.epsilon = sol.epsilon
                if sol.jordan:
                    row.note = "jordan point"
                else:
                    p1, p2 = lift_to_dirac(sol, sys)
                    row.dirac_residual = dirac_residual(p1, p2, sys, sol.epsilon)
        elif not sys.regular:
            row.note = "pole in w"
        rows.append(row)
    return rows
