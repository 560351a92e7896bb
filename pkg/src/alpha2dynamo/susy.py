"""Closed-form reference layer: the one-soliton well and its SUSY partner.

H0 = -d^2/dx^2 and H1 = -d^2/dx^2 - alpha^2/2 are intertwined by
L = -d/dx + w with w = tanh(x - x0). Their half-line solutions phi_+/- are
elementary, and H1 with a Dirichlet wall at 0 has the single level
E = -tanh^2(x0) for x0 > 0.

The same module integrates the zero-energy seed u of
H_{2,l} = -d^2/dx^2 + l(l+1)/x^2 - alpha^2/2 + 1/2 whose logarithmic
derivative is the Dirac superpotential.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError
from .kernels import Grid, integrate_linear_ivp
from .profile import unit_alpha

X_J = math.atanh(2**-0.5)
NEAR_ORIGIN = 2.0
SUBSTEPS = 32
KAPPA_J = 2**-0.5


@dataclass(frozen=True)
class SusyData:
    """Factorization data of a SUSY pair in a=1 units."""

    x0: float
    kappa: float
    E_f: float = -1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be positive, got {self.kappa}")

    @property
    def E(self) -> float:
        return -self.kappa**2

    def w(self, x):
        return np.tanh(np.asarray(x, dtype=float) - self.x0)

    def u(self, x):
        return np.cosh(np.asarray(x, dtype=float) - self.x0)


def phi_exact(x0: float, kappa: float, sign: int) -> Callable:
    """phi_+/-(x) = (-/+ kappa + tanh(x - x0)) exp(+/- kappa x)."""
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")
    s = _sign(sign)

    def phi(x):
        x = np.asarray(x, dtype=float)
        return (-s * kappa + np.tanh(x - x0)) * np.exp(s * kappa * x)

    return phi


def phi_exact_derivative(x0: float, kappa: float, sign: int) -> Callable:
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")
    s = _sign(sign)

    def dphi(x):
        x = np.asarray(x, dtype=float)
        t = np.tanh(x - x0)
        return ((1.0 - t * t) + s * kappa * (-s * kappa + t)) * np.exp(s * kappa * x)

    return dphi


def wronskian(x0: float, kappa: float, x) -> np.ndarray:
    """W(phi_+, phi_-) = phi_+ phi_-' - phi_+' phi_- at the points ``x``."""
    pp, pm = phi_exact(x0, kappa, +1)(x), phi_exact(x0, kappa, -1)(x)
    dp, dm = phi_exact_derivative(x0, kappa, +1)(x), phi_exact_derivative(x0, kappa, -1)(x)
    return pp * dm - dp * pm


def _sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise InvalidParameterError(f"sign must be +1 or -1, got {sign!r}")


def bound_state_level(x0: float) -> float | None:
    """E(x0) = -tanh^2(x0) for x0 > 0; there is no bound state otherwise."""
    if x0 <= 0:
        return None
    return -math.tanh(x0) ** 2


# --------------------------------------------------------------------------
# intertwining identities, evaluated symbolically


def _symbolic(test_fn):
    import sympy as sp

    x = sp.Symbol("x", real=True)
    expr = sp.sympify(test_fn, locals={"x": x}) if isinstance(test_fn, str) else test_fn
    if not isinstance(expr, sp.Basic):
        raise InvalidParameterError("test function must be a sympy expression or a string")
    free = expr.free_symbols
    if len(free) > 1:
        raise InvalidParameterError(f"test function may only depend on x, got {free}")
    if free:
        expr = expr.subs(free.pop(), x)
    return sp, x, expr


def _apply_operators(test_fn, x0: float):
    sp, x, f = _symbolic(test_fn)
    w = sp.tanh(x - x0)
    half_alpha2 = 2 / sp.cosh(x - x0) ** 2

    def L(g):
        return -sp.diff(g, x) + w * g

    def Ldag(g):
        return sp.diff(g, x) + w * g

    def H0(g):
        return -sp.diff(g, x, 2)

    def H1(g):
        return -sp.diff(g, x, 2) - half_alpha2 * g

    return sp, x, f, L, Ldag, H0, H1


def _relnorm(sp, x, expr, f, grid):
    rf = sp.lambdify(x, expr, "numpy")
    ff = sp.lambdify(x, f, "numpy")
    r = np.broadcast_to(rf(grid.x), grid.x.shape)
    v = np.broadcast_to(ff(grid.x), grid.x.shape)
    return grid.norm(r) / grid.norm(v)


def intertwining_residual(test_fn, grid: Grid, x0: float = 0.0) -> float:
    """||(L H0 - H1 L) f|| / ||f|| for a closed-form test function ``f(x)``.

    ``test_fn`` is a sympy expression or string in ``x``. Both sides are
    differentiated symbolically and only the difference is sampled.
    """
    sp, x, f, L, _, H0, H1 = _apply_operators(test_fn, x0)
    return _relnorm(sp, x, L(H0(f)) - H1(L(f)), f, grid)


def factorization_residuals(test_fn, grid: Grid, x0: float = 0.0) -> tuple[float, float]:
    """Relative residuals of L^+L = H0 + 1 and L L^+ = H1 + 1 on ``f``."""
    sp, x, f, L, Ldag, H0, H1 = _apply_operators(test_fn, x0)
    r1 = _relnorm(sp, x, Ldag(L(f)) - H0(f) - f, f, grid)
    r2 = _relnorm(sp, x, L(Ldag(f)) - H1(f) - f, f, grid)
    return r1, r2


# --------------------------------------------------------------------------
# zero-energy seed of H_{2,l}


@dataclass
class FactorizationSeed:
    """Samples of u and u' on the grid nodes plus the nodes of u in (0, L)."""

    x0: np.ndarray | float
    l: int
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    node_positions: list

    @property
    def nodes(self):
        if isinstance(self.node_positions, list) and self.node_positions \
                and isinstance(self.node_positions[0], list):
            return np.array([len(p) for p in self.node_positions])
        return len(self.node_positions)

    def __iter__(self):
        # allows ``u, nodes = h2l_factorization_seed(...)``
        yield self.u
        yield self.nodes


def _seed_start(x0, l: int, x: float, terms: int = 16):
    """Frobenius values u(x), u'(x) of the regular solution u ~ x^(l+1).

    With Q(x) = 1/2 - alpha^2/2 = 1/2 - 2 y(x), y = sech^2(x - x0), the
    Taylor coefficients of y follow from y'' = 4y - 6y^2, and the series
    u = x^(l+1) sum c_k x^k obeys c_k k (k + 2l + 1) = sum_j Q_j c_(k-2-j).
    """
    x0 = np.asarray(x0, dtype=float)
    t = np.tanh(-x0)
    s2 = 1.0 - t * t
    y = [s2, -2.0 * s2 * t]
    for k in range(terms - 2):
        conv = sum(y[i] * y[k - i] for i in range(k + 1))
        y.append((4.0 * y[k] - 6.0 * conv) / ((k + 2) * (k + 1)))
    Q = [-2.0 * yk for yk in y]
    Q[0] = Q[0] + 0.5
    c = [np.ones_like(x0), np.zeros_like(x0)]
    for k in range(2, terms):
        c.append(sum(Q[j] * c[k - 2 - j] for j in range(k - 1)) / (k * (k + 2 * l + 1)))
    u = sum(ck * x ** (k + l + 1) for k, ck in enumerate(c))
    du = sum((k + l + 1) * ck * x ** (k + l) for k, ck in enumerate(c))
    return u, du


def h2l_factorization_seed(x0, l: int, grid: Grid) -> FactorizationSeed:
    """Integrate H_{2,l} u = 0 outward from x=h with u ~ x^(l+1).

    ``x0`` may be an array, in which case all seeds are integrated in one
    vectorized RK4 sweep and ``nodes`` is an array of counts.
    """
    if l < 0 or int(l) != l:
        raise InvalidParameterError(f"l must be a non-negative integer, got {l}")
    l = int(l)
    x0a = np.atleast_1d(np.asarray(x0, dtype=float))
    cent = l * (l + 1)

    def coeff(x):
        al = unit_alpha(x0a[None, :], x[:, None])
        q = cent / (x * x)[:, None] - 0.5 * al * al + 0.5
        A = np.zeros(q.shape + (2, 2))
        A[..., 0, 1] = 1.0
        A[..., 1, 0] = q
        return A

    u0, du0 = _seed_start(x0a, l, grid.h)
    y0 = np.stack((u0, du0), axis=-1)
    h = grid.h
    # near the origin l(l+1)/x^2 is stiff on the scale h: refine the step there
    k = min(grid.n, max(1, int(round(NEAR_ORIGIN / h))))
    inner = integrate_linear_ivp(coeff, h, k * h, y0, h / SUBSTEPS, watch=(0,))
    ys = [inner.y[::SUBSTEPS]]
    nodes = inner.nodes[0]
    if k < grid.n + 1:
        outer = integrate_linear_ivp(coeff, k * h, grid.L, inner.y[-1].T, h, watch=(0,))
        ys.append(outer.y[1:])
        nodes = [a + b for a, b in zip(nodes, outer.nodes[0])]
    ytraj = np.concatenate(ys)
    u = ytraj[:-1, 0, :]
    du = ytraj[:-1, 1, :]
    # a sign change in the last step (into x=L) lies outside the open interval
    nodes = [[p for p in pos if p < grid.L] for pos in nodes]
    if np.ndim(x0) == 0:
        return FactorizationSeed(float(x0), l, grid.x, u[:, 0], du[:, 0], nodes[0])
    return FactorizationSeed(x0a, l, grid.x, u, du, nodes)


def nodeless_threshold(l: int, grid: Grid, lo: float, hi: float, tol: float = 1e-6,
                       batch: int = 16) -> float:
    """Locate the x0 where the seed u acquires its first node.

    The bracket [lo, hi] is refined by evaluating ``batch`` interior points
    per vectorized RK4 sweep (a multi-point bisection).
    """
    ends = h2l_factorization_seed(np.array([lo, hi]), l, grid).nodes
    if ends[0] > 0 or ends[1] == 0:
        raise InvalidParameterError(f"[{lo}, {hi}] does not bracket the node transition for l={l}")
    while hi - lo > tol:
        pts = np.linspace(lo, hi, batch + 2)[1:-1]
        noded = h2l_factorization_seed(pts, l, grid).nodes > 0
        k = int(np.argmax(noded)) if noded.any() else batch
        lo_new = pts[k - 1] if k > 0 else lo
        hi_new = pts[k] if k < batch else hi
        lo, hi = lo_new, hi_new
    return 0.5 * (lo + hi)


__all__ = [
    "X_J", "KAPPA_J", "SusyData", "phi_exact", "phi_exact_derivative", "wronskian",
    "bound_state_level", "intertwining_residual", "factorization_residuals",
    "FactorizationSeed", "h2l_factorization_seed", "nodeless_threshold",
]
