"""Uniform-grid numerics: finite differences, eigen-solves, RK4 and quadrature.

Two discretizations of ``-d^2/dx^2 + q(x)`` with Dirichlet ends live here:

* :class:`TridiagonalOperator`, the classic 3-point stencil (second order).
  Its lowest eigenpairs come from Sturm-sequence bisection followed by
  inverse iteration.
* :class:`BandedOperator`, a 5-point stencil (fourth order) whose boundary
  rows use one-sided 6-point stencils through the known zero at x=0 and x=L.
  Its eigenpairs are obtained by shifted inverse iteration seeded from the
  tridiagonal solution, so only banded LU solves are needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, sparse
from scipy.linalg import LinAlgError, eigh_tridiagonal, solve_banded

from .errors import BlowUpError, DiscretizationError, InvalidParameterError, NumericalFailure

BISECTION_TOL = 1e-10
REFINE_RESIDUAL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Interior nodes x_i = i h, i = 1..n, of the interval [0, L]."""

    L: float = 100.0
    n: int = 8000

    def __post_init__(self):
        if not self.L > 0:
            raise InvalidParameterError(f"grid length must be positive, got {self.L}")
        if int(self.n) != self.n or self.n < 6:
            raise InvalidParameterError(f"need at least 6 interior nodes, got {self.n}")

    @property
    def h(self) -> float:
        return self.L / (self.n + 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = self.h * np.arange(1, self.n + 1)
        x.setflags(write=False)
        return x

    def coarsened(self, n: int) -> "Grid":
        return Grid(self.L, min(self.n, n))

    def norm(self, v) -> float:
        """Discrete L2 norm sqrt(h sum |v|^2)."""
        v = np.asarray(v)
        return math.sqrt(self.h * float(np.vdot(v, v).real))

    def tail_mask(self, fraction: float = 0.1) -> np.ndarray:
        return self.x >= (1.0 - fraction) * self.L


def _sample(grid: Grid, potential) -> np.ndarray:
    q = potential(grid.x) if callable(potential) else potential
    q = np.broadcast_to(np.asarray(q, dtype=float), (grid.n,))
    bad = np.flatnonzero(~np.isfinite(q))
    if bad.size:
        i = int(bad[0])
        raise DiscretizationError(f"potential is not finite at node {i} (x={grid.x[i]:.6g})")
    return q


# --------------------------------------------------------------------------
# second order: symmetric tridiagonal


@dataclass(frozen=True)
class TridiagonalOperator:
    diagonal: np.ndarray
    offdiagonal: np.ndarray

    def __post_init__(self):
        if self.offdiagonal.shape[0] != self.diagonal.shape[0] - 1:
            raise InvalidParameterError("off-diagonal must have length n-1")

    @property
    def n(self) -> int:
        return self.diagonal.shape[0]

    def matvec(self, v):
        r = self.diagonal * v
        r[:-1] += self.offdiagonal * v[1:]
        r[1:] += self.offdiagonal * v[:-1]
        return r

    def norm_inf(self) -> float:
        a = np.abs(self.diagonal).copy()
        a[:-1] += np.abs(self.offdiagonal)
        a[1:] += np.abs(self.offdiagonal)
        return float(a.max())

    def shifted(self, c: float) -> "TridiagonalOperator":
        return TridiagonalOperator(self.diagonal + c, self.offdiagonal)


def discretize_schrodinger(grid: Grid, potential) -> TridiagonalOperator:
    """3-point discretization of -d^2/dx^2 + q(x) on the interior nodes.

    ``potential`` is either a callable of x or an array of node values.
    """
    q = _sample(grid, potential)
    h2 = grid.h**2
    return TridiagonalOperator(2.0 / h2 + q, np.full(grid.n - 1, -1.0 / h2))


def sturm_count(T: TridiagonalOperator, mu: float) -> int:
    """Number of eigenvalues of ``T`` strictly below ``mu``.

    Counts negative pivots of the LDL^T factorization of T - mu I.
    """
    d = T.diagonal
    e2 = T.offdiagonal**2
    tiny = np.finfo(float).tiny
    count = 0
    p = d[0] - mu
    if p < 0:
        count += 1
    for i in range(1, T.n):
        if p == 0.0:
            p = tiny
        p = d[i] - mu - e2[i - 1] / p
        if p < 0:
            count += 1
    return count


def _fix_sign(v: np.ndarray) -> np.ndarray:
    scale = np.abs(v).max()
    if scale == 0:
        return v
    first = np.flatnonzero(np.abs(v) > 1e-12 * scale)[0]
    return -v if v[first] < 0 else v


def lowest_eigenpairs(T: TridiagonalOperator, k: int = 1, h: float = 1.0):
    """The ``k`` algebraically smallest eigenpairs of ``T``.

    LAPACK's ``stebz`` (Sturm bisection) and ``stein`` (inverse iteration)
    do the work. Vectors are scaled so that ``h * sum(v**2) == 1`` and the
    first non-negligible component is positive.
    """
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    k = min(k, T.n)
    try:
        w, V = eigh_tridiagonal(
            T.diagonal, T.offdiagonal, select="i", select_range=(0, k - 1),
            tol=BISECTION_TOL,
        )
    except LinAlgError as exc:
        raise NumericalFailure(f"bisection/inverse iteration failed: {exc}") from exc
    norm_t = T.norm_inf()
    out = []
    for j in range(k):
        v = V[:, j]
        res = np.linalg.norm(T.matvec(v) - w[j] * v) / np.linalg.norm(v)
        if res > REFINE_RESIDUAL * norm_t:
            raise NumericalFailure(f"eigenvector {j} residual {res:.3e} above tolerance")
        v = _fix_sign(v / math.sqrt(h * float(v @ v)))
        out.append((float(w[j]), v))
    return out


def lowest_eigenvalues(T: TridiagonalOperator, k: int = 1) -> np.ndarray:
    from scipy.linalg import eigvalsh_tridiagonal

    try:
        return eigvalsh_tridiagonal(
            T.diagonal, T.offdiagonal, select="i", select_range=(0, min(k, T.n) - 1),
            tol=BISECTION_TOL,
        )
    except LinAlgError as exc:
        raise NumericalFailure(f"bisection failed: {exc}") from exc


# --------------------------------------------------------------------------
# fourth order finite differences


def fornberg_weights(z: float, nodes: Sequence[float], m: int) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at ``z`` (Fornberg 1988)."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = nodes[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - z
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def derivative_matrix(n: int, h: float, order: int, dirichlet: bool = True,
                      accuracy: int = 4) -> sparse.csr_matrix:
    """d^order/dx^order on interior nodes (order 1 or 2), accuracy 4 or 6.

    Interior rows use the centred (accuracy+1)-point stencil. With
    ``dirichlet`` the function is taken to vanish at x=0 and x=L, and the
    rows too close to a wall use one-sided (accuracy+2)-point stencils
    through that zero. Otherwise the edge rows use one-sided stencils on
    interior nodes only (no boundary value assumed).
    """
    if order not in (1, 2):
        raise InvalidParameterError("only first and second derivatives are provided")
    if accuracy not in (4, 6):
        raise InvalidParameterError("accuracy must be 4 or 6")
    half = accuracy // 2
    if n < 2 * (accuracy + 2):
        raise InvalidParameterError(f"need at least {2 * (accuracy + 2)} nodes")
    rows, cols, vals = [], [], []
    scale = h**order

    def put(i, cols_, w, sign=1.0):
        for j, wk in zip(cols_, w):
            # columns -1 and n are the walls, where the function vanishes
            if wk != 0.0 and 0 <= j < n:
                rows.append(i)
                cols.append(int(j))
                vals.append(sign * wk / scale)

    centred = np.arange(-half, half + 1)
    wc = fornberg_weights(0.0, centred, order)
    # node index i sits at x=(i+1)h; the wall is index -1
    if dirichlet:
        n_edge = half - 1
        left_nodes = np.arange(-1, accuracy + 1)
    else:
        n_edge = half
        left_nodes = np.arange(0, accuracy + 2)
    keep = left_nodes >= 0
    sign = (-1.0) ** order
    for r in range(n_edge):
        w = fornberg_weights(float(r), left_nodes, order)[keep]
        put(r, left_nodes[keep], w)
        put(n - 1 - r, n - 1 - left_nodes[keep], w, sign)
    for i in range(n_edge, n - n_edge):
        put(i, i + centred, wc)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def bandwidths(A) -> tuple[int, int]:
    A = sparse.coo_matrix(A)
    d = A.col - A.row
    return int(max(0, -d.min())), int(max(0, d.max()))


def to_banded(A, lu: tuple[int, int] | None = None) -> tuple[tuple[int, int], np.ndarray]:
    """Convert a sparse matrix to the ``ab`` layout used by ``solve_banded``."""
    A = sparse.coo_matrix(A)
    l, u = lu if lu is not None else bandwidths(A)
    ab = np.zeros((l + u + 1, A.shape[1]), dtype=A.dtype)
    ab[u + A.row - A.col, A.col] = A.data
    return (l, u), ab


@dataclass
class BandedOperator:
    """Sparse matrix with cached banded layout; fourth-order Schrodinger form."""

    matrix: sparse.csr_matrix
    _lu: tuple[int, int] = field(init=False)
    _ab: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.matrix = sparse.csr_matrix(self.matrix)
        self._lu, self._ab = to_banded(self.matrix)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, v):
        return self.matrix @ v

    def norm_inf(self) -> float:
        return float(abs(self.matrix).sum(axis=1).max())

    def solve_shifted(self, mu: float, rhs: np.ndarray) -> np.ndarray:
        l, u = self._lu
        ab = self._ab.copy()
        ab[u] -= mu
        try:
            return solve_banded((l, u), ab, rhs, check_finite=False)
        except LinAlgError as exc:
            raise NumericalFailure(f"banded solve failed at shift {mu!r}: {exc}") from exc


_DIFF_CACHE: dict = {}


def grid_derivative(grid: Grid, order: int, dirichlet: bool = True,
                    accuracy: int = 4) -> sparse.csr_matrix:
    """Cached :func:`derivative_matrix` for ``grid``."""
    key = (grid.L, grid.n, order, dirichlet, accuracy)
    if key not in _DIFF_CACHE:
        if len(_DIFF_CACHE) > 16:
            _DIFF_CACHE.clear()
        _DIFF_CACHE[key] = derivative_matrix(grid.n, grid.h, order, dirichlet, accuracy)
    return _DIFF_CACHE[key]


def laplacian4(grid: Grid) -> sparse.csr_matrix:
    return grid_derivative(grid, 2, True)


def discretize_schrodinger4(grid: Grid, potential) -> BandedOperator:
    """Fourth-order counterpart of :func:`discretize_schrodinger`."""
    q = _sample(grid, potential)
    return BandedOperator(-laplacian4(grid) + sparse.diags(q))


def refine_eigenpair(op: BandedOperator, mu: float, v: np.ndarray, h: float = 1.0,
                     max_iter: int = 25):
    """Shifted inverse iteration with Rayleigh-type shift updates.

    Starts from an approximate pair (``mu``, ``v``), for example the
    3-point solution, and converges to the eigenvalue of ``op`` nearest to
    ``mu``. Returns ``(mu, v)`` with ``v`` normalized like
    :func:`lowest_eigenpairs`.
    """
    norm_a = op.norm_inf()
    v = np.asarray(v, dtype=float) / np.linalg.norm(v)
    res = np.inf
    for _ in range(max_iter):
        y = op.solve_shifted(mu, v)
        yy = float(y @ y)
        if not np.isfinite(yy):
            raise NumericalFailure("inverse iteration overflowed")
        step = float(y @ v) / yy
        v = y / math.sqrt(yy)
        mu_new = mu + step
        res = np.linalg.norm(op.matvec(v) - mu_new * v)
        done = abs(mu_new - mu) <= 1e-15 * max(1.0, abs(mu_new)) or res <= 1e-13 * norm_a
        mu = mu_new
        if done:
            break
    if res > REFINE_RESIDUAL * norm_a:
        raise NumericalFailure(f"inverse iteration stalled, residual {res:.3e}")
    v = _fix_sign(v / math.sqrt(h * float(v @ v)))
    return float(mu), v


def ground_state4(grid: Grid, potential):
    """Lowest eigenpair of the fourth-order operator, seeded by the 3-point one."""
    q = _sample(grid, potential)
    (mu0, v0), = lowest_eigenpairs(discretize_schrodinger(grid, q), 1, grid.h)
    return refine_eigenpair(discretize_schrodinger4(grid, q), mu0, v0, grid.h)


def d1(grid: Grid, f, dirichlet: bool = True) -> np.ndarray:
    return grid_derivative(grid, 1, dirichlet) @ np.asarray(f)


def d2(grid: Grid, f, dirichlet: bool = True) -> np.ndarray:
    return grid_derivative(grid, 2, dirichlet) @ np.asarray(f)


# --------------------------------------------------------------------------
# initial value problems


@dataclass
class Trajectory:
    x: np.ndarray
    y: np.ndarray  # shape (len(x),) + y0.shape
    nodes: list  # per watched component: list of sign-change abscissae

    def node_count(self, component=0) -> int:
        return len(self.nodes[component])


def integrate_ivp(rhs: Callable, x_start: float, x_end: float, y0, step: float,
                  watch: Sequence[int] | None = (0,), blowup: float = 1e250) -> Trajectory:
    """Fixed-step classical RK4 from ``x_start`` to ``x_end``.

    ``y0`` may be any array; ``rhs(x, y)`` must return an array of the same
    shape. For each index in ``watch`` (into the leading axis of y) the sign
    changes along the trajectory are located by one secant step per bracket.
    When the leading component is itself batched (y0 of shape (m, k)) the
    nodes are collected per column.
    """
    y = np.array(y0, dtype=float)
    nsteps = max(1, int(round((x_end - x_start) / step)))
    hs = (x_end - x_start) / nsteps
    xs = x_start + hs * np.arange(nsteps + 1)
    ys = np.empty((nsteps + 1,) + y.shape)
    ys[0] = y
    for i in range(nsteps):
        x = xs[i]
        k1 = rhs(x, y)
        k2 = rhs(x + 0.5 * hs, y + 0.5 * hs * k1)
        k3 = rhs(x + 0.5 * hs, y + 0.5 * hs * k2)
        k4 = rhs(x + hs, y + hs * k3)
        y = y + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.abs(y).max() > blowup:
            raise BlowUpError(f"state overflow after x={x:.6g}", last_x=float(x))
        ys[i + 1] = y
    nodes = []
    for c in watch or ():
        comp = ys[:, c]
        nodes.append(_sign_changes(xs, comp))
    return Trajectory(xs, ys, nodes)


def integrate_linear_ivp(coeff: Callable, x_start: float, x_end: float, y0, step: float,
                         watch: Sequence[int] | None = (0,), blowup: float = 1e250) -> Trajectory:
    """Classical RK4 for a linear system y' = A(x) y.

    ``coeff(x)`` takes an array of abscissae and returns A with shape
    ``(len(x), ..., d, d)``; ``y0`` has shape ``(..., d)``. For linear
    right-hand sides each RK4 step is multiplication by a fixed matrix
    polynomial in A, so those are built in one vectorized pass and only the
    chained products run sequentially. The result is identical to
    :func:`integrate_ivp` with ``rhs = A(x) @ y``. ``trajectory.y`` has shape
    ``(len(x), d, ...)`` so watched components index the leading state axis.
    """
    y = np.array(y0, dtype=float)
    nsteps = max(1, int(round((x_end - x_start) / step)))
    hs = (x_end - x_start) / nsteps
    xs = x_start + hs * np.arange(nsteps + 1)
    A1 = coeff(xs[:-1])
    A2 = coeff(xs[:-1] + 0.5 * hs)
    A4 = coeff(xs[1:])
    eye = np.eye(y.shape[-1])
    K1 = A1
    K2 = A2 @ (eye + 0.5 * hs * K1)
    K3 = A2 @ (eye + 0.5 * hs * K2)
    K4 = A4 @ (eye + hs * K3)
    M = eye + (hs / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
    del A1, A2, A4, K1, K2, K3, K4
    ys = np.empty((nsteps + 1,) + y.shape)
    ys[0] = y
    yc = y[..., None]
    for i in range(nsteps):
        yc = M[i] @ yc
        ys[i + 1] = yc[..., 0]
        if i % 64 == 63 or i == nsteps - 1:
            chunk = ys[max(0, i - 63): i + 2]
            if not np.all(np.isfinite(chunk)) or np.abs(chunk).max() > blowup:
                bad = max(0, i - 63) + int(np.argmax(
                    ~np.isfinite(chunk).reshape(len(chunk), -1).all(axis=1)
                    | (np.abs(np.nan_to_num(chunk, nan=np.inf)).reshape(len(chunk), -1).max(axis=1) > blowup)))
                raise BlowUpError(f"state overflow after x={xs[bad - 1]:.6g}", last_x=float(xs[bad - 1]))
    ys = np.moveaxis(ys, -1, 1)
    nodes = [_sign_changes(xs, ys[:, c]) for c in (watch or ())]
    return Trajectory(xs, ys, nodes)


def _sign_changes(xs, comp):
    comp = np.asarray(comp)
    if comp.ndim > 1:
        return [_sign_changes(xs, comp[:, j]) for j in range(comp.shape[1])]
    s = np.sign(comp)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    out = []
    for i in idx:
        a, b = comp[i], comp[i + 1]
        out.append(float(xs[i] - a * (xs[i + 1] - xs[i]) / (b - a)))
    # exact zeros in the interior count once
    for i in np.flatnonzero(s[1:-1] == 0) + 1:
        if s[i - 1] * s[i + 1] < 0:
            out.append(float(xs[i]))
    return sorted(out)


# --------------------------------------------------------------------------
# quadrature


def quadrature(f, h: float) -> float:
    """Composite Simpson rule for uniformly spaced samples ``f``."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] < 3:
        raise InvalidParameterError("Simpson quadrature needs at least 3 samples")
    return float(integrate.simpson(f, dx=h))


def cumulative_quadrature(f, h: float, initial: float = 0.0) -> np.ndarray:
    """Running integral int_{x_0}^{x_i} f, same length as ``f``."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] < 3:
        raise InvalidParameterError("Simpson quadrature needs at least 3 samples")
    return integrate.cumulative_simpson(f, dx=h, initial=initial)
