"""The matrix pipeline linking the coupled dynamo operator to the pencils.

In a=1 units, with sigma_- = [[0,0],[1,0]] and sigma_+ = [[0,1],[0,0]],

    K = I - alpha sigma_-,   M = -K l(l+1)/x^2 + alpha sigma_+,
    P = I - (alpha/2) sigma_-   (P^2 = K),
    Phi = P^{-1} Xi,         Xi = U (F_+, F_-)^T,   U = [[1, 1], [eps, -eps]].

The coupled problem (d/dx K d/dx + M) Phi = lambda Phi is assembled here as a
fourth-order 2n x 2n banded matrix (components interleaved node by node),
used to certify reconstructed pencil states by residual and by one step of
inverse iteration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import eigh_tridiagonal

from .errors import JordanRegimeError, UndefinedRatioError
from .kernels import (BandedOperator, Grid, discretize_schrodinger, discretize_schrodinger4,
                      grid_derivative, refine_eigenpair)
from .pencil import JORDAN_EPS, PencilSolution, reduced_potential
from .profile import AlphaProfile, alpha_derivatives, unit_alpha

SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]])
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])
I2 = np.eye(2)
FULL_SYSTEM_ACCURACY = 6


def _field(a):
    return a[:, None, None]


@dataclass
class MatrixPipeline:
    """K, M, P, P^-1 and V sampled on the grid (shape (n, 2, 2)), plus U."""

    x0: float
    l: int
    epsilon: float
    grid: Grid = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    dalpha: np.ndarray = field(repr=False)
    d2alpha: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    Pinv: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)

    @property
    def lam(self) -> float:
        return 0.5 - self.epsilon**2

    @property
    def centrifugal(self) -> np.ndarray:
        return self.l * (self.l + 1) / self.grid.x**2

    @property
    def Uinv(self) -> np.ndarray:
        if abs(self.epsilon) <= JORDAN_EPS:
            raise JordanRegimeError(
                f"U is singular at eps={self.epsilon:.3g}; use the perturbation module")
        e = self.epsilon
        return np.array([[0.5, 0.5 / e], [0.5, -0.5 / e]])

    def diagonalized_V(self) -> np.ndarray:
        return self.Uinv @ self.V @ self.U

    def V_eigenvalues(self) -> np.ndarray:
        """Closed-form eigenvalues alpha^2/2 - lambda +/- eps alpha, shape (n, 2)."""
        base = 0.5 * self.alpha**2 - self.lam
        return np.stack((base + self.epsilon * self.alpha, base - self.epsilon * self.alpha), axis=1)


def build_pipeline(x0: float, l: int, epsilon: float, grid: Grid) -> MatrixPipeline:
    x = grid.x
    al = unit_alpha(x0, x)
    d1a, d2a = alpha_derivatives(AlphaProfile(1.0, x0), x)
    c = l * (l + 1) / (x * x)
    lam = 0.5 - epsilon**2
    A = _field(al)
    K = I2 - A * SIGMA_MINUS
    M = -K * _field(c) + A * SIGMA_PLUS
    P = I2 - 0.5 * A * SIGMA_MINUS
    Pinv = I2 + 0.5 * A * SIGMA_MINUS
    V = np.empty((grid.n, 2, 2))
    V[:, 0, 0] = V[:, 1, 1] = 0.5 * al**2 - lam
    V[:, 0, 1] = al
    V[:, 1, 0] = 0.5 * d2a + 0.25 * al**3 - al * lam
    U = np.array([[1.0, 1.0], [epsilon, -epsilon]])
    return MatrixPipeline(float(x0), int(l), float(epsilon), grid, al, d1a, d2a,
                          K, M, P, Pinv, V, U)


def reconstruct_phi(sol: PencilSolution, pipe: MatrixPipeline):
    """Phi = P^-1 U (F_+, 0)^T for a pencil bound state."""
    if abs(sol.epsilon) <= JORDAN_EPS:
        raise JordanRegimeError(
            f"eps={sol.epsilon:.3g} is at the Jordan point; U is not invertible there")
    Fp = np.asarray(sol.F, dtype=float)
    Fm = np.zeros_like(Fp)
    Xi = pipe.U @ np.stack((Fp, Fm))  # (2, n)
    Phi = np.einsum("nij,jn->in", pipe.Pinv, Xi)
    return Phi[0], Phi[1]


def components_from_phi(Phi1, Phi2, pipe: MatrixPipeline):
    """(F_+, F_-) = U^-1 P Phi, written out componentwise.

    F_+/- = +/- [Phi2 - (alpha/2 -/+ eps) Phi1] / (2 eps).
    """
    e = pipe.epsilon
    if abs(e) <= JORDAN_EPS:
        raise JordanRegimeError(f"eps={e:.3g}: cannot invert U at the Jordan point")
    h = 0.5 * pipe.alpha
    Fp = (Phi2 - (h - e) * Phi1) / (2 * e)
    Fm = -(Phi2 - (h + e) * Phi1) / (2 * e)
    return Fp, Fm


def field_link_residual(Phi1, Phi2, pipe: MatrixPipeline) -> float:
    """||Phi2 - (alpha/2 + eps) Phi1|| / ||Phi2||; zero when F_- vanishes."""
    n2 = pipe.grid.norm(Phi2)
    if n2 == 0.0:
        raise UndefinedRatioError("Phi2 has zero norm")
    return pipe.grid.norm(Phi2 - (0.5 * pipe.alpha + pipe.epsilon) * Phi1) / n2


# --------------------------------------------------------------------------
# the coupled operator


def full_system_matrix(pipe: MatrixPipeline) -> sparse.csr_matrix:
    """(d/dx K d/dx + M) with unknowns ordered (Phi1_1, Phi2_1, Phi1_2, ...).

    The flux term is expanded as K Phi'' + K' Phi' with the closed-form
    K' = -alpha' sigma_-, discretized with sixth-order Dirichlet stencils.
    The pencil states are fourth-order accurate but their error has no
    F_- part; the coupled operator's own error does, and splitting Phi
    into F_+/- divides it by 2 eps, so this operator is kept one order
    sharper.
    """
    g = pipe.grid
    D1 = grid_derivative(g, 1, True, FULL_SYSTEM_ACCURACY)
    D2 = grid_derivative(g, 2, True, FULL_SYSTEM_ACCURACY)
    c = sparse.diags(pipe.centrifugal)
    a = sparse.diags(pipe.alpha)
    da = sparse.diags(pipe.dalpha)
    ac = sparse.diags(pipe.alpha * pipe.centrifugal)
    blocks = [
        [D2 - c, a],
        [-(da @ D1) - a @ D2 + ac, D2 - c],
    ]
    A = sparse.bmat(blocks, format="csr")
    n = g.n
    perm = np.empty(2 * n, dtype=int)
    perm[0::2] = np.arange(n)
    perm[1::2] = n + np.arange(n)
    return A[perm][:, perm]


def _interleave(Phi1, Phi2):
    out = np.empty(2 * len(Phi1))
    out[0::2] = Phi1
    out[1::2] = Phi2
    return out


def full_system_residual(Phi1, Phi2, pipe: MatrixPipeline, lam: float | None = None) -> float:
    """Relative residual ||(dKd + M - lambda) Phi|| / ||Phi||."""
    lam = pipe.lam if lam is None else lam
    v = _interleave(Phi1, Phi2)
    r = full_system_matrix(pipe) @ v - lam * v
    return math.sqrt(float(r @ r) / float(v @ v))


def inverse_iteration_step(Phi1, Phi2, pipe: MatrixPipeline, lam: float | None = None):
    """One shifted inverse-iteration step on the banded coupled system.

    Returns ``(lambda_new, Phi1_new, Phi2_new)``; ``lambda_new`` is the
    least-squares eigenvalue estimate from the solve.
    """
    lam = pipe.lam if lam is None else lam
    op = BandedOperator(full_system_matrix(pipe))
    v = _interleave(Phi1, Phi2)
    y = op.solve_shifted(lam, v)
    lam_new = lam + float(y @ v) / float(y @ y)
    scale = math.sqrt(float(v @ v) / float(y @ y)) * np.sign(float(y @ v))
    y = y * scale
    return lam_new, y[0::2], y[1::2]


def jordan_form_check(x0: float, l: int, grid: Grid) -> float:
    """Max deviation of the eps=0 system from the upper-triangular Jordan form.

    At lambda = 1/2 the non-derivative part -l(l+1)/x^2 + V should equal
    [[-V0, -V1], [0, -V0]] with V0 = l(l+1)/x^2 - (alpha^2 - 1)/2, V1 = -alpha.
    """
    pipe = build_pipeline(x0, l, 0.0, grid)
    c = pipe.centrifugal
    S = pipe.V - _field(c) * I2
    V0 = c - 0.5 * (pipe.alpha**2 - 1.0)
    V1 = -pipe.alpha
    target = np.zeros_like(S)
    target[:, 0, 0] = target[:, 1, 1] = -V0
    target[:, 0, 1] = -V1
    return float(np.abs(S - target).max())


@dataclass(frozen=True)
class SelectionReport:
    """Which pencil branch carries the state at a given (x0, l, eps)."""

    suppressed_ratio: float
    partner_levels: int
    lam_shift: float

    @property
    def ok(self) -> bool:
        return self.partner_levels == 0 and self.suppressed_ratio < 1e-6


def partner_levels(x0: float, l: int, eps: float, grid: Grid, window: float = 1e-3,
                   tol: float = 1e-8) -> int:
    """Eigenvalues of the opposite-branch operator that coincide with -lambda.

    The F_- pencil at the same eps has potential q + eps alpha (the F_+ one
    has q - eps alpha). Candidates within ``window`` of -lambda on the
    3-point grid are refined on the fourth-order operator; a level counts
    when it lands within ``tol`` of -lambda.
    """
    q = reduced_potential(x0, l, grid, b=eps)
    target = -(0.5 - eps * eps)
    T = discretize_schrodinger(grid, q)
    mus, vs = eigh_tridiagonal(T.diagonal, T.offdiagonal, select="v",
                               select_range=(target - window, target + window))
    if mus.size == 0:
        return 0
    op = discretize_schrodinger4(grid, q)
    hits = 0
    for mu, v in zip(mus, vs.T):
        mu4, _ = refine_eigenpair(op, float(mu), v / math.sqrt(grid.h), grid.h)
        hits += abs(mu4 - target) < tol
    return int(hits)


def selection_rule(sol: PencilSolution, pipe: MatrixPipeline | None = None) -> SelectionReport:
    """Check that only the F_+ branch carries the bound state.

    The reconstructed Phi is pushed through one inverse-iteration step of
    the coupled operator and split back into (F_+, F_-); the F_- share must
    stay below 1e-6 and the F_- pencil must have no level at -lambda.
    """
    pipe = pipe or build_pipeline(sol.x0, sol.l, sol.epsilon, sol.grid)
    Phi1, Phi2 = reconstruct_phi(sol, pipe)
    lam_new, P1, P2 = inverse_iteration_step(Phi1, Phi2, pipe)
    Fp, Fm = components_from_phi(P1, P2, pipe)
    g = pipe.grid
    ratio = g.norm(Fm) / g.norm(Fp)
    return SelectionReport(float(ratio), partner_levels(sol.x0, sol.l, sol.epsilon, g),
                           float(lam_new - pipe.lam))
