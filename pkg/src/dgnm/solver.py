"""Discrete divergence-form operators and Dirichlet energy minimisation.

Two schemes share one convention: unknowns live at active cell centres, the
operator is a symmetric positive semidefinite matrix over all active cells with
``A @ 1 == 0``, and ``u @ A @ u`` is the discrete Dirichlet energy.

``fv_tpfa``
    two-point flux finite volumes; transmissibility ``h**(d-2)`` times the
    harmonic mean of the two cells' directional conductivities. Requires
    diagonal cell matrices; yields an M-matrix (discrete maximum principle).
``fem_p1``
    continuous piecewise-linear elements on the Kuhn subdivision of the dual
    lattice (cubes spanned by 2**d neighbouring cell centres), with the cell
    matrix sampled at each simplex centroid. Accepts full symmetric matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .fields import CoefficientField, EllipticityPair
from .grid import BallGrid, DiscreteField, as_values

SCHEMES = ("fv_tpfa", "fem_p1")
DEFAULT_TOL = 1e-10
CLASSIFY_TOL = 1e-6


class ConvergenceError(RuntimeError):
    """Conjugate gradient hit its iteration cap above the requested tolerance."""

    def __init__(self, residual: float, iterations: int, tol: float):
        self.residual = residual
        self.iterations = iterations
        self.tol = tol
        super().__init__(
            f"CG stopped after {iterations} iterations at relative residual "
            f"{residual:.3e} (requested {tol:.1e})"
        )


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    matrix: sp.csr_matrix
    scheme: str
    grid: BallGrid
    ellipticity: EllipticityPair

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(self.grid.interior)

    @property
    def fixed(self) -> np.ndarray:
        return np.flatnonzero(self.grid.boundary_layer)

    def energy(self, u) -> float:
        v = as_values(u, self.grid)
        return float(v @ (self.matrix @ v))

    def norm_inf(self) -> float:
        return float(abs(self.matrix).sum(axis=1).max())


@dataclass(frozen=True, eq=False)
class DiscreteGradient:
    """Piecewise-constant gradient on faces (fv_tpfa) or simplices (fem_p1).

    ``support`` lists the cells each face/simplex touches, ``weights`` the
    quadrature volume attached to it, so that ``sum(weights * |values|**2)``
    is the identity-coefficient energy of the scheme.
    """

    grid: BallGrid
    scheme: str
    values: np.ndarray
    weights: np.ndarray
    support: np.ndarray

    def energy(self) -> float:
        return float(np.sum(self.weights * np.sum(self.values**2, axis=1)))


@dataclass(frozen=True)
class WeakType:
    kind: str
    subsolution: bool
    supersolution: bool
    max_residual: float
    min_residual: float
    scale: float


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _assemble_fv(a: CoefficientField, grid: BallGrid) -> sp.csr_matrix:
    if not a.is_diagonal():
        raise ValueError("fv_tpfa needs diagonal cell matrices; use fem_p1 for full tensors")
    left, right, axis = grid.faces
    diag = a.diagonal()
    kl, kr = diag[left, axis], diag[right, axis]
    trans = grid.h ** (grid.dim - 2) * 2.0 * kl * kr / (kl + kr)
    n = grid.n_active
    rows = np.concatenate([left, right, left, right])
    cols = np.concatenate([left, right, right, left])
    vals = np.concatenate([trans, trans, -trans, -trans])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _simplex_difference(grid: BallGrid) -> np.ndarray:
    """Per permutation, the (d, d+1) map from vertex values to the gradient."""
    d, h = grid.dim, grid.h
    mats = np.zeros((len(grid.permutations), d, d + 1))
    for p, perm in enumerate(grid.permutations):
        for k, ax in enumerate(perm):
            mats[p, ax, k] = -1.0 / h
            mats[p, ax, k + 1] = 1.0 / h
    return mats


def _assemble_fem(a: CoefficientField, grid: BallGrid) -> sp.csr_matrix:
    verts, pid, sample = grid.simplices
    D = _simplex_difference(grid)[pid]
    coef = a.matrices(sample)
    vol = grid.h**grid.dim / math.factorial(grid.dim)
    local = vol * np.einsum("kia,kij,kjb->kab", D, coef, D)
    m = grid.dim + 1
    rows = np.repeat(verts, m, axis=1).ravel()
    cols = np.tile(verts, (1, m)).ravel()
    n = grid.n_active
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))


def assemble(a: CoefficientField, grid: BallGrid | None = None, scheme: str = "fv_tpfa") -> DiscreteOperator:
    _check_scheme(scheme)
    grid = a.grid if grid is None else grid
    if grid is not a.grid:
        raise ValueError("coefficient field lives on a different grid")
    if a.ellipticity.lam <= 0:
        raise ValueError("ellipticity lower bound must be positive")
    matrix = _assemble_fv(a, grid) if scheme == "fv_tpfa" else _assemble_fem(a, grid)
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    return DiscreteOperator(matrix.tocsr(), scheme, grid, a.ellipticity)


def as_operator(a, scheme: str = "fv_tpfa") -> DiscreteOperator:
    if isinstance(a, DiscreteOperator):
        return a
    return assemble(a, scheme=scheme)


def gradient(grid: BallGrid, u, scheme: str = "fv_tpfa") -> DiscreteGradient:
    _check_scheme(scheme)
    v = as_values(u, grid)
    if scheme == "fv_tpfa":
        left, right, axis = grid.faces
        g = np.zeros((left.size, grid.dim))
        g[np.arange(left.size), axis] = (v[right] - v[left]) / grid.h
        weights = np.full(left.size, grid.weight)
        return DiscreteGradient(grid, scheme, g, weights, np.column_stack([left, right]))
    verts, pid, _ = grid.simplices
    D = _simplex_difference(grid)
    g = np.einsum("kia,ka->ki", D[pid], v[verts])
    weights = np.full(verts.shape[0], grid.weight / math.factorial(grid.dim))
    return DiscreteGradient(grid, scheme, g, weights, verts)


def boundary_values(grid: BallGrid, g) -> np.ndarray:
    """Dirichlet data evaluated on all active cells (only boundary cells are used)."""
    if callable(g):
        vals = np.asarray(g(grid.centers), dtype=float)
        vals = np.broadcast_to(vals, (grid.n_active,)).copy()
    else:
        vals = np.array(as_values(g, grid), dtype=float)
        if vals.ndim == 0:
            vals = np.full(grid.n_active, float(vals))
    if vals.shape != (grid.n_active,):
        raise ValueError("boundary data has the wrong shape")
    if not np.all(np.isfinite(vals[grid.boundary_layer])):
        raise ValueError("boundary data must be finite on the boundary layer")
    return vals


def iteration_cap(grid: BallGrid) -> int:
    return 10 * grid.n * grid.dim


def solve_dirichlet(
    a,
    grid: BallGrid | None = None,
    g: Callable | np.ndarray | float = 0.0,
    tol: float = DEFAULT_TOL,
    scheme: str = "fv_tpfa",
    return_info: bool = False,
):
    """Minimise the discrete energy among fields equal to ``g`` on the boundary layer.

    Jacobi-preconditioned CG on the interior block, stopped at relative residual
    ``tol``; raises :class:`ConvergenceError` after ``10 * n * d`` iterations.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    op = as_operator(a, scheme)
    grid = op.grid if grid is None else grid
    if grid is not op.grid:
        raise ValueError("operator lives on a different grid")
    vals = boundary_values(grid, g)
    free, fixed = op.free, op.fixed
    A = op.matrix
    A_ff = A[free][:, free].tocsr()
    rhs = -(A[free][:, fixed] @ vals[fixed])
    u = vals.copy()
    u[free] = 0.0
    info = {"iterations": 0, "residual": 0.0}
    if free.size:
        x0 = np.full(free.size, float(np.mean(vals[fixed])) if fixed.size else 0.0)
        bnorm = float(np.linalg.norm(rhs))
        inv_diag = 1.0 / A_ff.diagonal()
        precond = sp.diags(inv_diag)
        count = [0]

        def _count(_):
            count[0] += 1

        cap = iteration_cap(grid)
        if bnorm == 0.0:
            x = np.zeros(free.size)
        else:
            x, status = cg(A_ff, rhs, x0=x0, rtol=tol, atol=0.0, maxiter=cap, M=precond, callback=_count)
        residual = float(np.linalg.norm(rhs - A_ff @ x) / bnorm) if bnorm else 0.0
        info = {"iterations": count[0], "residual": residual}
        if bnorm and residual > tol * (1.0 + 1e-6):
            raise ConvergenceError(residual, count[0], tol)
        u[free] = x
    field = DiscreteField(grid, u)
    if return_info:
        return field, info
    return field


def bilinear_form(a, u, phi, scheme: str = "fv_tpfa") -> float:
    """B_a(u, phi) = phi^T A u for a test field vanishing on the boundary layer."""
    op = as_operator(a, scheme)
    uv = as_values(u, op.grid)
    pv = as_values(phi, op.grid)
    if np.any(np.abs(pv[op.grid.boundary_layer]) > 1e-14):
        raise ValueError("test function must vanish on the boundary layer")
    return float(pv @ (op.matrix @ uv))


def classify_weak_type(a, u, tol: float = CLASSIFY_TOL, scheme: str = "fv_tpfa") -> WeakType:
    """Sign pattern of B_a(u, hat_i) over all interior hat functions."""
    op = as_operator(a, scheme)
    uv = as_values(u, op.grid)
    residual = (op.matrix @ uv)[op.free]
    scale = op.norm_inf() * float(np.max(np.abs(uv))) if uv.size else 0.0
    bound = tol * scale
    hi = float(residual.max()) if residual.size else 0.0
    lo = float(residual.min()) if residual.size else 0.0
    sub = hi <= bound
    sup = lo >= -bound
    kind = "solution" if sub and sup else "subsolution" if sub else "supersolution" if sup else "none"
    return WeakType(kind, sub, sup, hi, lo, scale)
