"""Dirichlet problems, Green's function, harmonic measure, Poisson weight,
and the Bergman kernel K with its companion Lambda.

Harmonic functions are represented as a double-layer potential plus one
logarithmic charge inside each hole (the charges remove the rank deficiency of
the double-layer operator on multiply connected domains).  Writing the
double layer as the real part of a Cauchy integral F of the density gives
the complex derivative for free: d/dz Re F = F'/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClearanceError, ConsistencyError, PointNotInteriorError, SeparationError, SolverResidualError, WeightError
from .geometry import TWO_PI, BoundaryGrid, contains
from .hardy import BoundaryFunction, Weight, cauchy_trace, stencil_derivative
from .numerics import LUFactorization

RESIDUAL_TOL = 1e-8


class LaplaceSolver:
    """Nystrom discretization of the interior Dirichlet problem, factorized once."""

    def __init__(self, grid: BoundaryGrid):
        self.grid = grid
        domain = grid.domain
        self.anchors = np.asarray(domain.hole_anchors, dtype=complex)
        N, h = grid.N, self.anchors.size
        z, dz = grid.nodes, grid.dz
        D = z[None, :] - z[:, None]
        np.fill_diagonal(D, 1.0)
        A = np.empty((N + h, N + h))
        A[:N, :N] = (dz[None, :] / D).imag / TWO_PI
        A[np.arange(N), np.arange(N)] = 0.5 + (grid.d2z * grid.dt / (2 * dz)).imag / TWO_PI
        for k, c in enumerate(self.anchors):
            A[:N, N + k] = np.log(np.abs(z - c))
            A[N + k, :] = 0.0
            A[N + k, N + k] = 1.0
            A[N + k, :N][grid.curve_index == k + 1] = -grid.weights[grid.curve_index == k + 1]
        self.matrix = A
        self.lu = LUFactorization(A)

    def solve(self, data) -> "DirichletSolution":
        data = np.asarray(data)
        grid = self.grid
        if data.shape != (grid.N,):
            raise ValueError("boundary data does not match the grid")
        if not np.all(np.isfinite(data)):
            raise ValueError("boundary data must be finite")
        rhs = np.concatenate([data, np.zeros(self.anchors.size, dtype=data.dtype)])
        if np.iscomplexobj(rhs):
            x = self.lu.solve(np.column_stack([rhs.real, rhs.imag]))
            x = x[:, 0] + 1j * x[:, 1]
        else:
            x = self.lu.solve(rhs)
        res = float(np.abs(self.matrix @ x - rhs).max())
        if res > RESIDUAL_TOL * max(1.0, float(np.abs(rhs).max())):
            raise SolverResidualError(f"Dirichlet residual {res:.2e}")
        N = grid.N
        return DirichletSolution(self, x[:N], x[N:], data)


def laplace_solver(grid: BoundaryGrid) -> LaplaceSolver:
    """Shared solver per grid (factorized on first use)."""
    if "laplace" not in grid._cache:
        grid._cache["laplace"] = LaplaceSolver(grid)
    return grid._cache["laplace"]


@dataclass(frozen=True, eq=False)
class DirichletSolution:
    solver: LaplaceSolver
    density: np.ndarray
    log_charges: np.ndarray
    boundary_data: np.ndarray

    @property
    def grid(self):
        return self.solver.grid

    def _logs(self, z, derivative=False):
        out = np.zeros(z.shape, dtype=complex)
        for A, c in zip(self.log_charges, self.solver.anchors):
            out += A / (2 * (z - c)) if derivative else A * np.log(np.abs(z - c))
        return out

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        mu = self.density
        val = BoundaryFunction(self.grid, mu.real)(z).real
        if np.iscomplexobj(mu):
            val = val + 1j * BoundaryFunction(self.grid, mu.imag)(z).real
        val = val + self._logs(z)
        if not np.iscomplexobj(mu) and not np.iscomplexobj(self.log_charges):
            val = val.real
        return val[0] if scalar else val

    def dz_boundary_function(self) -> BoundaryFunction:
        """d/dz of the layer part as a Cauchy-representable boundary function."""
        g = self.grid
        return BoundaryFunction(g, 0.5 * g.d_dz(self.density.astype(complex)))

    def dz(self, z):
        """du/dz at interior points."""
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        val = self.dz_boundary_function()(z) + self._logs(z, derivative=True)
        return val[0] if scalar else val

    def dz_trace(self):
        """Interior boundary limit of du/dz."""
        g = self.grid
        nu = self.dz_boundary_function().samples
        return cauchy_trace(g, nu) + self._logs(g.nodes, derivative=True)

    def boundary_values(self):
        """Interior boundary limit of u, recomputed from the representation."""
        A = self.solver.matrix
        x = np.concatenate([self.density, self.log_charges])
        return (A @ x)[: self.grid.N]


def solve_dirichlet(grid: BoundaryGrid, boundary_data) -> DirichletSolution:
    return laplace_solver(grid).solve(boundary_data)


def _check_interior(domain, w, what="point"):
    if not contains(domain, w):
        raise PointNotInteriorError(f"{what} {w} is not inside the domain")


class GreenFunction:
    """G(z, w) = -log|z - w| + u_w(z), positive inside and zero on the boundary."""

    def __init__(self, grid: BoundaryGrid, w):
        self.w = complex(w)
        _check_interior(grid.domain, self.w)
        self.grid = grid
        self.harmonic = laplace_solver(grid).solve(np.log(np.abs(grid.nodes - self.w)))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return -np.log(np.abs(z - self.w)) + self.harmonic(z)

    def dz(self, z):
        z = np.asarray(z, dtype=complex)
        return -0.5 / (z - self.w) + self.harmonic.dz(z)

    def dz_trace(self):
        z = self.grid.nodes
        return -0.5 / (z - self.w) + self.harmonic.dz_trace()

    def dz_boundary(self) -> BoundaryFunction:
        """dG/dz as a boundary function with its pole at w declared."""
        return BoundaryFunction(self.grid, self.dz_trace(), ((self.w, 1, -0.5),))

    def normal_derivative(self):
        """Outward normal derivative on the boundary (negative for G >= 0)."""
        n = self.grid.normals
        return 2.0 * (self.dz_trace() * n).real


def green(grid: BoundaryGrid, w) -> GreenFunction:
    return GreenFunction(grid, w)


@dataclass(frozen=True, eq=False)
class HarmonicMeasure:
    j: int
    solution: DirichletSolution
    F_prime: BoundaryFunction

    def __call__(self, z):
        return self.solution(z)


def harmonic_measure(grid: BoundaryGrid, j: int) -> HarmonicMeasure:
    """omega_j for curve j (1 = outer curve, 2.. = holes) and F_j' = (1/2) d omega_j/dz."""
    n = grid.domain.n
    if not 1 <= j <= n:
        raise ValueError(f"curve index must be between 1 and {n}")
    sol = solve_dirichlet(grid, (grid.curve_index == j - 1).astype(float))
    return HarmonicMeasure(j, sol, BoundaryFunction(grid, 0.5 * sol.dz_trace()))


def poisson_weight(grid: BoundaryGrid, A0, check_tol=1e-7) -> Weight:
    """Poisson kernel p(A0, z) on the boundary, as a weight."""
    A0 = complex(A0)
    G = green(grid, A0)
    phi = -(1.0 / math.pi) * (grid.tangents * G.dz_trace()).imag
    try:
        w = Weight(grid, phi, f"poisson:{_fmt(A0)}")
    except WeightError:
        raise ConsistencyError("Poisson kernel is not positive on the boundary") from None
    z = grid.nodes
    for u, target in ((np.ones_like(z), 1.0), (z, A0)):
        got = np.sum(phi * u * grid.weights)
        if abs(got - target) > check_tol:
            raise ConsistencyError(f"Poisson weight fails to reproduce harmonic data ({abs(got - target):.2e})")
    return w


def _fmt(c):
    c = complex(c)
    return f"{c.real:g}{c.imag:+g}i" if c.imag else f"{c.real:g}"


def _bergman_data(grid, w, holomorphic):
    d = grid.nodes - w
    return -0.5 / d if holomorphic else -0.5 / np.conj(d)


def _pair_checks(grid, z, w, h=None):
    domain = grid.domain
    _check_interior(domain, z)
    _check_interior(domain, w)
    if abs(z - w) < max(10 * (h or 0.0), 1e-8 * domain.diameter):
        raise SeparationError("z and w are too close")


def bergman_boundary(grid: BoundaryGrid, w) -> BoundaryFunction:
    """K(z, w) for z on the boundary (interior limit)."""
    sol = laplace_solver(grid).solve(_bergman_data(grid, complex(w), False))
    return BoundaryFunction(grid, -(2 / math.pi) * sol.dz_trace())


def lambda_boundary(grid: BoundaryGrid, w) -> BoundaryFunction:
    """Lambda(z, w) for z on the boundary, with the double pole at w declared."""
    w = complex(w)
    sol = laplace_solver(grid).solve(_bergman_data(grid, w, True))
    z = grid.nodes
    vals = -(2 / math.pi) * (-0.5 / (z - w) ** 2 + sol.dz_trace())
    return BoundaryFunction(grid, vals, ((w, 2, 1 / math.pi),))


def _green_dz_at(grid, z, w):
    G = GreenFunction(grid, w)
    return G.dz(z)


def _fd_step(grid, z, w, h):
    clearance = float(grid.domain.distance_to_boundary(w))
    h = h if h is not None else 1e-2 * clearance
    if clearance < 8 * h:
        raise ClearanceError("finite-difference stencil leaves the domain")
    return h


def bergman(grid: BoundaryGrid, z, w, method="analytic", h=None):
    """K(z, w) = -(2/pi) d^2 G / dz d(conj w).

    ``method="analytic"`` differentiates the Dirichlet data in conj(w) before
    solving; ``method="fd"`` differentiates dG/dz over a stencil of Green's
    functions in the w-plane.
    """
    z, w = complex(z), complex(w)
    if method == "fd":
        h = _fd_step(grid, z, w, h)
        _pair_checks(grid, z, w, h)
        fn = lambda b: _green_dz_at(grid, z, b)
        dx = stencil_derivative(fn, w, 1, h, 1.0)
        dy = stencil_derivative(fn, w, 1, h, 1j)
        return complex(-(2 / math.pi) * 0.5 * (dx + 1j * dy))
    _pair_checks(grid, z, w)
    sol = laplace_solver(grid).solve(_bergman_data(grid, w, False))
    return complex(-(2 / math.pi) * sol.dz(z))


def lambda_capital(grid: BoundaryGrid, z, w, method="analytic", h=None):
    """Lambda(z, w) = -(2/pi) d^2 G / dz dw."""
    z, w = complex(z), complex(w)
    if method == "fd":
        h = _fd_step(grid, z, w, h)
        _pair_checks(grid, z, w, h)
        fn = lambda b: _green_dz_at(grid, z, b)
        dx = stencil_derivative(fn, w, 1, h, 1.0)
        dy = stencil_derivative(fn, w, 1, h, 1j)
        return complex(-(2 / math.pi) * 0.5 * (dx - 1j * dy))
    _pair_checks(grid, z, w)
    sol = laplace_solver(grid).solve(_bergman_data(grid, w, True))
    return complex(-(2 / math.pi) * (-0.5 / (z - w) ** 2 + sol.dz(z)))
