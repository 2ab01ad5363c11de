"""Weighted Hardy space machinery.

The orthogonal projection onto H^2 under the weighted boundary inner product
is realized by least squares onto a rational spanning set (monomials about
the outer curve's center plus negative powers about every hole anchor).
Boundary samples of holomorphic functions are carried around as
:class:`BoundaryFunction` objects and evaluated inside the domain by the
Cauchy integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BasisQualityError,
    ClearanceError,
    DecompositionError,
    GridMismatchError,
    PointNotInteriorError,
    WeightError,
)
from .geometry import TWO_PI, BoundaryGrid, Domain, contains
from .numerics import orthonormalize

CLEARANCE_NODES = 8.0  # evaluation points stay this many node spacings from the boundary
MAX_UPSAMPLE = 16


@dataclass(frozen=True, eq=False)
class Weight:
    grid: BoundaryGrid
    samples: np.ndarray
    description: str = "custom"

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.N,):
            raise GridMismatchError("weight samples do not match the grid")
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise WeightError(f"weight {self.description} must be finite and positive")
        object.__setattr__(self, "samples", s)

    @classmethod
    def unit(cls, grid):
        return cls(grid, np.ones(grid.N), "unit")

    @classmethod
    def from_parameter(cls, grid, fn, description="custom"):
        """Weight given as a function of the authored (counterclockwise) curve parameter."""
        t = np.where(grid.curve_index == 0, grid.t, (-grid.t) % TWO_PI)
        return cls(grid, fn(t), description)


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """Boundary samples of a function holomorphic in the domain except for
    declared poles ``singular_parts = ((a, order, coeff), ...)`` meaning
    ``coeff / (z - a)**order``."""

    grid: BoundaryGrid
    samples: np.ndarray
    singular_parts: tuple = ()

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.grid.N,):
            raise GridMismatchError("samples do not match the grid")
        object.__setattr__(self, "samples", s)
        object.__setattr__(
            self, "singular_parts", tuple((complex(a), int(m), complex(c)) for a, m, c in self.singular_parts)
        )

    def singular_values(self, z, order=0):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for a, m, c in self.singular_parts:
            # d^order/dz^order (z-a)^-m = (-m)(-m-1)...(-m-order+1) (z-a)^(-m-order)
            fac = math.prod(range(-m - order + 1, -m + 1)) if order else 1
            out += c * fac * (z - a) ** (-m - order)
        return out

    @property
    def regular(self):
        return self.samples - self.singular_values(self.grid.nodes)

    def __call__(self, z, order=0):
        return cauchy_interior_eval(self, z, order)

    def trace(self):
        """Interior boundary limit of the Cauchy integral of these samples.

        Equal to the samples exactly when they are boundary values of a
        function holomorphic inside apart from the declared poles.
        """
        reg = self.regular
        return self.singular_values(self.grid.nodes) + cauchy_trace(self.grid, reg)

    def hardy_residual(self):
        """Relative size of the part of the samples that is not a holomorphic trace."""
        scale = max(np.abs(self.samples).max(), 1e-300)
        return float(np.abs(self.trace() - self.samples).max() / scale)

    def boundary_derivative(self):
        """d/dz along the boundary, valid for holomorphic traces."""
        reg = self.grid.d_dz(self.regular)
        return BoundaryFunction(
            self.grid,
            reg + self.singular_values(self.grid.nodes, 1),
            tuple((a, m + 1, -m * c) for a, m, c in self.singular_parts),
        )

    def with_samples(self, samples, singular_parts=()):
        return BoundaryFunction(self.grid, samples, singular_parts)


def cauchy_trace(grid: BoundaryGrid, samples):
    """Interior limit on the boundary of (1/2 pi i) oint f(s)/(s - z) ds.

    Singularity subtraction:  f(z0) + (1/2 pi i) oint (f(s) - f(z0))/(s - z0) ds,
    the integrand being smooth; its diagonal limit is df/dt dt.
    """
    key = "cauchy_trace_matrix"
    if key not in grid._cache:
        Z = grid.nodes
        D = Z[None, :] - Z[:, None]
        np.fill_diagonal(D, 1.0)
        C = grid.dz[None, :] / D
        np.fill_diagonal(C, 0.0)
        C.setflags(write=False)
        grid._cache[key] = (C, C.sum(axis=1))
    C, rowsum = grid._cache[key]
    f = np.asarray(samples, dtype=complex)
    ft = grid.d_dt(f)
    return f + (C @ f - f * rowsum + ft * grid.dt) / (2j * math.pi)


def _upsample_factor(grid, d):
    h = grid.spacing
    for factor in (1, 2, 4, 8, MAX_UPSAMPLE):
        if d >= CLEARANCE_NODES * h / factor:
            return factor
    if d >= 5.0 * h / MAX_UPSAMPLE:
        return MAX_UPSAMPLE
    raise ClearanceError(f"evaluation point too close to the boundary (distance {d:.3e})")


def cauchy_interior_eval(f: BoundaryFunction, z, order=0, check_interior=False):
    """Value (or ``order``-th derivative) at interior points of the holomorphic
    extension of ``f``.

    Declared poles are subtracted from the samples, the remainder is extended by
    the barycentric form of the Cauchy integral, and the poles are added back.
    Boundary samples are trigonometrically upsampled for points closer than a
    few node spacings.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    grid = f.grid
    if check_interior and not np.all(contains(grid.domain, z)):
        raise PointNotInteriorError("evaluation point outside the domain")
    d = np.min(np.abs(z[:, None] - grid.nodes[None, :]), axis=1) if z.size else np.zeros(0)
    factors = np.array([_upsample_factor(grid, di) for di in d], dtype=int)
    reg = f.regular
    out = np.empty(z.shape, dtype=complex)
    for factor in np.unique(factors):
        sel = np.flatnonzero(factors == factor)
        g = grid.refined(int(factor))
        vals = grid.upsample(reg, int(factor))
        for start in range(0, sel.size, 256):
            idx = sel[start:start + 256]
            out[idx] = _cauchy_block(g, vals, z[idx], order)
    out += f.singular_values(z, order)
    return out[0] if scalar else out


def _cauchy_block(g, vals, z, order):
    inv = 1.0 / (g.nodes[None, :] - z[:, None])
    k = g.dz[None, :] * inv
    val = (k @ vals) / k.sum(axis=1)
    if order == 0:
        return val
    diff = vals[None, :] - val[:, None]
    return math.factorial(order) / (2j * math.pi) * np.sum(diff * k * inv**order, axis=1)


def weighted_inner(u, v, w: Weight):
    """<u, v>_phi = oint u conj(v) phi ds by boundary quadrature."""
    us = _samples(u, w.grid)
    vs = _samples(v, w.grid)
    return complex(np.sum(us * np.conj(vs) * w.samples * w.grid.weights))


def _samples(u, grid):
    if isinstance(u, BoundaryFunction):
        grid.check_same(u.grid)
        return u.samples
    u = np.asarray(u)
    if u.shape != (grid.N,):
        raise GridMismatchError("samples do not match the grid")
    return u


@dataclass(frozen=True, eq=False)
class HardyBasis:
    grid: BoundaryGrid
    weight: Weight
    raw_span: np.ndarray
    ortho: object
    K: int
    quality: float

    @property
    def domain(self) -> Domain:
        return self.grid.domain

    @property
    def vectors(self):
        return self.ortho.vectors

    def __len__(self):
        return self.vectors.shape[1]

    def coefficients(self, u):
        u = _samples(u, self.grid)
        return self.vectors.conj().T @ (u * self.weight.samples * self.grid.weights)

    def project(self, u):
        return self.vectors @ self.coefficients(u)


def raw_hardy_span(domain: Domain, z, K):
    """Monomials about the outer center and negative powers about each hole anchor,
    scaled to be O(1) on the boundary."""
    c0 = domain.outer.center
    R = float(np.max(np.abs(domain._polygon[0] - c0)))
    cols = [((z - c0) / R) ** k for k in range(K + 1)]
    poly = domain._polygon
    for j, cj in enumerate(domain.hole_anchors):
        rj = float(np.min(np.abs(poly[0][poly[1] == j + 1] - cj)))
        cols += [(rj / (z - cj)) ** k for k in range(1, K + 1)]
    return np.column_stack(cols)


def build_hardy_basis(domain, grid, w: Weight = None, K=24, drop_tol=1e-12, quality_tol=1e-8):
    if K < 4:
        raise ValueError("basis order K must be at least 4")
    if grid.domain is not domain:
        raise GridMismatchError("grid was sampled from a different domain")
    w = w if w is not None else Weight.unit(grid)
    grid.check_same(w.grid)
    span = raw_hardy_span(domain, grid.nodes, K)
    wts = w.samples * grid.weights

    def inner(u, v):
        return np.vdot(v, u * wts)

    ortho = orthonormalize(span, inner, drop_tol)
    basis = HardyBasis(grid, w, span, ortho, K, np.inf)
    mono = span[:, : K // 2 + 1]
    res = 0.0
    for k in range(mono.shape[1]):
        u = mono[:, k]
        r = u - basis.project(u)
        res = max(res, np.sqrt(inner(r, r).real / inner(u, u).real))
    object.__setattr__(basis, "quality", float(res))
    if res > quality_tol:
        raise BasisQualityError(
            f"polynomial reproduction residual {res:.2e}: increase nodes or lower the basis order"
        )
    return basis


def szego_project(u, basis: HardyBasis) -> BoundaryFunction:
    return BoundaryFunction(basis.grid, basis.project(u))


def _check_point(domain, a):
    if not contains(domain, a):
        raise PointNotInteriorError(f"point {a} is not inside the domain")


def weighted_cauchy_kernel(grid, a, w: Weight, n=0) -> BoundaryFunction:
    """conj( T / (2 pi i phi (z - a)) ), or its n-th derivative in conj(a)."""
    a = complex(a)
    _check_point(grid.domain, a)
    z = grid.nodes
    val = math.factorial(n) * grid.tangents / (2j * math.pi * w.samples * (z - a) ** (n + 1))
    return BoundaryFunction(grid, np.conj(val))


def sigma(basis: HardyBasis, a, n=0) -> BoundaryFunction:
    """Boundary samples of sigma(., a) (or of its n-th derivative in conj(a))."""
    C = weighted_cauchy_kernel(basis.grid, a, basis.weight, n)
    return BoundaryFunction(basis.grid, basis.project(C.samples))


def fd_weights(order, offsets):
    """Finite-difference weights at ``offsets`` for the ``order``-th derivative at 0
    (Fornberg's recursion)."""
    x = np.asarray(offsets, dtype=float)
    n = x.size
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, x[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5 = 1.0, c4
        c4 = x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def stencil_derivative(fn, a, n, h, direction=1.0, half_width=None):
    """n-th derivative of ``fn`` along ``direction`` at ``a`` by a central stencil
    with one Richardson step (h and h/2)."""
    if n == 0:
        return fn(a)
    p = half_width or n // 2 + 3
    offs = np.arange(-p, p + 1)
    wts = fd_weights(n, offs)
    r = 2 * p + 2 - n

    def D(step):
        return sum(wi * fn(a + oi * step * direction) for wi, oi in zip(wts, offs) if wi != 0) / step**n

    d1, d2 = D(h), D(h / 2)
    return (2**r * d2 - d1) / (2**r - 1)


def sigma_dbar(basis: HardyBasis, a, n, method="exact", h=None) -> BoundaryFunction:
    """n-th conj(a)-derivative of sigma(., a).

    ``method="exact"`` projects the differentiated Cauchy kernel;
    ``method="fd"`` differentiates sigma over a stencil in the a-plane.  sigma
    is antiholomorphic in a, so d/d(conj a) equals d/dx there.
    """
    if not 0 <= n <= 4:
        raise ValueError("derivative order must be between 0 and 4")
    if n == 0 or method == "exact":
        return sigma(basis, a, n)
    a = complex(a)
    clearance = float(basis.domain.distance_to_boundary(a))
    h = h if h is not None else 0.05 * clearance
    p = n // 2 + 3
    if clearance < 2 * p * h:
        raise ClearanceError("stencil leaves the domain")
    vals = stencil_derivative(lambda b: sigma(basis, b).samples, a, n, h)
    return BoundaryFunction(basis.grid, vals)


def weighted_garabedian(basis: HardyBasis, a, n=0, tol=1e-7) -> BoundaryFunction:
    """lambda(., a) = 1/(2 pi (z - a)) - i H_a, or its n-th a-derivative.

    H_a comes from the orthogonal decomposition C_a = sigma(., a) + conj(H_a T)/phi
    and is checked to be a holomorphic trace.
    """
    a = complex(a)
    grid, w = basis.grid, basis.weight
    C = weighted_cauchy_kernel(grid, a, w, n).samples
    s = basis.project(C)
    H = np.conj(w.samples * (C - s)) * np.conj(grid.tangents)
    scale = float(np.abs(w.samples * C).max())
    Hf = BoundaryFunction(grid, H)
    res = float(np.abs(Hf.trace() - H).max()) / scale
    if res > tol:
        raise DecompositionError(f"H_a is not a holomorphic trace (residual {res:.2e})")
    fac = math.factorial(n) / TWO_PI
    lam = fac / (grid.nodes - a) ** (n + 1) - 1j * H
    return BoundaryFunction(grid, lam, ((a, n + 1, fac),))


def sigma_value(basis, z, a):
    return sigma(basis, a)(z)
