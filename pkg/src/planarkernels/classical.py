"""Classical Szego and Garabedian kernels, zeros, and the Ahlfors map."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, KernelError, MobiusSearchError, ZeroCountError
from .geometry import TWO_PI, contains
from .hardy import BoundaryFunction, HardyBasis, sigma, weighted_garabedian

MODULUS_TOL = 1e-6
ROUTE_TOL = 1e-7


def _require_unit(basis: HardyBasis):
    if not np.allclose(basis.weight.samples, 1.0, rtol=0, atol=1e-15):
        raise ValueError("classical kernels need a unit-weight basis")


def szego(basis: HardyBasis, a) -> BoundaryFunction:
    """S(., a): the weighted Szego kernel with unit weight."""
    _require_unit(basis)
    return sigma(basis, a)


def garabedian(basis: HardyBasis, a, S=None, check=True) -> BoundaryFunction:
    """L(., a) from the boundary relation L T / i = conj(S), extended by Cauchy.

    With ``check`` the result is compared with the unit-weight λ computed from
    its own orthogonal decomposition.
    """
    a = complex(a)
    grid = basis.grid
    S = S if S is not None else szego(basis, a)
    L = BoundaryFunction(grid, 1j * np.conj(S.samples) * np.conj(grid.tangents), ((a, 1, 1 / TWO_PI),))
    if check:
        lam = weighted_garabedian(basis, a)
        dev = float(np.abs(L.samples - lam.samples).max() / np.abs(lam.samples).max())
        if dev > ROUTE_TOL:
            raise ConsistencyError(f"Garabedian routes disagree by {dev:.2e}")
    return L


def boundary_winding(f: BoundaryFunction, upsample=4) -> int:
    """Winding number of the boundary samples about 0, summed over curves."""
    grid = f.grid
    vals = grid.upsample(f.samples, upsample)
    M = grid.M * upsample
    total = 0.0
    for j in range(grid.domain.n):
        v = vals[j * M:(j + 1) * M]
        if np.abs(v).min() < 1e-12 * np.abs(v).max():
            raise ZeroCountError("function vanishes on the boundary")
        ph = np.unwrap(np.angle(np.append(v, v[0])))
        total += (ph[-1] - ph[0]) / TWO_PI
    k = round(total)
    if abs(total - k) > 1e-3:
        raise ZeroCountError(f"non-integer winding number {total:.4f}")
    return int(k)


@dataclass(frozen=True)
class ZeroSet:
    points: tuple
    multiplicities: tuple

    @property
    def degree(self):
        return int(sum(self.multiplicities))

    def expanded(self):
        return tuple(p for p, m in zip(self.points, self.multiplicities) for _ in range(m))


def locate_zeros(f: BoundaryFunction, expected=None, eps_zero=None) -> ZeroSet:
    """Zeros of the holomorphic extension of ``f`` (which must have no poles).

    The count comes from the argument principle; locations from the power sums
    (1/2 pi i) oint u^k f'/f dz in scaled coordinates turned into a polynomial
    by Newton's identities.  Roots closer than ``eps_zero`` form one multiple
    zero, simple roots are polished by Newton's method, and every cluster is
    recounted on a small circle before being accepted.
    """
    if f.singular_parts:
        raise ValueError("locate_zeros needs a pole-free function")
    grid = f.grid
    domain = grid.domain
    eps_zero = eps_zero if eps_zero is not None else 1e-4 * domain.diameter
    count = boundary_winding(f)
    if expected is not None and count != expected:
        raise ZeroCountError(f"found {count} zeros, expected {expected}")
    if count < 0:
        raise ZeroCountError("negative zero count: function has poles inside")
    if count == 0:
        return ZeroSet((), ())
    c = domain.outer.center
    R = 0.5 * domain.diameter
    u = (grid.nodes - c) / R
    logd = grid.d_dt(f.samples) / f.samples * grid.dt / (2j * math.pi)
    p = [np.sum(u**k * logd) for k in range(1, count + 1)]
    e = [1.0 + 0j]
    for k in range(1, count + 1):
        e.append(sum((-1) ** (i - 1) * e[k - i] * p[i - 1] for i in range(1, k + 1)) / k)
    roots = c + R * np.roots([(-1) ** k * e[k] for k in range(count + 1)])
    clusters = _cluster(roots, eps_zero)
    points, mults = [], []
    for members in clusters:
        z0 = complex(np.mean(members))
        m = len(members)
        if m == 1:
            z0 = _newton(f, z0)
        points.append(z0)
        mults.append(m)
    for i, (z0, m) in enumerate(zip(points, mults)):
        if not contains(domain, z0, strict=False):
            raise ZeroCountError(f"zero estimate {z0} is outside the domain")
        others = [abs(z0 - q) for j, q in enumerate(points) if j != i]
        r = 0.5 * min(others + [domain.distance_to_boundary(z0)])
        if _circle_count(f, z0, r) != m:
            raise ZeroCountError(f"argument-principle recount failed near {z0}")
    order = sorted(range(len(points)), key=lambda k: (round(points[k].real, 12), round(points[k].imag, 12)))
    return ZeroSet(tuple(points[k] for k in order), tuple(mults[k] for k in order))


def _cluster(roots, eps):
    clusters = []
    for r in roots:
        for cl in clusters:
            if min(abs(r - q) for q in cl) < eps:
                cl.append(r)
                break
        else:
            clusters.append([r])
    return clusters


def _newton(f, z0, iters=20):
    z = z0
    for _ in range(iters):
        step = f(z) / f(z, order=1)
        z = z - step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            break
    return complex(z)


def _circle_count(f, z0, r, n=64):
    th = TWO_PI * np.arange(n) / n
    zc = z0 + r * np.exp(1j * th)
    ratio = f(zc, order=1) / f(zc)
    val = np.sum(ratio * 1j * r * np.exp(1j * th)) * (TWO_PI / n) / (2j * math.pi)
    return int(round(val.real))


def szego_zeros(basis: HardyBasis, a, S=None) -> tuple:
    """The n - 1 zeros of S(., a), listed with multiplicity."""
    S = S if S is not None else szego(basis, a)
    zs = locate_zeros(S, expected=basis.domain.n - 1)
    return zs.expanded()


@dataclass(frozen=True, eq=False)
class ProperMap:
    """Boundary samples of a proper holomorphic map onto the unit disc with its zeros."""

    values: BoundaryFunction
    zeros: tuple
    multiplicities: tuple
    beta: complex = 0j

    def __call__(self, z, order=0):
        return self.values(z, order)

    @property
    def grid(self):
        return self.values.grid

    @property
    def degree(self):
        return int(sum(self.multiplicities))

    @classmethod
    def from_samples(cls, grid, samples, eps_zero=None):
        vals = BoundaryFunction(grid, samples)
        zs = locate_zeros(vals, eps_zero=eps_zero)
        return cls(vals, zs.points, zs.multiplicities)


@dataclass(frozen=True, eq=False)
class AhlforsMap(ProperMap):
    base_point: complex = 0j
    S: BoundaryFunction = None
    L: BoundaryFunction = None
    derivative_at_base: complex = 0j

    def as_proper(self) -> ProperMap:
        return ProperMap(self.values, self.zeros, self.multiplicities, self.beta)


def ahlfors(basis: HardyBasis, a) -> AhlforsMap:
    """f_a = S(., a)/L(., a): degree n, zero at a plus the zeros of S(., a)."""
    a = complex(a)
    S = szego(basis, a)
    L = garabedian(basis, a, S)
    vals = BoundaryFunction(basis.grid, S.samples / L.samples)
    dev = float(np.abs(np.abs(vals.samples) - 1.0).max())
    if dev > MODULUS_TOL:
        raise ConsistencyError(f"boundary modulus deviates from 1 by {dev:.2e}")
    n = basis.domain.n
    degree = boundary_winding(vals)
    if degree != n:
        raise ZeroCountError(f"Ahlfors map has degree {degree}, expected {n}")
    zs = locate_zeros(S, expected=n - 1) if n > 1 else ZeroSet((), ())
    pts = [a] + list(zs.points)
    mults = [1] + list(zs.multiplicities)
    deriv = complex(vals(a, order=1))
    if deriv.real <= 0 or abs(deriv.imag) > 1e-6 * abs(deriv):
        raise ConsistencyError("f_a'(a) is not real positive")
    return AhlforsMap(vals, tuple(pts), tuple(mults), 0j, a, S, L, deriv)


def mobius_grid():
    """Deterministic search list for the Mobius parameter."""
    out = [0j]
    for r in (0.05, 0.1, 0.2, 0.3):
        out += [r * np.exp(1j * (k + 0.5) * math.pi / 4) for k in range(8)]
    return out


def mobius_simplify(pm: ProperMap, eps_zero=None, deriv_floor=1e-6) -> ProperMap:
    """Compose with (f - beta)/(1 - conj(beta) f) until every zero is simple."""
    grid = pm.grid
    eps_zero = eps_zero if eps_zero is not None else 1e-4 * grid.domain.diameter
    f = pm.values.samples
    for beta in mobius_grid():
        g = BoundaryFunction(grid, (f - beta) / (1 - np.conj(beta) * f))
        try:
            zs = locate_zeros(g, expected=pm.degree, eps_zero=eps_zero)
        except KernelError:
            continue
        if any(m != 1 for m in zs.multiplicities):
            continue
        if any(abs(g(z, order=1)) <= deriv_floor for z in zs.points):
            continue
        return ProperMap(g, zs.points, zs.multiplicities, complex(beta))
    raise MobiusSearchError("no Mobius parameter in the search grid gives simple zeros")
