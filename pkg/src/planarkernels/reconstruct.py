"""Finite-rank reconstruction of Szego-type kernels from a proper map.

If f is a proper holomorphic map of the domain onto the unit disc, then
sigma(z, w)(1 - f(z) conj f(w)) is the reproducing kernel of the orthogonal
complement of f H^2, a space of dimension deg f spanned by the derivatives
sigma_nbar(., a_i), 0 <= n < M(i), at the zeros a_i of f.  Its coefficients
come from inverting the Gram matrix of that spanning set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classical import AhlforsMap, ProperMap, ahlfors, szego
from .errors import GridMismatchError, SeparationError, ZeroCountError
from .hardy import BoundaryFunction, HardyBasis, sigma_dbar, weighted_garabedian, weighted_inner
from .numerics import inverse, orthonormalize


@dataclass(frozen=True, eq=False)
class ReconstructionCoefficients:
    """c[(i, n), (j, m)] with rows and columns labelled by ``index``.

    ``source_matrix`` is the Gram-type matrix that was inverted:
    A[(k, q), (j, m)] = sigma_{q mbar}(a_k, a_j).
    """

    kind: str
    index: tuple
    c: np.ndarray
    source_matrix: np.ndarray
    c0: complex = None

    @property
    def residual(self):
        """Two-sided inverse residual max(|cA - I|, |Ac - I|)."""
        eye = np.eye(len(self.index))
        return float(max(np.abs(self.c @ self.source_matrix - eye).max(),
                         np.abs(self.source_matrix @ self.c - eye).max()))

    @property
    def hermitian_defect(self):
        return float(np.abs(self.c - self.c.conj().T).max() / np.abs(self.c).max())

    def as_array(self, multiplicities):
        """Four-index form c[i, j, n, m] (zero outside n < M(i), m < M(j))."""
        N, Mx = len(multiplicities), max(multiplicities)
        out = np.zeros((N, N, Mx, Mx), dtype=complex)
        for r, (i, n) in enumerate(self.index):
            for s, (j, m) in enumerate(self.index):
                out[i, j, n, m] = self.c[r, s]
        return out


@dataclass(frozen=True, eq=False)
class KernelFormula:
    """Evaluator for sum c_kl g_k(z) conj(g_l(w)) / (1 - f(z) conj f(w))."""

    coeffs: ReconstructionCoefficients
    functions: tuple
    fmap: BoundaryFunction

    def __call__(self, z, w):
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        gz = np.array([g(z.ravel()) for g in self.functions])
        gw = np.array([g(w.ravel()) for g in self.functions])
        num = np.einsum("kp,kl,lp->p", gz, self.coeffs.c, gw.conj())
        den = 1.0 - self.fmap(z.ravel()) * np.conj(self.fmap(w.ravel()))
        out = (num / den).reshape(z.shape)
        return out[()] if out.ndim == 0 else out


def _simple_zeros(zeros, mults, eps):
    if any(m != 1 for m in mults):
        raise ZeroCountError("formula needs simple zeros")
    for i in range(len(zeros)):
        for j in range(i):
            if abs(zeros[i] - zeros[j]) <= eps:
                raise ZeroCountError("zeros are not distinct")


def classical_szego_formula(basis: HardyBasis, a, fmap: AhlforsMap = None) -> KernelFormula:
    """S(z, w) from S(., a), the S(., a_i) at the other zeros of f_a, and f_a."""
    fmap = fmap if fmap is not None else ahlfors(basis, a)
    a = complex(fmap.base_point)
    others = fmap.zeros[1:]
    _simple_zeros(fmap.zeros, fmap.multiplicities, 1e-4 * basis.domain.diameter)
    Sa = fmap.S
    Sai = [szego(basis, ai) for ai in others]
    # B[j, k] = S(a_j, a_k)
    B = np.array([[Sk(aj) for Sk in Sai] for aj in others], dtype=complex).reshape(len(others), len(others))
    c = inverse(B) if others else np.zeros((0, 0), dtype=complex)
    Saa = complex(Sa(a))
    c0 = 1.0 / Saa
    full = np.zeros((len(others) + 1,) * 2, dtype=complex)
    full[0, 0] = c0
    full[1:, 1:] = c
    src = np.zeros_like(full)
    src[0, 0] = Saa
    src[1:, 1:] = B
    index = tuple((i, 0) for i in range(len(others) + 1))
    coeffs = ReconstructionCoefficients("classical", index, full, src, c0)
    return KernelFormula(coeffs, tuple([Sa] + Sai), fmap.values)


@dataclass(frozen=True, eq=False)
class BasisFamily:
    """sigma_nbar(., a_i) for the zeros a_i of a proper map, 0 <= n < M(i)."""

    basis: HardyBasis
    fmap: ProperMap
    index: tuple
    sigma_derivs: dict = field(repr=False)
    p_max: int = 3

    @property
    def zeros(self):
        return self.fmap.zeros

    @property
    def multiplicities(self):
        return self.fmap.multiplicities

    def h(self, i, n, p):
        """Samples of h_inp = sigma_nbar(., a_i) f^p."""
        return self.sigma_derivs[(i, n)].samples * self.fmap.values.samples**p

    def level(self, p):
        return [self.h(i, n, p) for i, n in self.index]

    def gram(self, p, q):
        """<h_inp, h_jmq>_phi with rows (i, n) and columns (j, m)."""
        w = self.basis.weight
        U, V = self.level(p), self.level(q)
        return np.array([[weighted_inner(u, v, w) for v in V] for u in U])

    def predicted_block(self):
        """sigma_{m nbar}(a_j, a_i) at row (i, n), column (j, m)."""
        return np.array([[self.sigma_derivs[(i, n)](self.zeros[j], order=m) for j, m in self.index]
                         for i, n in self.index])


def build_basis_family(basis: HardyBasis, fmap: ProperMap, p_max=3, method="exact") -> BasisFamily:
    basis.grid.check_same(fmap.grid)
    index = tuple((i, n) for i, m in enumerate(fmap.multiplicities) for n in range(m))
    derivs = {(i, n): sigma_dbar(basis, fmap.zeros[i], n, method=method) for i, n in index}
    return BasisFamily(basis, fmap, index, derivs, p_max)


def orthogonality_report(family: BasisFamily):
    """Largest off-block inner product (p != q) and largest same-block deviation
    from the derivative values, over p, q <= p_max."""
    pred = family.predicted_block()
    scale = np.abs(pred).max()
    off, same = 0.0, 0.0
    for p in range(family.p_max + 1):
        for q in range(family.p_max + 1):
            G = family.gram(p, q)
            if p == q:
                same = max(same, float(np.abs(G - pred).max() / scale))
            else:
                off = max(off, float(np.abs(G).max() / scale))
    return {"off_block": off, "same_block": same}


@dataclass(frozen=True)
class PIndependenceReport:
    deviation: float
    b0: np.ndarray
    b1: np.ndarray


def gram_schmidt_p_independence(family: BasisFamily, perturbation=0.0) -> PIndependenceReport:
    """Orthonormalize the p = 0 and p = 1 levels in the same index order and
    compare the coefficients b of H_in in terms of h_jm.

    ``perturbation`` scales the level-1 weight by (1 + perturbation cos t),
    a negative control that should destroy the agreement.
    """
    grid = family.basis.grid
    wts = family.basis.weight.samples * grid.weights
    wts1 = wts * (1.0 + perturbation * np.cos(grid.t))

    def run(p, w):
        span = np.column_stack(family.level(p))
        o = orthonormalize(span, lambda u, v: np.vdot(v, u * w))
        return o.transform.T

    b0, b1 = run(0, wts), run(1, wts1)
    if b0.shape != b1.shape:
        return PIndependenceReport(np.inf, b0, b1)
    return PIndependenceReport(float(np.abs(b0 - b1).max()), b0, b1)


def _coefficients(family: BasisFamily, kind):
    idx = family.index
    A = np.array([[family.sigma_derivs[(j, m)](family.zeros[k], order=q) for j, m in idx] for k, q in idx])
    return ReconstructionCoefficients(kind, idx, inverse(A), A)


def weighted_szego_formula_simple(family: BasisFamily):
    _simple_zeros(family.zeros, family.multiplicities, 1e-4 * family.basis.domain.diameter)
    coeffs = _coefficients(family, "simple")
    funcs = tuple(family.sigma_derivs[k] for k in family.index)
    return coeffs, KernelFormula(coeffs, funcs, family.fmap.values)


def weighted_szego_formula_general(family: BasisFamily):
    coeffs = _coefficients(family, "general")
    funcs = tuple(family.sigma_derivs[k] for k in family.index)
    return coeffs, KernelFormula(coeffs, funcs, family.fmap.values)


@dataclass(frozen=True, eq=False)
class GarabedianFormula:
    """lambda(w, z) = f(w)/(f(w) - f(z)) sum c_ij sigma(z, a_i) lambda(w, a_j)."""

    coeffs: ReconstructionCoefficients
    sigmas: tuple
    lambdas: tuple
    fmap: BoundaryFunction
    zeros: tuple
    min_gap: float = 1e-10

    def __call__(self, w, z):
        w, z = np.broadcast_arrays(np.asarray(w, dtype=complex), np.asarray(z, dtype=complex))
        wf, zf = w.ravel(), z.ravel()
        fw, fz = self.fmap(wf), self.fmap(zf)
        if np.any(np.abs(fw - fz) < self.min_gap):
            raise SeparationError("f(w) = f(z): formula is singular there")
        sz = np.array([s(zf) for s in self.sigmas])
        lw = np.array([lam(wf) for lam in self.lambdas])
        out = (fw / (fw - fz) * np.einsum("ip,ij,jp->p", sz, self.coeffs.c, lw)).reshape(w.shape)
        return out[()] if out.ndim == 0 else out

    def boundedness(self, z, radius=1e-3, n=16):
        """Largest |value| on small circles around the zeros of f (removable points)."""
        th = 2 * np.pi * np.arange(n) / n
        vals = [np.abs(self(a + radius * np.exp(1j * th), z)).max() for a in self.zeros]
        return float(max(vals))


def weighted_garabedian_formula(family: BasisFamily, coeffs: ReconstructionCoefficients) -> GarabedianFormula:
    if coeffs.kind not in ("simple", "classical"):
        raise ValueError("the Garabedian formula needs simple-zero coefficients")
    if coeffs.c.shape[0] != len(family.zeros):
        raise GridMismatchError("coefficients do not match the basis family")
    basis = family.basis
    sigmas = tuple(family.sigma_derivs[(i, 0)] for i in range(len(family.zeros)))
    lambdas = tuple(weighted_garabedian(basis, a) for a in family.zeros)
    return GarabedianFormula(coeffs, sigmas, lambdas, family.fmap.values, tuple(family.zeros))
