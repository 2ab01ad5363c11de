"""Dense complex linear algebra helpers.

LU factorization and triangular solves are delegated to LAPACK through
scipy; Gram-Schmidt and the smallest-singular-pair iteration are local.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, SingularMatrixError

EPS_SOLVER = 1e-13


def as_dense(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


class LUFactorization:
    """Partial-pivoting LU of a square matrix, reusable across right-hand sides."""

    def __init__(self, A, eps=EPS_SOLVER):
        A = as_dense(A)
        if A.shape[0] != A.shape[1]:
            raise ValueError("solve needs a square matrix")
        self.shape = A.shape
        with warnings.catch_warnings():
            # exact singularity is reported below through the pivot test
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            self.lu, self.piv = sla.lu_factor(A, check_finite=False)
        d = np.abs(np.diag(self.lu))
        self.pivot = float(d.min()) if d.size else 1.0
        scale = float(d.max()) if d.size else 1.0
        if d.size and self.pivot <= eps * scale:
            raise SingularMatrixError(
                f"matrix is singular to tolerance (pivot {self.pivot:.3e})", pivot=self.pivot
            )
        (gecon,) = sla.get_lapack_funcs(("gecon",), (self.lu,))
        anorm = np.linalg.norm(A, 1)
        rcond, info = gecon(self.lu, anorm, norm="1")
        self.rcond = float(rcond)
        if self.rcond < eps:
            raise SingularMatrixError(
                f"matrix is singular to tolerance (rcond {self.rcond:.3e})",
                pivot=self.pivot,
                rcond=self.rcond,
            )

    def solve(self, b):
        return sla.lu_solve((self.lu, self.piv), b, check_finite=False)


def solve(A, b, eps=EPS_SOLVER):
    return LUFactorization(A, eps).solve(np.asarray(b))


def inverse(A, eps=EPS_SOLVER):
    A = as_dense(A)
    return LUFactorization(A, eps).solve(np.eye(A.shape[0], dtype=A.dtype))


@dataclass(frozen=True, eq=False)
class OrthoSet:
    """Orthonormal vectors ``vectors[:, k] = span @ transform[:, k]``."""

    vectors: np.ndarray
    transform: np.ndarray
    kept: tuple
    dropped: tuple

    def __len__(self):
        return self.vectors.shape[1]


def orthonormalize(span, inner, drop_tol=1e-12) -> OrthoSet:
    """Modified Gram-Schmidt with one reorthogonalization pass.

    ``span`` is a sequence of equal-length vectors (or the columns of a 2-D
    array); ``inner(u, v)`` is linear in ``u`` and conjugate-linear in ``v``.
    A vector is dropped when what survives projection is below ``drop_tol``
    times its original norm.  Retained vectors keep the input order.
    """
    if drop_tol <= 0:
        raise ValueError("drop_tol must be positive")
    V = np.column_stack(list(span)) if not isinstance(span, np.ndarray) else span
    if V.ndim == 1:
        V = V[:, None]
    n = V.shape[1]
    Q, T, kept, dropped = [], [], [], []
    for k in range(n):
        v = V[:, k].astype(complex)
        norm0 = np.sqrt(abs(inner(v, v).real))
        if norm0 == 0.0:
            dropped.append(k)
            continue
        coef = np.zeros(n, dtype=complex)
        coef[k] = 1.0
        w = v
        for _ in range(2):
            for q, t in zip(Q, T):
                c = inner(w, q)
                w = w - c * q
                coef = coef - c * t
        norm = np.sqrt(abs(inner(w, w).real))
        if norm < drop_tol * norm0:
            dropped.append(k)
            continue
        Q.append(w / norm)
        T.append(coef / norm)
        kept.append(k)
    N = V.shape[0]
    vectors = np.column_stack(Q) if Q else np.zeros((N, 0), dtype=complex)
    transform = np.column_stack(T) if T else np.zeros((n, 0), dtype=complex)
    return OrthoSet(vectors, transform, tuple(kept), tuple(dropped))


def min_singular_direction(A, tol=1e-10, max_iter=2000):
    """Smallest singular value and right singular vector of a tall matrix.

    Inverse iteration on A^H A, applied through the triangular factor of a
    QR decomposition so the normal matrix is never formed.  Convergence needs
    a settled value and a direction that turns by less than about 1e-4 rad per
    step.  If the value stops decreasing before that, the iteration restarts
    from a fresh start vector mixed with the current iterate.
    """
    A = as_dense(A).astype(complex)
    m, n = A.shape
    if m < n:
        raise ValueError("min_singular_direction needs rows >= cols")
    R = np.linalg.qr(A, mode="r")
    scale = np.abs(R).max() if R.size else 1.0
    d = np.diag(R).copy()
    tiny = np.finfo(float).eps * max(scale, 1e-300)
    small = np.abs(d) < tiny
    R[np.diag_indices(n)] = np.where(small, tiny, d)

    def step(x):
        y = sla.solve_triangular(R, x, trans="C", lower=False, check_finite=False)
        y = sla.solve_triangular(R, y, lower=False, check_finite=False)
        return y / np.linalg.norm(y)

    rng = np.random.default_rng(12345)
    floor = 10 * np.finfo(float).eps * max(scale, 1e-300) * np.sqrt(n)
    turn_tol = max(tol, 5e-9)
    x = np.ones(n, dtype=complex) / np.sqrt(n)
    best = (np.inf, x)
    restarts = 0
    prev = np.inf
    for it in range(max_iter):
        x_old = x
        x = step(x)
        val = float(np.linalg.norm(A @ x))
        if val < best[0]:
            best = (val, x)
        turned = 1.0 - abs(np.vdot(x_old, x))
        if it > 1 and (val <= floor or (abs(prev - val) <= tol * val and turned <= turn_tol)):
            return val, _phase_fix(x)
        if it > 1 and val > prev * (1 + 1e-12) and restarts < 3:
            # rounding has taken over: perturb and continue from the best iterate
            restarts += 1
            y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            y -= (best[1].conj() @ y) * best[1]
            x = (best[1] + 1e-3 * y / np.linalg.norm(y))
            x /= np.linalg.norm(x)
        prev = val
    raise ConvergenceError("inverse iteration did not converge", best=best)


def _phase_fix(x):
    k = int(np.argmax(np.abs(x)))
    return x * (abs(x[k]) / x[k])


def least_squares(A, b):
    """Minimum-norm least-squares solution and relative residual ||Ax - b|| / ||b||."""
    A = as_dense(A)
    b = np.asarray(b)
    if A.shape[1] == 0:
        return np.zeros(0, dtype=b.dtype), 1.0
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    nb = np.linalg.norm(b)
    return x, float(np.linalg.norm(A @ x - b) / nb) if nb else 0.0
