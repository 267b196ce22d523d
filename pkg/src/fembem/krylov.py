"""Numerical linear algebra kernels: GMRES, dense LU/SVD, sparse factorization.

GMRES is written here (modified Gram-Schmidt with one reorthogonalization
pass, restarts, residual history) because the solver report is part of the
library contract.  Dense factorizations and SVD delegate to LAPACK via
scipy/numpy behind thin wrappers that add the contract pieces (condition
estimates, smallest singular pairs).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

logger = logging.getLogger(__name__)


@dataclass
class GmresConfig:
    tol: float = 1e-8
    restart: int = 200
    maxit: int = 400
    check_linearity: bool = False


@dataclass
class GmresReport:
    iterations: int
    residual_history: list[float] = field(repr=False)
    converged: bool = False

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]


def _spot_check_linear(apply, n, rng):
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    a, b = 0.7 - 0.2j, -1.3 + 0.5j
    lhs = apply(a * x + b * y)
    rhs = a * apply(x) + b * apply(y)
    scale = np.linalg.norm(lhs) + np.linalg.norm(rhs)
    if scale > 0 and np.linalg.norm(lhs - rhs) > 1e-8 * scale:
        raise ValueError("gmres: operator failed the linearity spot check")


def gmres(apply, rhs, tol: float = 1e-8, restart: int = 200, maxit: int = 400,
          check_linearity: bool = False):
    """Restarted GMRES for complex systems with a matrix-free operator.

    Returns (solution, GmresReport).  The residual history records the
    relative residual estimate after every inner iteration; on breakdown or
    exhausted iterations the best iterate is returned with converged=False.
    """
    rhs = np.asarray(rhs, dtype=complex)
    n = rhs.size
    if check_linearity:
        _spot_check_linear(apply, n, np.random.default_rng(0))
    norm_b = np.linalg.norm(rhs)
    if norm_b == 0.0:
        return np.zeros_like(rhs), GmresReport(0, [0.0], True)

    x = np.zeros_like(rhs)
    history: list[float] = []
    total_iters = 0
    converged = False

    while total_iters < maxit and not converged:
        r = rhs - apply(x)
        beta = np.linalg.norm(r)
        if beta / norm_b <= tol:
            converged = True
            if not history:
                history.append(beta / norm_b)
            break
        m = min(restart, maxit - total_iters)
        Q = np.zeros((n, m + 1), dtype=complex)
        H = np.zeros((m + 1, m), dtype=complex)
        Q[:, 0] = r / beta
        g = np.zeros(m + 1, dtype=complex)
        g[0] = beta
        cs = np.zeros(m, dtype=complex)
        sn = np.zeros(m, dtype=complex)
        k_used = 0
        for k in range(m):
            w = apply(Q[:, k])
            # modified Gram-Schmidt with one reorthogonalization pass
            for _ in range(2):
                for i in range(k + 1):
                    hik = np.vdot(Q[:, i], w)
                    H[i, k] += hik
                    w -= hik * Q[:, i]
            hk1 = np.linalg.norm(w)
            H[k + 1, k] = hk1
            # apply stored Givens rotations to the new column
            for i in range(k):
                t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
                H[i + 1, k] = -np.conj(sn[i]) * H[i, k] + cs[i] * H[i + 1, k]
                H[i, k] = t
            # new rotation zeroing H[k+1, k] (hk1 is real >= 0, cs real)
            a = H[k, k]
            t = np.hypot(abs(a), hk1)
            if t == 0.0:
                k_used = k
                break
            if a == 0:
                cs[k], sn[k] = 0.0, 1.0
                H[k, k] = hk1
            else:
                phase = a / abs(a)
                cs[k] = abs(a) / t
                sn[k] = phase * hk1 / t
                H[k, k] = phase * t
            H[k + 1, k] = 0.0
            gk = g[k]
            g[k] = cs[k] * gk
            g[k + 1] = -np.conj(sn[k]) * gk
            total_iters += 1
            k_used = k + 1
            rel = abs(g[k + 1]) / norm_b
            history.append(rel)
            if rel <= tol:
                converged = True
                break
            if hk1 == 0.0:
                break
            Q[:, k + 1] = w / hk1
        if k_used > 0:
            y = sla.solve_triangular(H[:k_used, :k_used], g[:k_used], lower=False)
            x = x + Q[:, :k_used] @ y
        else:
            break

    if not converged:
        logger.warning("gmres did not converge in %d iterations (rel. residual %.2e)",
                       total_iters, history[-1] if history else float("nan"))
    return x, GmresReport(total_iters, history, converged)


@dataclass
class DenseLU:
    """LU factorization with a 1-norm reciprocal condition estimate."""

    lu: np.ndarray
    piv: np.ndarray
    rcond: float
    singular: bool

    def solve(self, b):
        return sla.lu_solve((self.lu, self.piv), b)


def dense_lu(A: np.ndarray) -> DenseLU:
    A = np.ascontiguousarray(A, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise ValueError("dense_lu: non-finite entries")
    anorm = np.linalg.norm(A, 1)
    lu, piv = sla.lu_factor(A)
    singular = bool(np.any(np.abs(np.diag(lu)) == 0.0))
    gecon = sla.get_lapack_funcs(("gecon",), (lu,))[0]
    rcond, _ = gecon(lu, anorm, norm="1")
    if singular:
        logger.warning("dense_lu: exactly singular matrix")
    return DenseLU(lu=lu, piv=piv, rcond=float(rcond), singular=singular)


def svd_smallest(A: np.ndarray, k: int = 1):
    """k smallest singular triples (sigma, u, v) of a dense matrix, via full SVD."""
    U, s, Vh = np.linalg.svd(np.asarray(A))
    out = []
    for i in range(1, k + 1):
        out.append((float(s[-i]), U[:, -i], Vh[-i].conj()))
    return out


def full_svd_values(A: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(A), compute_uv=False)


@dataclass
class SparseFactor:
    """Factorization of a sparse matrix with symmetric structure."""

    _lu: object

    def solve(self, b):
        return self._lu.solve(np.asarray(b))


def sparse_ldl(A) -> SparseFactor:
    """Factorize a sparse symmetric-structure matrix for repeated solves."""
    A = sp.csc_matrix(A)
    pattern = A.copy()
    pattern.data = np.ones_like(pattern.data)
    if (pattern != pattern.T).nnz != 0:
        raise ValueError("sparse_ldl expects a symmetric sparsity structure")
    return SparseFactor(spla.splu(A))


def sparse_lu(A) -> SparseFactor:
    """General sparse LU (no structural symmetry requirement)."""
    return SparseFactor(spla.splu(sp.csc_matrix(A)))
