"""Dense complex linear algebra used throughout the package.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``;
vectors are 1-D. Inner products are linear in the first argument and
conjugate-linear in the second, so the analysis operator of a family
``f_w`` reads ``(Theta x)_w = <x, f_w>``.

All cutoffs are relative to the largest singular value of the input.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonConvergence, NotHermitian

DEFAULT_RANK_TOL = 1e-10
LSTSQ_RCOND = 1e-12


def as_cmatrix(M, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a 2-D complex128 array with finite entries."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def as_cvector(v, name: str = "vector") -> np.ndarray:
    x = np.asarray(v, dtype=np.complex128)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim == 2 and 1 in x.shape:
        x = x.reshape(-1)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if x.size < 1:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


def inner(f, g) -> complex:
    """``<f, g>``, linear in ``f`` and conjugate-linear in ``g``."""
    return complex(np.vdot(g, f))


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray

    def rank(self, tol: float = DEFAULT_RANK_TOL) -> int:
        if self.s.size == 0 or self.s[0] == 0.0:
            return 0
        return int(np.count_nonzero(self.s > tol * self.s[0]))


def svd(M, full_matrices: bool = True) -> SvdResult:
    """SVD ``M = U diag(s) Vh`` with ``s`` sorted descending.

    Falls back to the slower ``gesvd`` driver when the divide-and-conquer
    kernel fails; raises :class:`NonConvergence` if both fail. Real input
    is decomposed in real arithmetic.
    """
    A = as_cmatrix(M)
    if not np.any(A.imag):
        A = A.real
    try:
        u, s, vh = scipy.linalg.svd(A, full_matrices=full_matrices, lapack_driver="gesdd")
    except (np.linalg.LinAlgError, ValueError):
        try:
            u, s, vh = scipy.linalg.svd(A, full_matrices=full_matrices, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NonConvergence(f"SVD failed for {A.shape} matrix: {exc}") from exc
    return SvdResult(u, s, vh)


def singular_values(M) -> np.ndarray:
    try:
        return scipy.linalg.svdvals(as_cmatrix(M))
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc


def numerical_rank(M, tol: float = DEFAULT_RANK_TOL) -> int:
    s = singular_values(M)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def nullspace(M, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical nullspace of ``M``.

    A right singular vector belongs to the nullspace when its singular value
    is at most ``tol * sigma_1``. The zero matrix yields the whole space.
    """
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    A = as_cmatrix(M)
    res = svd(A, full_matrices=A.shape[0] < A.shape[1])
    rank = res.rank(tol)
    return res.vh[rank:].conj().T.astype(np.complex128)


def orth(M, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the range of ``M``."""
    res = svd(M, full_matrices=False)
    return res.u[:, : res.rank(tol)]


def pinv(M, rcond: float = LSTSQ_RCOND) -> np.ndarray:
    res = svd(M, full_matrices=False)
    if res.s.size == 0 or res.s[0] == 0.0:
        return np.zeros((res.vh.shape[1], res.u.shape[0]), dtype=np.complex128)
    keep = res.s > rcond * res.s[0]
    s_inv = np.zeros_like(res.s)
    s_inv[keep] = 1.0 / res.s[keep]
    return (res.vh.conj().T * s_inv) @ res.u.conj().T


def lstsq(M, b, rcond: float = LSTSQ_RCOND):
    """Minimum-norm least-squares solution of ``M x = b``.

    ``b`` may be a vector or a matrix of right-hand sides. Returns
    ``(x, residual_norm)`` where the residual is the 2-norm (Frobenius for
    several right-hand sides) of ``M x - b``.
    """
    A = as_cmatrix(M)
    B = np.asarray(b, dtype=np.complex128)
    if B.shape[0] != A.shape[0]:
        raise ValueError(f"row mismatch: {A.shape[0]} vs {B.shape[0]}")
    x = pinv(A, rcond) @ B
    return x, float(np.linalg.norm(A @ x - B))


def eig_hermitian(M, tol: float = DEFAULT_RANK_TOL):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrized before decomposition; an asymmetry larger than
    ``tol * ||M||`` raises :class:`NotHermitian`.
    """
    A = as_cmatrix(M)
    if A.shape[0] != A.shape[1]:
        raise NotHermitian(f"matrix is not square: {A.shape}")
    scale = np.linalg.norm(A, 2)
    if np.linalg.norm(A - A.conj().T, 2) > tol * max(scale, np.finfo(float).tiny):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    H = 0.5 * (A + A.conj().T)
    try:
        w, v = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    return w, v


def spectral_radius(M) -> float:
    A = as_cmatrix(M)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"spectral radius needs a square matrix, got {A.shape}")
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    return float(np.max(np.abs(w)))


def opnorm(M) -> float:
    """Spectral norm (largest singular value)."""
    A = np.asarray(M, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def principal_angles(A, B) -> np.ndarray:
    """Principal angles (radians, descending) between the column spans of A and B."""
    return scipy.linalg.subspace_angles(np.asarray(A, dtype=np.complex128), np.asarray(B, dtype=np.complex128))
