"""Dense complex linear algebra for the per-tone optimizer.

Small square matrices only (N <= ~16), thousands of them.  The SVD is a
one-sided Jacobi on columns: unconditionally convergent at this scale,
deterministic, and dependency-free.  Factors follow a fixed sign/phase
convention (largest-magnitude entry of each V column real positive) so
repeated runs produce identical bytes.

All functions are pure; arrays are never modified in place.
"""

import numpy as np

from dsmopt import backend

# double-precision headroom at N <= 16
TOL_CHOL = 1e-10
TOL_SVD = 1e-10
TOL_UNITARY = 1e-10
TOL_HERM = 1e-8
TOL_PSD = 1e-10
PIVOT_FLOOR = 1e-300


class NumlinError(Exception):
    """Base class for kernel failures."""


class NotPositiveDefinite(NumlinError):
    """Cholesky pivot fell below the floor: degenerate noise covariance."""


class SingularTriangular(NumlinError):
    """Triangular solve hit an exactly zero diagonal entry."""


class NoConvergence(NumlinError):
    """Jacobi sweep cap reached: pathological input."""


class NotHermitian(NumlinError):
    """Matrix too far from its conjugate transpose."""


class NotPSD(NumlinError):
    """Hermitian matrix has an eigenvalue below -TOL_PSD * trace."""


class SvdFactors:
    """SVD factors A = U @ diag(d) @ V^H with d sorted non-increasing."""

    __slots__ = ("U", "d", "V")

    def __init__(self, U, d, V):
        self.U = U
        self.d = d
        self.V = V

    def reconstruct(self):
        return (self.U * self.d) @ np.conj(self.V.T)


def _as_cmatrix(A, name="A"):
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(A)


def _square(A, name="A"):
    A = _as_cmatrix(A, name)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got {A.shape}")
    return A


def cholesky(A):
    """Lower-triangular L with L @ L^H = A (A Hermitian positive definite).

    Only the lower triangle of A is read.  Raises NotPositiveDefinite when a
    pivot falls below PIVOT_FLOOR.
    """
    A = _square(A)
    k = backend.get_kernels()
    L, status = k.chol(A)
    if status != 0:
        raise NotPositiveDefinite(f"pivot {status - 1} <= {PIVOT_FLOOR}")
    return L


def solve_lower(L, B):
    """X with L @ X = B for lower-triangular L (forward substitution)."""
    L = _square(L, "L")
    B = _as_cmatrix(B, "B")
    if B.shape[0] != L.shape[0]:
        raise ValueError(f"B rows {B.shape[0]} != L dim {L.shape[0]}")
    k = backend.get_kernels()
    X, status = k.solve_lower(L, B)
    if status != 0:
        raise SingularTriangular(f"zero diagonal at {status - 1}")
    return X


def svd(A, need_u=True):
    """One-sided Jacobi SVD of a square complex matrix.

    Returns SvdFactors(U, d, V) with U, V unitary within TOL_UNITARY, d
    non-increasing, and U @ diag(d) @ V^H = A within TOL_SVD relative.
    With need_u=False, U is returned as the identity placeholder (the
    factors of V and d are unaffected).
    """
    A = _square(A)
    k = backend.get_kernels()
    U, d, V, converged = k.jacobi_svd(A, need_u)
    if not converged:
        raise NoConvergence(f"Jacobi sweep cap hit for shape {A.shape}")
    return SvdFactors(U, d, V)


def hermitize(A):
    """Symmetrize (A + A^H)/2 after checking Hermitian-ness and PSD-ness.

    The PSD check is a shifted Cholesky: (A + A^H)/2 + (TOL_PSD * trace) I
    must factor, i.e. min eigenvalue >= -TOL_PSD * trace.
    """
    A = _square(A)
    nrm = np.linalg.norm(A)
    dev = np.linalg.norm(A - np.conj(A.T))
    if dev > TOL_HERM * max(nrm, 1e-300):
        raise NotHermitian(f"||A - A^H|| = {dev:.3e} > {TOL_HERM:.0e} * ||A||")
    H = (A + np.conj(A.T)) / 2.0
    tr = np.trace(H).real
    shift = TOL_PSD * max(abs(tr), 1.0) + 1e-300
    k = backend.get_kernels()
    _, status = k.chol(H + shift * np.eye(H.shape[0]))
    if status != 0:
        raise NotPSD(f"eigenvalue below -{TOL_PSD:.0e} * trace")
    return H
