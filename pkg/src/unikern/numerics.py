"""Dense linear-algebra primitives with validated contracts.

Everything here is a thin, checked wrapper over LAPACK (via numpy/scipy):
inputs are rejected on non-finite entries, symmetry is enforced up to a
relative tolerance, and SPD solves expose a reusable factorization so one
coefficient matrix can serve many right-hand sides.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import FactorizationError

SYM_RTOL = 1e-10


def as_matrix(a, name="matrix"):
    """Coerce to a 2-d float64 array, rejecting empty or non-finite input."""
    A = np.asarray(a, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={A.ndim}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} contains non-finite entries")
    return A


def ensure_symmetric(A, name="matrix", rtol=SYM_RTOL):
    """Return the symmetrized matrix, rejecting violations above tolerance.

    Asymmetry below rtol * ||A||_inf is treated as round-off and averaged
    away; anything larger indicates a construction bug upstream.
    """
    A = as_matrix(A, name)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    gap = np.abs(A - A.T).max()
    scale = np.abs(A).sum(axis=1).max()
    if gap > rtol * max(scale, 1e-300):
        raise ValueError(
            f"{name} violates symmetry: max|A - A^T| = {gap:.3e} "
            f"exceeds {rtol:.0e} * ||A||_inf = {rtol * scale:.3e}"
        )
    return (A + A.T) / 2.0


@dataclass
class SymEig:
    """Eigenpairs of a symmetric matrix, eigenvalues ascending."""

    values: np.ndarray
    vectors: np.ndarray


def sym_eig_smallest(A, k):
    """Return the k algebraically smallest eigenpairs of symmetric A."""
    A = ensure_symmetric(A, "eig input")
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    vals, vecs = scipy.linalg.eigh(A, subset_by_index=(0, k - 1))
    return SymEig(values=vals, vectors=vecs)


def thin_svd(A):
    """Thin SVD: returns (U, s, V) with A = U @ diag(s) @ V.T, s descending."""
    A = as_matrix(A, "svd input")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return U, s, Vt.T


class SPDFactor:
    """Cholesky factorization of an SPD matrix, reusable across solves."""

    def __init__(self, A):
        A = ensure_symmetric(A, "SPD matrix")
        self.n = A.shape[0]
        try:
            # inputs were validated by ensure_symmetric; skip the recheck
            self._factor = scipy.linalg.cho_factor(
                A, lower=True, check_finite=False
            )
        except scipy.linalg.LinAlgError as exc:
            raise FactorizationError(
                f"Cholesky factorization failed, matrix is not positive "
                f"definite: {exc}"
            ) from exc

    def solve(self, B):
        B = np.asarray(B, dtype=np.float64)
        if not np.isfinite(B).all():
            raise ValueError("right-hand side contains non-finite entries")
        if B.shape[0] != self.n:
            raise ValueError(
                f"right-hand side has {B.shape[0]} rows, expected {self.n}"
            )
        return scipy.linalg.cho_solve(self._factor, B, check_finite=False)


def spd_factor(A):
    return SPDFactor(A)


def spd_solve(A, B):
    """Solve A X = B for symmetric positive definite A."""
    return SPDFactor(A).solve(B)
