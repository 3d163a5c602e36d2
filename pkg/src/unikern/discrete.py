"""Rotation recovery and hard label extraction.

best_rotation solves the orthogonal Procrustes problem min ||F - P Q||_F
over orthogonal Q; discretize rounds the rotated embedding P Q to a
one-hot indicator matrix row by row.
"""

import warnings

import numpy as np

from .numerics import thin_svd


def best_rotation(F, P):
    """Orthogonal Q minimizing ||F - P Q||_F, via the SVD of P^T F.

    With P^T F = U S V^T the minimizer is Q = U V^T; at the optimum
    F^T P Q is symmetric positive semidefinite, which is the optimality
    certificate tested downstream. The zero matrix is legal input and
    yields the identity.
    """
    U, _, V = thin_svd(P.T @ F)
    return U @ V.T


def discretize(P, Q):
    """One-hot indicator with the 1 at each row's argmax of P Q.

    Ties break toward the lowest column index.
    """
    PQ = P @ Q
    n, c = PQ.shape
    F = np.zeros((n, c))
    F[np.arange(n), np.argmax(PQ, axis=1)] = 1.0
    return F


def labels_of(F):
    """Column index of the single 1 in each row of an indicator matrix."""
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2:
        raise ValueError("indicator matrix must be 2-dimensional")
    if not np.isin(F, (0.0, 1.0)).all() or not (F.sum(axis=1) == 1.0).all():
        raise ValueError("indicator matrix rows must be one-hot")
    for j in np.flatnonzero(F.sum(axis=0) == 0):
        warnings.warn(f"cluster {j} is empty", RuntimeWarning, stacklevel=2)
    return F.argmax(axis=1)


def one_hot(labels, c):
    """Indicator matrix with F[i, labels[i]] = 1."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= c:
        raise ValueError(f"labels must lie in [0, {c})")
    F = np.zeros((labels.size, c))
    F[np.arange(labels.size), labels] = 1.0
    return F
