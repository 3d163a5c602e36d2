"""Graph Laplacian and orthonormal embedding updates.

The embedding P (n x c, orthonormal columns) minimizes

    beta * Tr(P^T L P) + gamma * ||F - P Q||_F^2

over the set of matrices with orthonormal columns. The minimization is a
feasible curvilinear search: from the Euclidean gradient G build the skew
matrix A = G P^T - P G^T and move along the Cayley curve

    P(tau) = (I + tau/2 A)^{-1} (I - tau/2 A) P,

which stays exactly orthonormal for every step size. Step sizes start from
an alternating Barzilai-Borwein estimate and backtrack (factor 0.5,
sufficient-decrease 1e-4, at most 20 halvings) until the objective
strictly decreases, so accepted iterates never increase the objective.
Since A has rank at most 2c, the curve point is evaluated through a
2c x 2c solve instead of an n x n one.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SolverError
from .numerics import as_matrix, sym_eig_smallest

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-6
BACKTRACK_SHRINK = 0.5
BACKTRACK_DECREASE = 1e-4
MAX_BACKTRACKS = 20


@dataclass
class Laplacian:
    """L = D - W for the symmetrized affinity W = (Z + Z^T)/2."""

    L: np.ndarray
    degrees: np.ndarray

    @property
    def n(self):
        return self.L.shape[0]


def build_laplacian(Z):
    Z = as_matrix(Z, "similarity graph")
    if Z.shape[0] != Z.shape[1]:
        raise ValueError(f"similarity graph must be square, got {Z.shape}")
    W = (Z + Z.T) / 2.0
    if W.min() < 0.0:
        # routine mid-iteration state: only the split variable is projected
        logger.debug(
            "similarity graph has negative entries (min %.3e)", W.min()
        )
    deg = W.sum(axis=1)
    L = np.diag(deg) - W
    return Laplacian(L=L, degrees=deg)


def init_embedding(L, c, seed=0, mode="spectral"):
    """Starting embedding: bottom eigenvectors of L, or a random one."""
    n = L.n
    if not 1 <= c <= n:
        raise ValueError(f"cluster count must satisfy 1 <= c <= {n}, got {c}")
    if mode == "spectral":
        return sym_eig_smallest(L.L, c).vectors
    if mode == "random":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        M = rng.standard_normal((n, c))
        Q, R = np.linalg.qr(M)
        return Q * np.sign(np.diag(R))
    raise ValueError(f"unknown init mode {mode!r}")


def ky_fan_gap(L, c):
    """Sum of the c smallest Laplacian eigenvalues and the gap after them.

    A sum near zero together with a clearly positive gap certifies a graph
    with exactly c connected components.
    """
    n = L.n
    if not 1 <= c <= n:
        raise ValueError(f"cluster count must satisfy 1 <= c <= {n}, got {c}")
    vals = scipy.linalg.eigvalsh(L.L)
    total = float(vals[:c].sum())
    gap = float(vals[c] - vals[c - 1]) if c < n else 0.0
    return total, gap


def embedding_objective(L, F, Q, beta, gamma, P):
    return beta * np.einsum("ij,ij->", P, L.L @ P) + gamma * np.linalg.norm(
        F - P @ Q
    ) ** 2


def embedding_gradient(L, F, Q, beta, gamma, P):
    return 2.0 * beta * (L.L @ P) - 2.0 * gamma * (F - P @ Q) @ Q.T


def _cayley_step(P, G, tau):
    # A = G P^T - P G^T = U V^T with U = [G, P], V = [P, -G]; the curve
    # point (I + tau/2 A)^{-1} (I - tau/2 A) P reduces to a 2c x 2c solve.
    c = P.shape[1]
    U = np.hstack((G, P))
    V = np.hstack((P, -G))
    core = np.eye(2 * c) + (tau / 2.0) * (V.T @ U)
    return P - tau * U @ np.linalg.solve(core, V.T @ P)


def update_embedding(
    L,
    F,
    Q,
    beta,
    gamma,
    P,
    max_inner=200,
    grad_tol=1e-6,
    trace=None,
):
    """Descend the embedding objective from P along Cayley curves.

    Returns a feasible embedding whose objective is no greater than at
    entry. If trace is a list, one (objective, feasibility_error) pair is
    appended for the entry point and for every accepted iterate.
    """
    P = as_matrix(P, "embedding")
    n, c = P.shape
    feas = np.linalg.norm(P.T @ P - np.eye(c))
    if feas > FEAS_TOL:
        raise ValueError(
            f"starting embedding is infeasible: ||P^T P - I||_F = {feas:.3e}"
        )
    f = embedding_objective(L, F, Q, beta, gamma, P)
    G = embedding_gradient(L, F, Q, beta, gamma, P)
    if trace is not None:
        trace.append((f, feas))

    tau = 1e-3
    repairs = 0
    prev_P = None
    prev_G = None
    for it in range(max_inner):
        GtP = G.T @ P
        riem = G - P @ GtP
        if np.linalg.norm(riem) <= grad_tol:
            break
        # derivative of f along the curve at tau = 0 is -||A||_F^2 / 2
        desc = 2.0 * np.einsum("ij,ij->", G, G) - 2.0 * np.einsum(
            "ij,ij->", GtP, GtP.T
        )
        if prev_P is not None:
            dP = P - prev_P
            dG = G - prev_G
            sy = abs(np.einsum("ij,ij->", dP, dG))
            if sy > 0:
                if it % 2 == 0:
                    tau = np.einsum("ij,ij->", dP, dP) / sy
                else:
                    tau = sy / np.einsum("ij,ij->", dG, dG)
        if not np.isfinite(tau) or tau <= 0:
            tau = 1e-3
        tau = min(max(tau, 1e-12), 1e3)

        accepted = False
        t = tau
        for _ in range(MAX_BACKTRACKS):
            P_new = _cayley_step(P, G, t)
            f_new = embedding_objective(L, F, Q, beta, gamma, P_new)
            if f_new <= f - BACKTRACK_DECREASE * t * 0.5 * desc:
                accepted = True
                break
            t *= BACKTRACK_SHRINK
        if not accepted:
            break

        prev_P, prev_G = P, G
        P, f = P_new, f_new
        G = embedding_gradient(L, F, Q, beta, gamma, P)
        feas = np.linalg.norm(P.T @ P - np.eye(c))
        if feas > FEAS_TOL:
            repairs += 1
            if repairs > 1:
                raise SolverError(
                    f"embedding feasibility lost repeatedly "
                    f"(||P^T P - I||_F = {feas:.3e})"
                )
            Pq, R = np.linalg.qr(P)
            P = Pq * np.sign(np.diag(R))
            f = embedding_objective(L, F, Q, beta, gamma, P)
            G = embedding_gradient(L, F, Q, beta, gamma, P)
            feas = np.linalg.norm(P.T @ P - np.eye(c))
        if trace is not None:
            trace.append((f, feas))
    return P
