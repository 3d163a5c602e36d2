"""Similarity-graph learning by augmented-Lagrangian alternating updates.

The graph Z is learned from a kernel K by splitting the l1 penalty onto an
auxiliary variable S (constraint S = Z, multiplier Y, penalty mu). One
sweep is: soft-threshold S, project S (zero diagonal, clamp negatives),
solve the coupled quadratic for Z column-wise, then take a multiplier
ascent step on Y.
"""

from dataclasses import dataclass, replace

import numpy as np

from .numerics import as_matrix, spd_factor


@dataclass
class GraphState:
    """ALM variables: graph Z, split S, multiplier Y, penalty mu."""

    Z: np.ndarray
    S: np.ndarray
    Y: np.ndarray
    mu: float


def init_state(n, mu, rng):
    """Seeded start: uniform random Z with zero diagonal, rows summing to 1."""
    Z = rng.uniform(size=(n, n))
    np.fill_diagonal(Z, 0.0)
    Z /= Z.sum(axis=1, keepdims=True)
    return GraphState(Z=Z, S=np.zeros((n, n)), Y=np.zeros((n, n)), mu=float(mu))


def soft_threshold(H, tau):
    """Elementwise shrinkage max(|h| - tau, 0) * sign(h)."""
    return np.maximum(np.abs(H) - tau, 0.0) * np.sign(H)


def update_split(state, alpha):
    """Shrink S toward Z - Y/mu, then zero the diagonal and clamp at 0."""
    H = state.Z - state.Y / state.mu
    S = soft_threshold(H, alpha / state.mu)
    np.fill_diagonal(S, 0.0)
    np.maximum(S, 0.0, out=S)
    return replace(state, S=S)


def graph_factor(K, mu):
    """Factor the SPD coefficient matrix mu I + 2K of the Z subproblem."""
    Km = K.K if hasattr(K, "K") else K
    return spd_factor(mu * np.eye(Km.shape[0]) + 2.0 * Km)


def update_graph(state, K, P, beta, factor=None):
    """Solve the Z subproblem: (mu I + 2K) Z_i = 2K_i + mu E_i - beta/2 d_i.

    E = S + Y/mu and d_i holds the squared distances between the rows of
    the embedding P. The SPD coefficient matrix is factored once and the
    factorization is shared by all n column solves; callers running many
    sweeps at constant mu can pass a precomputed factor.
    """
    Km = K.K if hasattr(K, "K") else K
    mu = state.mu
    E = state.S + state.Y / mu
    rhs = 2.0 * Km + mu * E
    if beta != 0.0 and P is not None:
        rhs -= (beta / 2.0) * pairwise_sq_dists(P)
    if factor is None:
        factor = graph_factor(Km, mu)
    Z = factor.solve(rhs)
    return replace(state, Z=Z)


def update_multiplier(state):
    """Ascent step Y <- Y + mu (S - Z)."""
    Y = state.Y + state.mu * (state.S - state.Z)
    return replace(state, Y=Y)


def alm_residual(state):
    """Relative split residual ||S - Z||_F / max(1, ||Z||_F)."""
    num = np.linalg.norm(state.S - state.Z)
    return num / max(1.0, np.linalg.norm(state.Z))


def pairwise_sq_dists(P):
    """Symmetric matrix of squared Euclidean distances between rows of P."""
    P = as_matrix(P, "embedding")
    g = np.einsum("ij,ij->i", P, P)
    D = g[:, None] + g[None, :] - 2.0 * (P @ P.T)
    np.maximum(D, 0.0, out=D)
    D = (D + D.T) / 2.0
    np.fill_diagonal(D, 0.0)
    return D
