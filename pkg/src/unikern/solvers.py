"""Clustering solvers.

scsk  -- unified single-kernel solver: one outer iteration interleaves the
         graph sweep (S, Z, Y), the embedding update P, the rotation Q,
         and the hard indicator F.
scmk  -- multiple-kernel variant: each outer iteration additionally
         recombines the kernel bank and refits the kernel weights from the
         per-kernel self-representation costs.
tsep  -- decoupled three-step baseline: learn the graph alone, embed
         spectrally, then k-means the embedding rows.

A run stops when the relative split residual drops to tol AND the
indicator matrix repeats between consecutive outer iterations, or after
max_outer iterations (converged=False, traces still returned).
"""

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .discrete import best_rotation, discretize, labels_of, one_hot
from .embedding import build_laplacian, init_embedding, update_embedding
from .graph import (
    alm_residual,
    graph_factor,
    init_state,
    update_graph,
    update_multiplier,
    update_split,
)
from .kernels import combine

logger = logging.getLogger(__name__)

H_FLOOR = 1e-12


@dataclass
class HyperParams:
    """Solver hyperparameters; c is the target cluster count."""

    c: int
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1e-4
    mu: float = 1.0
    max_outer: int = 100
    tol: float = 1e-4
    seed: int = 0
    rho: float = 1.0  # optional mu growth per outer iteration; 1 = constant
    p_init: str = "spectral"  # or "random"
    q_init: str = "identity"  # or "random"

    def validate(self, n):
        for name in ("alpha", "beta", "gamma", "mu"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 2 <= self.c <= n:
            raise ValueError(f"cluster count must satisfy 2 <= c <= {n}")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class SolveResult:
    labels: np.ndarray
    F: np.ndarray
    Z: np.ndarray
    P: np.ndarray
    w: np.ndarray | None
    objective_trace: list
    residual_trace: list
    iterations: int
    converged: bool
    warnings: list = field(default_factory=list)
    w_trace: list = field(default_factory=list)


def alignment_cost(K, Z):
    """Self-representation cost Tr(K - 2 K Z + Z^T K Z) of graph Z under K."""
    Km = K.K if hasattr(K, "K") else K
    M = Km @ Z
    return float(np.trace(Km) - 2.0 * np.trace(M) + np.einsum("ij,ij->", Z, M))


def update_weights(h):
    """Closed-form kernel weights w_i = (h_i * sum_j 1/h_j)^(-2).

    Costs are floored at H_FLOOR so a perfectly self-represented kernel
    cannot blow up the reciprocals. The output always satisfies
    sum_i sqrt(w_i) = 1 and w >= 0, and is invariant to rescaling h.
    """
    h = np.maximum(np.asarray(h, dtype=np.float64), H_FLOOR)
    u = 1.0 / h
    root = u / u.sum()
    return root**2


def _monitored_objective(K, Z, P, Q, F, L, params):
    return (
        alignment_cost(K, Z)
        + params.alpha * np.abs(Z).sum()
        + params.beta * np.einsum("ij,ij->", P, L.L @ P)
        + params.gamma * np.linalg.norm(F - P @ Q) ** 2
    )


def _init_rotation(c, params, rng):
    if params.q_init == "identity":
        return np.eye(c)
    if params.q_init == "random":
        M = rng.standard_normal((c, c))
        Q, R = np.linalg.qr(M)
        return Q * np.sign(np.diag(R))
    raise ValueError(f"unknown rotation init {params.q_init!r}")


def _init_all(n, params, rng):
    state = init_state(n, params.mu, rng)
    L0 = build_laplacian(state.Z)
    P = init_embedding(L0, params.c, seed=rng, mode=params.p_init)
    Q = _init_rotation(params.c, params, rng)
    F = np.zeros((n, params.c))
    return state, P, Q, F


def _sweep(K, state, P, Q, F, params, factor=None):
    """One pass of the seven interleaved updates."""
    state = update_split(state, params.alpha)
    state = update_graph(state, K, P, params.beta, factor=factor)
    state = update_multiplier(state)
    L = build_laplacian(state.Z)
    P = update_embedding(L, F, Q, params.beta, params.gamma, P)
    Q = best_rotation(F, P)
    F = discretize(P, Q)
    return state, P, Q, F, L


def _finish(F, state, P, w, obj_trace, res_trace, it, converged, w_trace):
    warns = []
    empty = np.flatnonzero(F.sum(axis=0) == 0)
    for j in empty:
        warns.append(f"final indicator has empty cluster {j}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        labels = labels_of(F)
    return SolveResult(
        labels=labels,
        F=F,
        Z=state.Z,
        P=P,
        w=w,
        objective_trace=obj_trace,
        residual_trace=res_trace,
        iterations=it,
        converged=converged,
        warnings=warns,
        w_trace=w_trace,
    )


def scsk(K, params, _exact_iters=None):
    """Unified single-kernel solver on a PSD kernel matrix."""
    n = K.n if hasattr(K, "n") else K.shape[0]
    params.validate(n)
    rng = np.random.default_rng(params.seed)
    state, P, Q, F = _init_all(n, params, rng)

    obj_trace, res_trace = [], []
    converged = False
    it = 0
    factor = graph_factor(K, state.mu) if params.rho == 1.0 else None
    limit = params.max_outer if _exact_iters is None else _exact_iters
    while it < limit:
        it += 1
        F_prev = F
        state, P, Q, F, L = _sweep(K, state, P, Q, F, params, factor=factor)
        res = alm_residual(state)
        res_trace.append(res)
        obj_trace.append(_monitored_objective(K, state.Z, P, Q, F, L, params))
        stable = it > 1 and np.array_equal(F, F_prev)
        if _exact_iters is None and res <= params.tol and stable:
            converged = True
            break
        if params.rho != 1.0:
            state = replace(state, mu=state.mu * params.rho)
    if _exact_iters is not None:
        converged = res_trace[-1] <= params.tol
    return _finish(F, state, P, None, obj_trace, res_trace, it, converged, [])


def scmk(bank, params, _exact_iters=None):
    """Multiple-kernel solver: jointly learns the graph and kernel weights.

    Weights start at the uniform 1/r (which for r > 1 sits off the
    sqrt-simplex; the first closed-form update restores feasibility).
    """
    n = bank.n
    params.validate(n)
    r = len(bank)
    rng = np.random.default_rng(params.seed)
    state, P, Q, F = _init_all(n, params, rng)
    w = np.full(r, 1.0 / r)

    obj_trace, res_trace, w_trace = [], [], []
    converged = False
    it = 0
    limit = params.max_outer if _exact_iters is None else _exact_iters
    while it < limit:
        it += 1
        F_prev = F
        Kw = combine(bank, w)
        state, P, Q, F, L = _sweep(Kw, state, P, Q, F, params)
        h = np.array([alignment_cost(km, state.Z) for km in bank])
        w = update_weights(h)
        w_trace.append(w.copy())
        res = alm_residual(state)
        res_trace.append(res)
        obj_trace.append(_monitored_objective(Kw, state.Z, P, Q, F, L, params))
        stable = it > 1 and np.array_equal(F, F_prev)
        if _exact_iters is None and res <= params.tol and stable:
            converged = True
            break
        if params.rho != 1.0:
            state = replace(state, mu=state.mu * params.rho)
    if _exact_iters is not None:
        converged = res_trace[-1] <= params.tol
    return _finish(
        F, state, P, w, obj_trace, res_trace, it, converged, w_trace
    )


def tsep(K, params):
    """Three separate steps: graph learning, spectral embedding, k-means.

    Step 1 runs the ALM graph loop with no spectral coupling (the beta
    term is absent by construction, so beta in params is ignored). Step 2
    embeds with the c bottom eigenvectors of the learned graph Laplacian.
    Step 3 rounds with restarted k-means on the embedding rows.
    """
    n = K.n if hasattr(K, "n") else K.shape[0]
    params.validate(n)
    rng = np.random.default_rng(params.seed)
    state = init_state(n, params.mu, rng)

    obj_trace, res_trace = [], []
    converged = False
    it = 0
    factor = graph_factor(K, state.mu)
    while it < params.max_outer:
        it += 1
        state = update_split(state, params.alpha)
        state = update_graph(state, K, None, 0.0, factor=factor)
        state = update_multiplier(state)
        res = alm_residual(state)
        res_trace.append(res)
        obj_trace.append(
            alignment_cost(K, state.Z) + params.alpha * np.abs(state.Z).sum()
        )
        if res <= params.tol:
            converged = True
            break

    L = build_laplacian(state.Z)
    P = init_embedding(L, params.c, mode="spectral")
    labels = kmeans(P, params.c, restarts=20, seed=params.seed)
    F = one_hot(labels, params.c)
    return _finish(F, state, P, None, obj_trace, res_trace, it, converged, [])


def _kmeans_once(X, c, rng, max_iter):
    n = X.shape[0]
    # k-means++ seeding
    centers = np.empty((c, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.einsum("ij,ij->i", X - centers[0], X - centers[0])
    for j in range(1, c):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[j] = X[idx]
        d2 = np.minimum(
            d2, np.einsum("ij,ij->i", X - centers[j], X - centers[j])
        )

    labels = np.full(n, -1)
    repairs = 0
    for _ in range(max_iter):
        dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dist.argmin(axis=1)
        for j in range(c):
            mask = new_labels == j
            if mask.any():
                centers[j] = X[mask].mean(axis=0)
            else:
                # re-seed an emptied center at the farthest point
                far = dist[np.arange(n), new_labels].argmax()
                centers[j] = X[far]
                repairs += 1
                warnings.warn(
                    "k-means empty cluster re-seeded at farthest point",
                    RuntimeWarning,
                    stacklevel=3,
                )
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = dist.argmin(axis=1)
    wcss = dist[np.arange(n), labels].sum()
    return labels, wcss, repairs


def kmeans(X, c, restarts=20, seed=0, max_iter=300):
    """Restarted Lloyd's algorithm with k-means++ seeding, rows as samples.

    Returns the labeling with the lowest within-cluster sum of squares
    over all restarts.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("k-means input must be 2-dimensional (rows=samples)")
    n = X.shape[0]
    if not 1 <= c <= n:
        raise ValueError(f"cluster count must satisfy 1 <= c <= {n}, got {c}")
    rng = np.random.default_rng(seed)
    best_labels, best_wcss = None, np.inf
    for _ in range(restarts):
        labels, wcss, _ = _kmeans_once(X, c, rng, max_iter)
        if wcss < best_wcss:
            best_labels, best_wcss = labels, wcss
    return best_labels
