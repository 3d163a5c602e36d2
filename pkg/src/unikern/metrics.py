"""Clustering evaluation: accuracy under optimal matching, NMI, purity,
plus a connected-components diagnostic for learned graphs."""

import numpy as np
from scipy.optimize import linear_sum_assignment


def _check_pair(predicted, truth):
    p = np.asarray(predicted, dtype=np.int64)
    t = np.asarray(truth, dtype=np.int64)
    if p.ndim != 1 or t.ndim != 1:
        raise ValueError("label vectors must be 1-dimensional")
    if p.size != t.size:
        raise ValueError(
            f"label vectors differ in length: {p.size} vs {t.size}"
        )
    if p.size == 0:
        raise ValueError("label vectors are empty")
    if p.min() < 0 or t.min() < 0:
        raise ValueError("labels must be nonnegative integers")
    return p, t


def _confusion(p, t):
    _, pi = np.unique(p, return_inverse=True)
    _, ti = np.unique(t, return_inverse=True)
    C = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(C, (pi, ti), 1)
    return C


def accuracy(predicted, truth):
    """Best fraction of agreement over one-to-one cluster matchings."""
    p, t = _check_pair(predicted, truth)
    C = _confusion(p, t)
    rows, cols = linear_sum_assignment(C, maximize=True)
    return C[rows, cols].sum() / p.size


def _entropy(counts, n):
    q = counts[counts > 0] / n
    return float(-(q * np.log(q)).sum())


def nmi(predicted, truth, norm="sqrt"):
    """Mutual information normalized by sqrt(H_p * H_t) (natural logs).

    norm="mean" divides by the arithmetic mean of the entropies instead.
    If either side is a single cluster its entropy is 0 and the score is 0,
    except when both sides are single clusters (identical partitions): 1.
    """
    p, t = _check_pair(predicted, truth)
    n = p.size
    C = _confusion(p, t)
    hp = _entropy(C.sum(axis=1), n)
    ht = _entropy(C.sum(axis=0), n)
    if hp == 0.0 and ht == 0.0:
        return 1.0
    if hp == 0.0 or ht == 0.0:
        return 0.0
    pr = C.sum(axis=1) / n
    pc = C.sum(axis=0) / n
    mask = C > 0
    pij = C[mask] / n
    outer = np.outer(pr, pc)[mask]
    mi = float((pij * np.log(pij / outer)).sum())
    denom = np.sqrt(hp * ht) if norm == "sqrt" else (hp + ht) / 2.0
    return mi / denom


def purity(predicted, truth):
    """Average over predicted clusters of their majority-class fraction."""
    p, t = _check_pair(predicted, truth)
    C = _confusion(p, t)
    return C.max(axis=1).sum() / p.size


def connected_components(Z, threshold=0.0):
    """Component count of the graph with edges (z_ij + z_ji)/2 > threshold."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ValueError("similarity graph must be square")
    n = Z.shape[0]
    adj = (Z + Z.T) / 2.0 > threshold
    seen = np.zeros(n, dtype=bool)
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(adj[i] & ~seen):
                seen[j] = True
                stack.append(j)
    return count
