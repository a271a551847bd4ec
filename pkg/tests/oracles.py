"""Brute-force dense reference implementations used only by the tests.

Nothing here imports the package's smoothing code: operators are built
from a dense adjacency matrix, the stationary state is the limit of repeated
squaring, and weights come from a direct (unstabilized) softmax.
"""

import itertools

import numpy as np


def dense_adjacency(g):
    a = np.zeros((g.n, g.n))
    for u, v in g.edges():
        a[u, v] = a[v, u] = 1.0
    return a


def dense_operator(a, r):
    at = a + np.eye(a.shape[0])
    dt = at.sum(axis=1)
    return np.diag(dt ** (r - 1.0)) @ at @ np.diag(dt ** (-r))


def limit_operator(p, tol=1e-12, max_squarings=40):
    """Limit of p^k by repeated squaring.

    Squaring doubles any rounding error, so stop as soon as the iterate
    settles instead of waiting for an exact fixed point.
    """
    cur = p.copy()
    for _ in range(max_squarings):
        nxt = cur @ cur
        if np.abs(nxt - cur).max() < tol:
            return nxt
        cur = nxt
    return cur


def power_iteration_stationary(p, x, tol=1e-10, max_iter=100_000):
    """Apply p until successive iterates change by less than tol."""
    cur = x.copy()
    for _ in range(max_iter):
        nxt = p @ cur
        if np.abs(nxt - cur).max() < tol:
            return nxt
        cur = nxt
    raise RuntimeError("power iteration did not converge")


def dense_distances(p, x, k_max, mode):
    stat = limit_operator(p) @ x
    out = np.zeros((x.shape[0], k_max + 1))
    pk = np.eye(p.shape[0])
    for k in range(k_max + 1):
        xk = pk @ x
        for i in range(x.shape[0]):
            if mode == "euclid-stationary":
                out[i, k] = np.sqrt(np.sum((xk[i] - stat[i]) ** 2))
            else:
                na, nb = np.sqrt(xk[i] @ xk[i]), np.sqrt(x[i] @ x[i])
                out[i, k] = 0.0 if na == 0 or nb == 0 else (xk[i] @ x[i]) / (na * nb)
        pk = p @ pk
    return out


def dense_weights(dist, weighting):
    n, steps = dist.shape
    if weighting == "adaptive":
        e = np.exp(dist)
        return e / e.sum(axis=1, keepdims=True)
    if weighting == "naive-average":
        return np.full((n, steps), 1.0 / steps)
    w = np.zeros((n, steps))
    w[:, -1] = 1.0
    return w


def dense_nafs(a, x, r, k_max, mode="cos-initial", weighting="adaptive"):
    """Sum over k of Diag(w(k)) P^k X, written out literally."""
    p = dense_operator(a, r)
    w = dense_weights(dense_distances(p, x, k_max, mode), weighting)
    out = np.zeros_like(x)
    for k in range(k_max + 1):
        out += np.diag(w[:, k]) @ np.linalg.matrix_power(p, k) @ x
    return out


def brute_auc(pos, neg):
    wins = 0.0
    for a in pos:
        for b in neg:
            wins += 1.0 if a > b else 0.5 if a == b else 0.0
    return wins / (len(pos) * len(neg))


def exhaustive_acc(pred, truth):
    """Best accuracy over injective maps from predicted to true labels."""
    p_labels = sorted(set(pred))
    t_labels = sorted(set(truth))
    pad = t_labels + [None] * max(0, len(p_labels) - len(t_labels))
    best = 0
    for perm in itertools.permutations(pad, len(p_labels)):
        mapping = dict(zip(p_labels, perm))
        best = max(best, sum(mapping[p] == t for p, t in zip(pred, truth)))
    return best / len(pred)
