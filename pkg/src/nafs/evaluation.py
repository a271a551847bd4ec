"""Node clustering and link prediction protocols for fixed embeddings."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import expit
from scipy.stats import rankdata

from .errors import DataError, ParameterError
from .graph import Graph, build_graph
from .smoothing import row_normalize

# --- K-Means --------------------------------------------------------------


@dataclass
class ClusterResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    inertia_history: list[float] = field(default_factory=list)
    restart_inertias: list[float] = field(default_factory=list)


def _sq_dists(z: np.ndarray, z_sq: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d = z_sq[:, None] - 2.0 * z @ centroids.T + np.einsum("ij,ij->i", centroids, centroids)[None, :]
    return np.maximum(d, 0.0)


def _kmeanspp(z: np.ndarray, z_sq: np.ndarray, c: int, rng: np.random.Generator) -> np.ndarray:
    n = z.shape[0]
    centers = [int(rng.integers(n))]
    closest = _sq_dists(z, z_sq, z[centers])[:, 0]
    for _ in range(1, c):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            nxt = int(rng.integers(n))
        centers.append(nxt)
        closest = np.minimum(closest, _sq_dists(z, z_sq, z[[nxt]])[:, 0])
    return z[centers].copy()


def _exact_inertia(z, assign, centroids) -> float:
    return float(((z - centroids[assign]) ** 2).sum())


def _lloyd(z, z_sq, centroids, max_iter):
    c = centroids.shape[0]
    assign = None
    history = []
    for _ in range(max_iter):
        new_assign = _sq_dists(z, z_sq, centroids).argmin(axis=1)
        history.append(_exact_inertia(z, new_assign, centroids))
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        counts = np.bincount(assign, minlength=c)
        sums = np.zeros_like(centroids)
        np.add.at(sums, assign, z)
        nonempty = counts > 0
        centroids[nonempty] = sums[nonempty] / counts[nonempty, None]
        for empty in np.flatnonzero(~nonempty):
            # reseed from the point farthest from its own centroid
            own = ((z - centroids[assign]) ** 2).sum(axis=1)
            own[counts[assign] <= 1] = -1.0
            far = int(own.argmax())
            donor = assign[far]
            assign[far] = empty
            counts[donor] -= 1
            counts[empty] = 1
            centroids[empty] = z[far]
            centroids[donor] = z[assign == donor].mean(axis=0)
    inertia = _exact_inertia(z, assign, centroids)
    if not history or history[-1] != inertia:
        history.append(inertia)
    return assign, centroids, inertia, history


def kmeans(z: np.ndarray, c: int, restarts: int = 10, seed: int = 0, max_iter: int = 300) -> ClusterResult:
    """Lloyd's algorithm with k-means++ seeding; best of ``restarts`` runs."""
    z = np.asarray(z, dtype=np.float64)
    n = z.shape[0]
    if c < 1 or restarts < 1:
        raise ParameterError(f"need c >= 1 and restarts >= 1, got c={c}, restarts={restarts}")
    if c > n:
        raise ParameterError(f"cannot form {c} clusters from {n} points")
    rng = np.random.default_rng(seed)
    z_sq = np.einsum("ij,ij->i", z, z)
    best = None
    inertias = []
    for _ in range(restarts):
        centroids = _kmeanspp(z, z_sq, c, rng)
        assign, centroids, inertia, history = _lloyd(z, z_sq, centroids, max_iter)
        inertias.append(inertia)
        if best is None or inertia < best.inertia:
            best = ClusterResult(assign, centroids, inertia, history)
    best.restart_inertias = inertias
    return best


# --- clustering metrics ---------------------------------------------------


@dataclass(frozen=True)
class ClusteringScores:
    acc: float
    nmi: float
    ari: float  # clamped at 0
    ari_raw: float


def _contingency(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise DataError(f"label vectors differ in shape: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise DataError("cannot score empty label vectors")
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def cluster_accuracy(pred, truth) -> float:
    """Best accuracy over one-to-one matchings of predicted to true labels."""
    table = _contingency(pred, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / float(table.sum())


def _entropy(counts: np.ndarray, n: int) -> float:
    return -math.fsum(c / n * math.log(c / n) for c in counts.tolist() if c > 0)


def normalized_mutual_info(pred, truth) -> float:
    """Mutual information over the arithmetic mean of the two entropies."""
    table = _contingency(pred, truth)
    n = int(table.sum())
    a = table.sum(axis=1).tolist()
    b = table.sum(axis=0).tolist()
    h = _entropy(np.array(a), n) + _entropy(np.array(b), n)
    if h == 0.0:
        return 1.0
    # fsum makes the total independent of cell order, hence exactly symmetric
    mi = math.fsum(
        nij / n * math.log(nij * n / (a[i] * b[j]))
        for (i, j), nij in np.ndenumerate(table) if nij > 0
    )
    return float(min(max(mi / (h / 2.0), 0.0), 1.0))


def adjusted_rand_index(pred, truth) -> float:
    table = _contingency(pred, truth)
    n = int(table.sum())
    sum_cells = sum(math.comb(int(v), 2) for v in table.ravel())
    sum_a = sum(math.comb(int(v), 2) for v in table.sum(axis=1))
    sum_b = sum(math.comb(int(v), 2) for v in table.sum(axis=0))
    total = math.comb(n, 2)
    # (index - expected) / (max - expected), multiplied through by 2 * total
    num = 2 * (sum_cells * total - sum_a * sum_b)
    den = (sum_a + sum_b) * total - 2 * sum_a * sum_b
    if den == 0:
        return 1.0
    return num / den


def clustering_metrics(pred, truth) -> ClusteringScores:
    ari = adjusted_rand_index(pred, truth)
    return ClusteringScores(
        acc=cluster_accuracy(pred, truth),
        nmi=normalized_mutual_info(pred, truth),
        ari=max(ari, 0.0),
        ari_raw=ari,
    )


# --- link prediction ------------------------------------------------------


@dataclass(frozen=True)
class EdgeSplit:
    train_graph: Graph
    val_pos: np.ndarray
    val_neg: np.ndarray
    test_pos: np.ndarray
    test_neg: np.ndarray
    seed: int


def _sample_non_edges(g: Graph, count: int, rng: np.random.Generator) -> np.ndarray:
    n = g.n
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    free = n * (n - 1) // 2 - g.m
    if free < count:
        raise DataError(f"graph too dense: {count} negative pairs requested, {free} non-edges exist")
    e = g.edges()
    taken = np.sort(e[:, 0] * n + e[:, 1])
    chosen = np.zeros(0, dtype=np.int64)
    while chosen.size < count:
        need = count - chosen.size
        u = rng.integers(0, n, size=2 * need + 16)
        v = rng.integers(0, n, size=2 * need + 16)
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        keys = (lo * n + hi)[lo != hi]
        if taken.size:
            pos = np.minimum(np.searchsorted(taken, keys), taken.size - 1)
            keys = keys[taken[pos] != keys]
        # keep first occurrences, in draw order, of keys not already chosen
        merged = np.concatenate([chosen, keys])
        _, first = np.unique(merged, return_index=True)
        first.sort()
        merged = merged[first]
        chosen = merged[:count]
    return np.column_stack(np.divmod(chosen, n)).astype(np.int64)


def split_edges(g: Graph, val_frac: float = 0.05, test_frac: float = 0.10, seed: int = 0) -> EdgeSplit:
    """Hold out floor(m * frac) edges for validation and test, plus equal-size negatives.

    Negatives are drawn uniformly from non-edges of the original graph, with
    no self loops and no pair appearing twice across both splits.
    """
    if val_frac < 0 or test_frac < 0 or val_frac + test_frac >= 1:
        raise ParameterError(f"invalid split fractions val={val_frac}, test={test_frac}")
    rng = np.random.default_rng(seed)
    edges = g.edges()
    m = edges.shape[0]
    n_val = int(math.floor(m * val_frac))
    n_test = int(math.floor(m * test_frac))
    perm = rng.permutation(m)
    val_pos = edges[np.sort(perm[:n_val])]
    test_pos = edges[np.sort(perm[n_val:n_val + n_test])]
    train = build_graph(edges[np.sort(perm[n_val + n_test:])], g.n)
    neg = _sample_non_edges(g, n_val + n_test, rng)
    return EdgeSplit(train, val_pos, neg[:n_val], test_pos, neg[n_val:], seed)


def decode_scores(z: np.ndarray, pairs: np.ndarray, normalize: bool = True) -> np.ndarray:
    """Inner-product decoder: sigmoid(z_u . z_v) for each (u, v) pair."""
    z = np.asarray(z, dtype=np.float64)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size and (pairs.min() < 0 or pairs.max() >= z.shape[0]):
        raise DataError(f"pair index out of range for {z.shape[0]} embeddings")
    if normalize:
        z = row_normalize(z)
    return expit(np.einsum("ij,ij->i", z[pairs[:, 0]], z[pairs[:, 1]]))


def auc_ap(pos_scores, neg_scores) -> tuple[float, float]:
    """ROC AUC (ties count one half) and step-wise average precision."""
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise DataError("AUC/AP need at least one positive and one negative score")
    ranks = rankdata(np.concatenate([pos, neg]))
    auc = (ranks[:pos.size].sum() - pos.size * (pos.size + 1) / 2.0) / (pos.size * neg.size)

    scores = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(pos.size), np.zeros(neg.size)])
    order = np.argsort(-scores, kind="mergesort")
    scores, labels = scores[order], labels[order]
    last_of_group = np.r_[np.flatnonzero(np.diff(scores)), scores.size - 1]
    tp = np.cumsum(labels)[last_of_group]
    fp = (last_of_group + 1) - tp
    precision = tp / (tp + fp)
    recall = tp / pos.size
    ap = float(np.sum(np.diff(np.r_[0.0, recall]) * precision))
    return float(auc), ap


@dataclass
class MetricReport:
    task: str
    metrics: dict[str, float]
    config: dict[str, Any] = field(default_factory=dict)
    runtime_seconds: float | None = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out = {"task": self.task, "metrics": dict(self.metrics), "config": dict(self.config)}
        if self.runtime_seconds is not None:
            out["runtime_seconds"] = float(self.runtime_seconds)
        if self.details:
            out["details"] = dict(self.details)
        return out


def linkpred_scores(z: np.ndarray, split: EdgeSplit, normalize: bool = True) -> dict[str, float]:
    out = {}
    for name, pos, neg in (("val", split.val_pos, split.val_neg), ("test", split.test_pos, split.test_neg)):
        if len(pos) and len(neg):
            auc, ap = auc_ap(decode_scores(z, pos, normalize), decode_scores(z, neg, normalize))
            out[f"{name}_auc"], out[f"{name}_ap"] = auc, ap
    return out


def run_linkpred(g: Graph, x: np.ndarray, cfg, ens, val_frac: float = 0.05, test_frac: float = 0.10,
                 seed: int = 0, normalize: bool = True, threads: int = 1) -> MetricReport:
    """Split edges, embed on the training graph only, and score held-out pairs."""
    from .ensemble import nafs_ensemble

    split = split_edges(g, val_frac, test_frac, seed)
    t0 = time.perf_counter()
    z = nafs_ensemble(split.train_graph, x, cfg, ens, threads=threads)
    runtime = time.perf_counter() - t0
    metrics = linkpred_scores(z, split, normalize)
    if "test_auc" in metrics:
        metrics["auc"], metrics["ap"] = metrics["test_auc"], metrics["test_ap"]
    config = {"val_frac": val_frac, "test_frac": test_frac, "seed": seed, "decoder_normalize": normalize}
    return MetricReport("linkpred", metrics, config, runtime)


def run_clustering(z: np.ndarray, labels, c: int, restarts: int = 10, repeats: int = 10,
                   seed: int = 0) -> MetricReport:
    """K-Means ``repeats`` times (seeds seed, seed+1, ...) and report mean and std."""
    runs = []
    for i in range(repeats):
        res = kmeans(z, c, restarts=restarts, seed=seed + i)
        runs.append(clustering_metrics(res.assignments, labels))
    metrics = {}
    for name in ("acc", "nmi", "ari"):
        vals = np.array([getattr(s, name) for s in runs])
        metrics[name] = float(vals.mean())
        metrics[f"{name}_std"] = float(vals.std())
    details = {"ari_raw": [s.ari_raw for s in runs]}
    config = {"clusters": c, "restarts": restarts, "repeats": repeats, "seed": seed}
    return MetricReport("clustering", metrics, config, None, details)
