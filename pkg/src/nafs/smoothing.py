"""Node-adaptive feature smoothing.

Features are propagated K times over a normalized operator; every node then
mixes its K+1 smoothed versions with softmax weights over a per-node
over-smoothing distance, so nodes that drift toward the stationary state
quickly lean on their early (less smoothed) representations.

The module also holds the theory-side diagnostics: the closed-form stationary
state, the spectral bound on distances, the mixing-time bound and the
degree-stratified smoothing-speed curves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DataError, ParameterError
from .graph import (
    ComponentMap,
    Graph,
    NormalizedOperator,
    connected_components,
    normalized_operator,
    spmm,
)

DISTANCE_MODES = ("cos-initial", "euclid-stationary")
WEIGHTINGS = ("adaptive", "naive-average", "single-hop")
_WEIGHTING_ALIASES = {"naive": "naive-average"}


@dataclass(frozen=True)
class SmoothingConfig:
    k_max: int = 20
    distance_mode: str = "cos-initial"
    weighting: str = "adaptive"
    row_normalize_input: bool = True

    def __post_init__(self):
        object.__setattr__(self, "weighting", _WEIGHTING_ALIASES.get(self.weighting, self.weighting))
        if self.k_max < 0:
            raise ParameterError(f"k_max must be >= 0, got {self.k_max}")
        if self.distance_mode not in DISTANCE_MODES:
            raise ParameterError(f"unknown distance mode {self.distance_mode!r}")
        if self.weighting not in WEIGHTINGS:
            raise ParameterError(f"unknown weighting {self.weighting!r}")


@dataclass(frozen=True)
class StationaryState:
    matrix: np.ndarray


@dataclass(frozen=True)
class WeightProfile:
    distances: np.ndarray  # (n, K+1)
    weights: np.ndarray  # (n, K+1)

    def weight_matrix(self, k: int) -> np.ndarray:
        """Diagonal matrix of the step-k weights."""
        return np.diag(self.weights[:, k])


@dataclass(frozen=True)
class SmoothedEmbedding:
    matrix: np.ndarray
    profile: WeightProfile


def row_normalize(x: np.ndarray) -> np.ndarray:
    """L2-normalize rows; all-zero rows are left as zeros."""
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return np.divide(x, norms, out=np.zeros_like(x), where=norms > 0)


def _check_features(op: NormalizedOperator, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != op.n:
        raise DataError(f"feature matrix has shape {x.shape}, expected ({op.n}, f)")
    return x


def iter_propagate(op: NormalizedOperator, x: np.ndarray, k_max: int, threads: int = 1) -> Iterator[np.ndarray]:
    """Yield X, op X, op^2 X, ..., op^K X while holding one matrix at a time."""
    if k_max < 0:
        raise ParameterError(f"k_max must be >= 0, got {k_max}")
    xk = _check_features(op, x)
    yield xk
    for _ in range(k_max):
        xk = spmm(op, xk, threads=threads)
        yield xk


def propagate(op: NormalizedOperator, x: np.ndarray, k_max: int, threads: int = 1) -> list[np.ndarray]:
    return list(iter_propagate(op, x, k_max, threads=threads))


def stationary_state(op: NormalizedOperator, x: np.ndarray,
                     components: ComponentMap | None = None) -> StationaryState:
    """Limit of op^k X as k grows, evaluated per connected component.

    Within a component c, entry (i, j) of the limit operator is
    d~_i^r d~_j^(1-r) / (2 m_c + n_c), so each node's stationary row is its
    own d~_i^r times a degree-weighted feature sum shared by the component.
    """
    x = _check_features(op, x)
    if components is None:
        components = connected_components(op.graph)
    dt = op.dtilde
    comp = components.component_id
    member = sp.csr_matrix((np.ones(op.n), (comp, np.arange(op.n))), shape=(components.count, op.n))
    pooled = member @ (dt[:, None] ** (1.0 - op.r) * x)
    pooled /= (2.0 * components.edge_counts + components.node_counts)[:, None]
    return StationaryState(dt[:, None] ** op.r * pooled[comp])


def _row_distance(xk: np.ndarray, ref: np.ndarray, mode: str) -> np.ndarray:
    if mode == "euclid-stationary":
        return np.linalg.norm(xk - ref, axis=1)
    if mode == "cos-initial":
        num = np.einsum("ij,ij->i", xk, ref)
        den = np.linalg.norm(xk, axis=1) * np.linalg.norm(ref, axis=1)
        return np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    raise ParameterError(f"unknown distance mode {mode!r}")


def distance_profile(scales: Sequence[np.ndarray], stationary: StationaryState | None,
                     mode: str) -> np.ndarray:
    """Per-node distances D_i(k) for every step, shape (n, K+1).

    ``euclid-stationary`` measures the Euclidean gap to the stationary row;
    ``cos-initial`` uses the cosine similarity to the (unsmoothed) input row,
    with 0 whenever either vector is zero.
    """
    if mode == "euclid-stationary":
        if stationary is None:
            raise ParameterError("euclid-stationary distances need the stationary state")
        ref = stationary.matrix
    else:
        ref = scales[0]
    return np.column_stack([_row_distance(xk, ref, mode) for xk in scales])


def smoothing_weights(distances: np.ndarray, weighting: str = "adaptive") -> WeightProfile:
    distances = np.asarray(distances, dtype=np.float64)
    if np.isnan(distances).any():
        raise DataError("distance matrix contains NaN")
    weighting = _WEIGHTING_ALIASES.get(weighting, weighting)
    n, steps = distances.shape
    if weighting == "adaptive":
        if not np.isfinite(distances).all():
            raise DataError("distance matrix contains infinite values")
        z = np.exp(distances - distances.max(axis=1, keepdims=True))
        weights = z / z.sum(axis=1, keepdims=True)
    elif weighting == "naive-average":
        weights = np.full((n, steps), 1.0 / steps)
    elif weighting == "single-hop":
        weights = np.zeros((n, steps))
        weights[:, -1] = 1.0
    else:
        raise ParameterError(f"unknown weighting {weighting!r}")
    return WeightProfile(distances, weights)


def combine(scales: Sequence[np.ndarray], profile: WeightProfile) -> np.ndarray:
    """Sum over k of W(k) op^k X, with W(k) the diagonal of step-k weights."""
    if len(scales) != profile.weights.shape[1]:
        raise DataError(f"{len(scales)} scales but weights cover {profile.weights.shape[1]} steps")
    out = np.zeros_like(scales[0])
    for k, xk in enumerate(scales):
        out += profile.weights[:, k, None] * xk
    return out


class StreamingSmoother:
    """Incremental form of propagate -> distances -> weights -> combine.

    Keeps the current propagated matrix plus one accumulator. Adaptive
    weights use an online softmax (running max and rescaled denominator), so
    :meth:`embedding` is valid after every :meth:`step` and equals the
    batch result for K = current step.
    """

    def __init__(self, op: NormalizedOperator, x: np.ndarray, cfg: SmoothingConfig,
                 threads: int = 1, components: ComponentMap | None = None):
        self.op = op
        self.cfg = cfg
        self.threads = threads
        self.xk = _check_features(op, x)
        self.k = 0
        if cfg.distance_mode == "euclid-stationary":
            self.ref = stationary_state(op, self.xk, components).matrix
        else:
            self.ref = self.xk
        self.distances: list[np.ndarray] = []
        self._acc = np.zeros_like(self.xk)
        self._denom = np.zeros(op.n)
        self._max = np.full(op.n, -np.inf)
        self._absorb()

    def _absorb(self):
        d = _row_distance(self.xk, self.ref, self.cfg.distance_mode)
        if np.isnan(d).any():
            raise DataError("distance computation produced NaN")
        self.distances.append(d)
        w = self.cfg.weighting
        if w == "adaptive":
            new_max = np.maximum(self._max, d)
            shrink = np.exp(self._max - new_max)
            fresh = np.exp(d - new_max)
            self._acc *= shrink[:, None]
            self._acc += fresh[:, None] * self.xk
            self._denom = self._denom * shrink + fresh
            self._max = new_max
        elif w == "naive-average":
            self._acc += self.xk

    def step(self):
        self.xk = spmm(self.op, self.xk, threads=self.threads)
        self.k += 1
        self._absorb()

    def embedding(self) -> np.ndarray:
        w = self.cfg.weighting
        if w == "adaptive":
            return self._acc / self._denom[:, None]
        if w == "naive-average":
            return self._acc / (self.k + 1)
        return self.xk.copy()

    def profile(self) -> WeightProfile:
        return smoothing_weights(np.column_stack(self.distances), self.cfg.weighting)


def prepare_features(x: np.ndarray, cfg: SmoothingConfig) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return row_normalize(x) if cfg.row_normalize_input else x


def nafs_single(g: Graph, x: np.ndarray, r: float, cfg: SmoothingConfig,
                threads: int = 1, components: ComponentMap | None = None) -> SmoothedEmbedding:
    """Smoothed embedding for one operator r, computed in streaming form."""
    op = normalized_operator(g, r)
    sm = StreamingSmoother(op, prepare_features(x, cfg), cfg, threads=threads, components=components)
    for _ in range(cfg.k_max):
        sm.step()
    return SmoothedEmbedding(sm.embedding(), sm.profile())


# --- spectral diagnostics -------------------------------------------------

@dataclass(frozen=True)
class SpectralInfo:
    lambda2: float
    cdx: float  # sum_j d~_j ||X_j||_2^2
    cdx_l1: float  # sum_j d~_j ||X_j||_1


def _require_connected(g: Graph, what: str):
    if g.n == 0 or connected_components(g).count != 1:
        raise DataError(f"{what} is only defined for connected graphs")


def second_eigenvalue(g: Graph, tol: float = 1e-8, dense_limit: int = 2000,
                      max_iter: int = 100_000, seed: int = 0) -> float:
    """Second-largest eigenvalue of D~^(-1/2) (A + I) D~^(-1/2).

    That matrix is similar to every member of the operator family, so the
    spectrum is shared. Small graphs use a dense symmetric eigensolve; large
    ones use power iteration on (S + I)/2 (all eigenvalues nonnegative) with
    the known top eigenvector sqrt(d~) projected out.
    """
    sym = normalized_operator(g, 0.5)
    if g.n <= dense_limit:
        vals = np.linalg.eigvalsh(sym.to_dense())
        return float(vals[-2]) if g.n > 1 else 0.0
    top = np.sqrt(g.dtilde)
    top /= np.linalg.norm(top)
    v = np.random.default_rng(seed).standard_normal(g.n)
    v -= top @ v * top
    v /= np.linalg.norm(v)
    theta = 0.0
    for _ in range(max_iter):
        w = 0.5 * (spmm(sym, v[:, None])[:, 0] + v)
        w -= top @ w * top
        new_theta = float(v @ w)
        v = w / np.linalg.norm(w)
        if abs(new_theta - theta) < tol:
            theta = new_theta
            break
        theta = new_theta
    return 2.0 * theta - 1.0


def spectral_info(g: Graph, x: np.ndarray, **eig_kwargs) -> SpectralInfo:
    x = np.asarray(x, dtype=np.float64)
    dt = g.dtilde
    return SpectralInfo(
        lambda2=second_eigenvalue(g, **eig_kwargs),
        cdx=float(dt @ np.einsum("ij,ij->i", x, x)),
        cdx_l1=float(dt @ np.abs(x).sum(axis=1)),
    )


def theorem1_bound(g: Graph, spectral: SpectralInfo, k: int) -> np.ndarray:
    """Per-node upper bound lambda2^k sqrt(cdx / d~_i) on the r = 0 Euclidean distance."""
    _require_connected(g, "the distance bound")
    return spectral.lambda2 ** k * np.sqrt(spectral.cdx / g.dtilde)


def mixing_time_bound(g: Graph, spectral: SpectralInfo, epsilon: float) -> np.ndarray:
    """Upper bound on the first step at which node i is within epsilon of stationary.

    ceil(log_{lambda2}(2 d~_i eps / sum_j d~_j |X_j|_1)), clamped at 0.
    """
    _require_connected(g, "the mixing-time bound")
    lam = spectral.lambda2
    if not 0.0 < lam < 1.0:
        raise ParameterError(f"mixing-time bound needs 0 < lambda2 < 1, got {lam}")
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if spectral.cdx_l1 == 0:
        return np.zeros(g.n, dtype=np.int64)
    arg = 2.0 * g.dtilde * epsilon / spectral.cdx_l1
    steps = np.ceil(np.log(arg) / np.log(lam))
    return np.maximum(steps, 0).astype(np.int64)


def first_passage_steps(distances: np.ndarray, epsilon: float) -> np.ndarray:
    """First k with D_i(k) <= epsilon per node, or -1 if never reached."""
    hit = distances <= epsilon
    first = hit.argmax(axis=1)
    first[~hit.any(axis=1)] = -1
    return first


def euclid_distances(g: Graph, x: np.ndarray, r: float, k_max: int, threads: int = 1) -> np.ndarray:
    """D_i(k) against the stationary state, shape (n, K+1), streamed."""
    op = normalized_operator(g, r)
    ref = stationary_state(op, x).matrix
    return np.column_stack([_row_distance(xk, ref, "euclid-stationary")
                            for xk in iter_propagate(op, x, k_max, threads=threads)])


@dataclass(frozen=True)
class DegreeBucket:
    lo: int
    hi: int | None  # exclusive; None means unbounded
    nodes: int
    curve: np.ndarray | None  # mean D(k); None when the bucket is empty


@dataclass(frozen=True)
class SpeedReport:
    overall: np.ndarray
    buckets: list[DegreeBucket]


def smoothing_speed_report(g: Graph, x: np.ndarray, r: float, k_max: int,
                           thresholds: Sequence[int] = (), threads: int = 1) -> SpeedReport:
    """Mean Euclidean distance-to-stationary per degree bucket and step.

    Ascending ``thresholds`` t_1 < ... < t_b split nodes into degree ranges
    [0, t_1), [t_1, t_2), ..., [t_b, inf).
    """
    thresholds = [int(t) for t in thresholds]
    if any(a >= b for a, b in zip(thresholds, thresholds[1:])):
        raise ParameterError(f"degree thresholds must be strictly increasing, got {thresholds}")
    dist = euclid_distances(g, x, r, k_max, threads=threads)
    edges = [0, *thresholds, None]
    deg = g.degrees
    buckets = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask = deg >= lo if hi is None else (deg >= lo) & (deg < hi)
        count = int(mask.sum())
        buckets.append(DegreeBucket(lo, hi, count, dist[mask].mean(axis=0) if count else None))
    return SpeedReport(dist.mean(axis=0), buckets)


def decile_thresholds(degrees: np.ndarray) -> list[int]:
    """Thresholds isolating the lowest and highest degree deciles."""
    lo = int(np.ceil(np.quantile(degrees, 0.1)))
    hi = int(np.floor(np.quantile(degrees, 0.9)))
    return [lo, hi] if hi > lo else [lo]
