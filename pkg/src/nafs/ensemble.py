"""Combine smoothed features from several operators r into one embedding."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import NafsError, ParameterError
from .graph import Graph, connected_components, normalized_operator
from .smoothing import SmoothingConfig, StreamingSmoother, nafs_single, prepare_features, row_normalize

STRATEGIES = ("mean", "max", "concat")
DEFAULT_R_VALUES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
# link prediction on the PubMed-like profile uses a narrower family
LINKPRED_PUBMED_R_VALUES = (0.3, 0.4, 0.5)


@dataclass(frozen=True)
class EnsembleConfig:
    r_values: tuple[float, ...] = DEFAULT_R_VALUES
    strategy: str = "mean"
    # L2-normalize each branch's rows before pooling
    normalize_branches: bool = False

    def __post_init__(self):
        r_values = tuple(float(r) for r in self.r_values)
        object.__setattr__(self, "r_values", r_values)
        if not r_values:
            raise ParameterError("at least one r value is required")
        if len(set(r_values)) != len(r_values):
            raise ParameterError(f"r values must be distinct, got {r_values}")
        if any(not 0.0 <= r <= 1.0 for r in r_values):
            raise ParameterError(f"r values must lie in [0, 1], got {r_values}")
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"unknown ensemble strategy {self.strategy!r}")


def pool(branches: Sequence[np.ndarray], strategy: str, normalize_branches: bool = False) -> np.ndarray:
    if normalize_branches:
        branches = [row_normalize(b) for b in branches]
    shapes = {b.shape for b in branches}
    if len(shapes) != 1:
        raise NafsError(f"ensemble branches disagree on shape: {sorted(shapes)}")
    if strategy == "mean":
        out = branches[0].copy()
        for b in branches[1:]:
            out += b
        return out / len(branches)
    if strategy == "max":
        out = branches[0].copy()
        for b in branches[1:]:
            np.maximum(out, b, out=out)
        return out
    if strategy == "concat":
        return np.hstack(branches)
    raise ParameterError(f"unknown ensemble strategy {strategy!r}")


def nafs_ensemble(g: Graph, x: np.ndarray, cfg: SmoothingConfig, ens: EnsembleConfig,
                  threads: int = 1, parallel_branches: bool = False) -> np.ndarray:
    """Run one smoothing branch per r and pool them with the chosen strategy."""
    components = connected_components(g)

    def branch(r):
        return nafs_single(g, x, r, cfg, threads=threads, components=components).matrix

    if parallel_branches and len(ens.r_values) > 1:
        with ThreadPoolExecutor(max_workers=len(ens.r_values)) as ex:
            branches = list(ex.map(branch, ens.r_values))
    else:
        branches = [branch(r) for r in ens.r_values]
    return pool(branches, ens.strategy, ens.normalize_branches)


def nafs_ensemble_sweep(g: Graph, x: np.ndarray, cfg: SmoothingConfig, ens: EnsembleConfig,
                        k_values: Sequence[int], threads: int = 1) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (K, embedding) for each K in ``k_values`` from a single propagation pass.

    All branches advance in lockstep; ``cfg.k_max`` is ignored in favour of
    ``max(k_values)``. Each yielded embedding equals ``nafs_ensemble`` run
    with that K.
    """
    wanted = sorted(set(int(k) for k in k_values))
    if not wanted or wanted[0] < 0:
        raise ParameterError(f"k values must be non-negative, got {list(k_values)}")
    components = connected_components(g)
    xp = prepare_features(x, cfg)
    smoothers = [StreamingSmoother(normalized_operator(g, r), xp, cfg, threads=threads,
                                   components=components) for r in ens.r_values]
    k = 0
    for target in wanted:
        while k < target:
            for s in smoothers:
                s.step()
            k += 1
        yield k, pool([s.embedding() for s in smoothers], ens.strategy, ens.normalize_branches)
