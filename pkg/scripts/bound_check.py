#!/usr/bin/env python3
"""Check the spectral distance bound and the mixing-time bound on random graphs.

For each seeded connected G(n, p) draw, report lambda2, the worst ratio of
observed distance to the distance bound over k <= K, and how the observed
first step within epsilon compares with the mixing-time bound.
"""

import argparse
import csv
import sys

import numpy as np

from nafs.graph import generate_er, is_connected
from nafs.smoothing import (
    euclid_distances,
    first_passage_steps,
    mixing_time_bound,
    spectral_info,
    theorem1_bound,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", type=int, default=50)
    ap.add_argument("--nodes", type=int, nargs=2, default=[20, 60], metavar=("MIN", "MAX"))
    ap.add_argument("--edge-prob", type=float, default=0.2)
    ap.add_argument("--feat-dim", type=int, default=8)
    ap.add_argument("--k-max", type=int, default=10)
    ap.add_argument("--epsilon", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    writer = csv.writer(sys.stdout)
    writer.writerow(["seed", "n", "m", "lambda2", "worst_ratio", "violations",
                     "median_first_step", "median_bound", "exceeding_bound"])
    rng = np.random.default_rng(args.seed)
    done = 0
    seed = args.seed
    while done < args.graphs:
        seed += 1
        n = int(rng.integers(args.nodes[0], args.nodes[1] + 1))
        g = generate_er(n, args.edge_prob, seed)
        if not is_connected(g):
            continue
        x = rng.standard_normal((n, args.feat_dim))
        spec = spectral_info(g, x)
        bound = mixing_time_bound(g, spec, args.epsilon)
        horizon = max(args.k_max, int(bound.max()))
        dist = euclid_distances(g, x, 0.0, horizon)
        bounds = np.column_stack([theorem1_bound(g, spec, k) for k in range(args.k_max + 1)])
        ratio = dist[:, :args.k_max + 1] / bounds
        first = first_passage_steps(dist, args.epsilon)
        writer.writerow([seed, n, g.m, f"{spec.lambda2:.6f}", f"{ratio.max():.4f}", int((ratio > 1).sum()),
                         float(np.median(first)), float(np.median(bound)), int(((first > bound) | (first < 0)).sum())])
        done += 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
