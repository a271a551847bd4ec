#!/usr/bin/env python3
"""Convert a raw Planetoid citation dataset (Cora, Citeseer, PubMed) to a manifest.

Input is the directory holding ``ind.<name>.{x,tx,allx,y,ty,ally,graph,test.index}``
as distributed with the public GCN code. Output directory receives::

    edges.txt      undirected edge list, one pair per line
    features.bin   binary feature matrix (row i = node i)
    labels.txt     one class id per line
    manifest.json  paths plus recorded n, m, f and class count

Test nodes are put back at their original indices. Citeseer has test ids
with no feature row; those nodes get zero features and label 0.

    python scripts/convert_planetoid.py --raw planetoid/data --name cora --out data/cora
"""

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from nafs.dataio import save_edge_list, save_matrix
from nafs.graph import build_graph


def _load(raw: Path, name: str, part: str):
    with open(raw / f"ind.{name}.{part}", "rb") as fh:
        return pickle.load(fh, encoding="latin1")


def _dense(m) -> np.ndarray:
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def convert(raw: Path, name: str, out: Path) -> dict:
    x, tx, allx = (_dense(_load(raw, name, p)) for p in ("x", "tx", "allx"))
    y, ty, ally = (np.asarray(_load(raw, name, p)) for p in ("y", "ty", "ally"))
    adjacency = _load(raw, name, "graph")
    test_idx = np.loadtxt(raw / f"ind.{name}.test.index", dtype=np.int64)

    n = max(allx.shape[0] + tx.shape[0], int(test_idx.max()) + 1, max(adjacency) + 1)
    features = np.zeros((n, allx.shape[1]))
    onehot = np.zeros((n, ally.shape[1]))
    features[:allx.shape[0]] = allx
    onehot[:ally.shape[0]] = ally
    features[test_idx] = tx
    onehot[test_idx] = ty
    labels = onehot.argmax(axis=1)

    pairs = [(u, v) for u, nbrs in adjacency.items() for v in nbrs]
    g = build_graph(pairs, n)

    out.mkdir(parents=True, exist_ok=True)
    save_edge_list(g, out / "edges.txt")
    save_matrix(features, out / "features.bin")
    (out / "labels.txt").write_text("".join(f"{c}\n" for c in labels), encoding="utf-8")
    manifest = {
        "name": name, "edge_path": "edges.txt", "feature_path": "features.bin", "label_path": "labels.txt",
        "n": int(n), "m": int(g.m), "f": int(features.shape[1]), "num_classes": int(np.unique(labels).size),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--raw", type=Path, required=True, help="directory with the ind.<name>.* files")
    ap.add_argument("--name", required=True, choices=("cora", "citeseer", "pubmed"))
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args(argv)
    manifest = convert(args.raw, args.name, args.out)
    print(json.dumps(manifest, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
