#!/usr/bin/env python3
"""Run the benchmark sweeps on whichever converted datasets are present.

Link prediction on PubMed with r in {0.3, 0.4, 0.5}; node clustering on Cora
and Citeseer with each pooling strategy. Every run is a ``nafs sweep``
invocation; the reports land in ``--out`` and a short summary is printed.
Datasets are read from ``<data>/<name>/manifest.json`` (see
``convert_planetoid.py``).
"""

import argparse
import json
import sys
from pathlib import Path

from nafs.cli import main as nafs_main
from nafs.dataio import DatasetManifest


def _sweep(manifest: Path, out: Path, extra: list[str]) -> dict:
    man = DatasetManifest.load(manifest)
    argv = ["sweep", "--graph", man.edge_path, "--features", man.feature_path, "--out", str(out)] + extra
    if man.label_path:
        argv += ["--labels", man.label_path]
    code = nafs_main(argv)
    if code != 0:
        raise SystemExit(code)
    return json.loads(out.read_text())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", type=Path, default=Path("data"))
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--k-max", type=int, default=70)
    ap.add_argument("--repeats", type=int, default=1, help="K-Means repeats per K")
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    jobs = [("pubmed", "linkpred", ["--task", "linkpred", "--r", "0.3,0.4,0.5", "--ensemble", "mean"])]
    for name in ("cora", "citeseer"):
        for strategy in ("mean", "max", "concat"):
            jobs.append((name, f"cluster-{strategy}", ["--task", "cluster", "--ensemble", strategy,
                                                       "--repeats", str(args.repeats)]))
    for name, tag, extra in jobs:
        manifest = args.data / name / "manifest.json"
        if not manifest.exists():
            print(f"{name} {tag}: skipped, {manifest} not found")
            continue
        rep = _sweep(manifest, args.out / f"{name}_{tag}.json", extra + ["--k-max", str(args.k_max)])
        best = {k: (round(100 * v, 2) if isinstance(v, float) else v) for k, v in rep["best"].items()}
        print(f"{name} {tag}: {best}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
