#!/usr/bin/env python3
"""Time the embed stage on growing Erdos-Renyi graphs through the CLI.

Each size runs ``nafs gen-er`` then ``nafs embed`` in fresh processes and
records wall time and the child's peak resident memory.
"""

import argparse
import json
import resource
import subprocess
import sys
import tempfile
import time
from pathlib import Path


def _peak_rss_kib() -> int:
    return resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[10_000, 30_000, 100_000])
    ap.add_argument("--avg-degree", type=float, default=10.0)
    ap.add_argument("--feat-dim", type=int, default=64)
    ap.add_argument("--k-max", type=int, default=20)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    nafs = [sys.executable, "-m", "nafs"]
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for n in args.nodes:
            p = args.avg_degree / (n - 1)
            subprocess.run(nafs + ["gen-er", "--nodes", str(n), "--edge-prob", repr(p), "--feat-dim",
                                   str(args.feat_dim), "--out-graph", str(tmp / "g.txt"),
                                   "--out-features", str(tmp / "x.bin")], check=True)
            t0 = time.perf_counter()
            proc = subprocess.run(nafs + ["embed", "--graph", str(tmp / "g.txt"), "--features", str(tmp / "x.bin"),
                                          "--k-max", str(args.k_max), "--threads", str(args.threads),
                                          "--out", str(tmp / "z.bin"), "--stdout"],
                                  check=True, capture_output=True, text=True)
            wall = time.perf_counter() - t0
            report = json.loads(proc.stdout)
            print(json.dumps({"nodes": n, "edges": report["graph"]["m"], "wall_seconds": round(wall, 2),
                              "embed_seconds": round(report["runtime_seconds"], 2),
                              "peak_rss_mib_so_far": round(_peak_rss_kib() / 1024, 1)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
