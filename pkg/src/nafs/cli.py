"""Command-line front end: ``nafs {embed,cluster,linkpred,diagnose,sweep,gen-er}``.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import dataio
from .ensemble import DEFAULT_R_VALUES, STRATEGIES, EnsembleConfig, nafs_ensemble, nafs_ensemble_sweep
from .errors import DataError, NafsError, ParameterError
from .evaluation import linkpred_scores, run_clustering, split_edges
from .graph import generate_er
from .smoothing import (
    DISTANCE_MODES,
    SmoothingConfig,
    decile_thresholds,
    euclid_distances,
    first_passage_steps,
    mixing_time_bound,
    row_normalize,
    smoothing_speed_report,
    spectral_info,
    theorem1_bound,
)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _strategy_list(text: str) -> tuple[str, ...]:
    items = tuple(v.strip() for v in text.split(",") if v.strip())
    bad = [v for v in items if v not in STRATEGIES]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"strategies must be among {STRATEGIES}, got {text!r}")
    return items


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"expected 'on' or 'off', got {text!r}")
    return text == "on"


# --- shared flag groups ---------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--threads", type=int, default=1, help="worker threads for sparse products")
    p.add_argument("--seed", type=int, default=42)


def _report_flags(p: argparse.ArgumentParser, out_help: str = "JSON report path"):
    p.add_argument("--out", type=Path, help=out_help)
    p.add_argument("--stdout", action="store_true", help="print the JSON report to stdout")
    p.add_argument("--no-runtime", action="store_true",
                   help="omit wall-clock runtime so reports are byte-reproducible")


def _input_flags(p: argparse.ArgumentParser):
    p.add_argument("--graph", type=Path, required=True, help="edge list file")
    p.add_argument("--features", type=Path, required=True, help="feature matrix (binary or CSV)")


def _embed_flags(p: argparse.ArgumentParser, single_ensemble: bool = True):
    p.add_argument("--k-max", type=int, default=20)
    p.add_argument("--r", type=_float_list, default=DEFAULT_R_VALUES, help="comma-separated r values")
    if single_ensemble:
        p.add_argument("--ensemble", choices=STRATEGIES, default="mean")
    p.add_argument("--distance", choices=DISTANCE_MODES, default="cos-initial")
    p.add_argument("--weighting", choices=("adaptive", "naive", "single-hop"), default="adaptive")
    p.add_argument("--normalize-rows", type=_on_off, default=True, metavar="{on,off}")
    p.add_argument("--normalize-branches", type=_on_off, default=False, metavar="{on,off}",
                   help="L2-normalize each branch before pooling")


def _smoothing_cfg(args, k_max=None) -> SmoothingConfig:
    return SmoothingConfig(
        k_max=args.k_max if k_max is None else k_max,
        distance_mode=args.distance,
        weighting=args.weighting,
        row_normalize_input=args.normalize_rows,
    )


def _ensemble_cfg(args, strategy=None) -> EnsembleConfig:
    return EnsembleConfig(r_values=args.r, strategy=strategy or args.ensemble,
                          normalize_branches=args.normalize_branches)


def _load_inputs(args):
    x = dataio.load_features(args.features)
    g = dataio.load_edge_list(args.graph, n=x.shape[0])
    return g, x


def _emit(args, report: dict):
    if args.no_runtime:
        report.pop("runtime_seconds", None)
    text = dataio.canonical_json(report)
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
    if args.stdout:
        sys.stdout.write(text)


def _embed_config_echo(args, strategy=None) -> dict:
    return {
        "k_max": args.k_max,
        "r_values": list(args.r),
        "ensemble": strategy or getattr(args, "ensemble", None),
        "distance": args.distance,
        "weighting": args.weighting,
        "normalize_rows": args.normalize_rows,
        "normalize_branches": args.normalize_branches,
        "seed": args.seed,
    }


def _write_csv(path: Path, header: list[str], rows, comment_header: bool = False) -> None:
    def fmt(v):
        if isinstance(v, (float, np.floating)):
            return format(float(v), ".17g")
        return str(v)

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(("# " if comment_header else "") + ",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


# --- commands -------------------------------------------------------------

def cmd_embed(args) -> int:
    g, x = _load_inputs(args)
    cfg, ens = _smoothing_cfg(args), _ensemble_cfg(args)
    t0 = time.perf_counter()
    z = nafs_ensemble(g, x, cfg, ens, threads=args.threads)
    runtime = time.perf_counter() - t0
    if args.out_format == "csv":
        # commented header so the file loads back as a feature matrix
        _write_csv(args.out, [f"d{j}" for j in range(z.shape[1])], z.tolist(), comment_header=True)
    else:
        dataio.save_matrix(z, args.out)
    report = {
        "task": "embed",
        "config": _embed_config_echo(args),
        "graph": {"n": g.n, "m": g.m},
        "embedding": {"path": str(args.out), "rows": z.shape[0], "cols": z.shape[1]},
        "runtime_seconds": runtime,
    }
    report_path = args.report if args.report is not None else Path(str(args.out) + ".json")
    if args.no_runtime:
        report.pop("runtime_seconds")
    text = dataio.canonical_json(report)
    report_path.write_text(text, encoding="utf-8")
    if args.stdout:
        sys.stdout.write(text)
    return 0


def cmd_cluster(args) -> int:
    z = dataio.load_features(args.embedding)
    labels = dataio.load_labels(args.labels)
    if labels.size != z.shape[0]:
        raise DataError(f"{labels.size} labels for {z.shape[0]} embedding rows")
    c = args.clusters if args.clusters is not None else int(np.unique(labels).size)
    t0 = time.perf_counter()
    rep = run_clustering(z, labels, c, restarts=args.restarts, repeats=args.repeats, seed=args.seed)
    rep.runtime_seconds = time.perf_counter() - t0
    _emit(args, rep.to_dict())
    return 0


def cmd_linkpred(args) -> int:
    g, x = _load_inputs(args)
    cfg, ens = _smoothing_cfg(args), _ensemble_cfg(args)
    split = split_edges(g, args.val_frac, args.test_frac, args.seed)
    t0 = time.perf_counter()
    z = nafs_ensemble(split.train_graph, x, cfg, ens, threads=args.threads)
    runtime = time.perf_counter() - t0
    metrics = linkpred_scores(z, split, args.decoder_normalize)
    if "test_auc" in metrics:
        metrics["auc"], metrics["ap"] = metrics["test_auc"], metrics["test_ap"]
    config = _embed_config_echo(args)
    config.update(val_frac=args.val_frac, test_frac=args.test_frac, decoder_normalize=args.decoder_normalize)
    _emit(args, {
        "task": "linkpred",
        "metrics": metrics,
        "config": config,
        "split": {"train_edges": split.train_graph.m, "val_pos": len(split.val_pos),
                  "test_pos": len(split.test_pos)},
        "runtime_seconds": runtime,
    })
    return 0


def cmd_diagnose_distances(args) -> int:
    g, x = _load_inputs(args)
    if args.normalize_rows:
        x = row_normalize(x)
    thresholds = args.buckets if args.buckets is not None else decile_thresholds(g.degrees)
    t0 = time.perf_counter()
    rep = smoothing_speed_report(g, x, args.r, args.k_max, thresholds, threads=args.threads)
    runtime = time.perf_counter() - t0
    rows = [("all", 0, "", g.n, k, v) for k, v in enumerate(rep.overall)]
    for b in rep.buckets:
        if b.curve is None:
            continue
        name = f"[{b.lo},{'inf' if b.hi is None else b.hi})"
        rows += [(name, b.lo, "" if b.hi is None else b.hi, b.nodes, k, v) for k, v in enumerate(b.curve)]
    if args.csv is not None:
        _write_csv(args.csv, ["bucket", "degree_lo", "degree_hi", "nodes", "k", "mean_distance"], rows)
    _emit(args, {
        "task": "diagnose-distances",
        "config": {"r": args.r, "k_max": args.k_max, "thresholds": list(thresholds),
                   "normalize_rows": args.normalize_rows},
        "buckets": [{"degree_lo": b.lo, "degree_hi": b.hi, "nodes": b.nodes,
                     "mean_distance": None if b.curve is None else b.curve.tolist()} for b in rep.buckets],
        "runtime_seconds": runtime,
    })
    return 0


def cmd_diagnose_theorem1(args) -> int:
    g, x = _load_inputs(args)
    if args.normalize_rows:
        x = row_normalize(x)
    t0 = time.perf_counter()
    spec = spectral_info(g, x)
    dist = euclid_distances(g, x, 0.0, args.k_max, threads=args.threads)
    bounds = np.column_stack([theorem1_bound(g, spec, k) for k in range(args.k_max + 1)])
    runtime = time.perf_counter() - t0
    violations = int((dist > bounds).sum())
    if args.csv is not None:
        rows = ((i, k, dist[i, k], bounds[i, k]) for i in range(g.n) for k in range(args.k_max + 1))
        _write_csv(args.csv, ["node", "k", "distance", "bound"], rows)
    _emit(args, {
        "task": "diagnose-theorem1",
        "config": {"k_max": args.k_max, "normalize_rows": args.normalize_rows},
        "lambda2": spec.lambda2,
        "cdx": spec.cdx,
        "violations": violations,
        "max_ratio": float(np.max(np.divide(dist, bounds, out=np.zeros_like(dist), where=bounds > 0))),
        "runtime_seconds": runtime,
    })
    return 0


def cmd_diagnose_mixing(args) -> int:
    g, x = _load_inputs(args)
    if args.normalize_rows:
        x = row_normalize(x)
    t0 = time.perf_counter()
    spec = spectral_info(g, x)
    bound = mixing_time_bound(g, spec, args.epsilon)
    horizon = max(args.k_max, int(bound.max()) if bound.size else 0)
    dist = euclid_distances(g, x, 0.0, horizon, threads=args.threads)
    empirical = first_passage_steps(dist, args.epsilon)
    runtime = time.perf_counter() - t0
    if args.csv is not None:
        rows = zip(range(g.n), g.degrees.tolist(), empirical.tolist(), bound.tolist())
        _write_csv(args.csv, ["node", "degree", "empirical_step", "bound"], rows)
    _emit(args, {
        "task": "diagnose-mixing-time",
        "config": {"epsilon": args.epsilon, "horizon": horizon, "normalize_rows": args.normalize_rows},
        "lambda2": spec.lambda2,
        "exceeding_bound": int(((empirical > bound) | (empirical < 0)).sum()),
        "max_bound": int(bound.max()) if bound.size else 0,
        "runtime_seconds": runtime,
    })
    return 0


def cmd_sweep(args) -> int:
    g, x = _load_inputs(args)
    if args.k_min < 0 or args.k_max < args.k_min:
        raise ParameterError(f"invalid K range {args.k_min}..{args.k_max}")
    ks = list(range(args.k_min, args.k_max + 1))
    cfg = _smoothing_cfg(args, k_max=args.k_max)
    rows = []
    t0 = time.perf_counter()
    if args.task == "linkpred":
        metric = "val_auc"
        split = split_edges(g, args.val_frac, args.test_frac, args.seed)
        if not len(split.val_pos):
            raise ParameterError("linkpred sweep needs a non-empty validation split")
        tests = {}
        for strategy in args.ensemble:
            for k, z in nafs_ensemble_sweep(split.train_graph, x, cfg, _ensemble_cfg(args, strategy), ks,
                                            threads=args.threads):
                scores = linkpred_scores(z, split, args.decoder_normalize)
                rows.append({"strategy": strategy, "k": k, "val_auc": scores["val_auc"],
                             "val_ap": scores["val_ap"]})
                tests[strategy, k] = {m: scores[m] for m in ("test_auc", "test_ap") if m in scores}
    else:
        metric = "nmi"
        labels = dataio.load_labels(args.labels)
        if labels.size != g.n:
            raise DataError(f"{labels.size} labels for {g.n} nodes")
        c = args.clusters if args.clusters is not None else int(np.unique(labels).size)
        for strategy in args.ensemble:
            for k, z in nafs_ensemble_sweep(g, x, cfg, _ensemble_cfg(args, strategy), ks, threads=args.threads):
                res = run_clustering(z, labels, c, restarts=args.restarts, repeats=args.repeats, seed=args.seed)
                rows.append({"strategy": strategy, "k": k, **res.metrics})
    order = {s: i for i, s in enumerate(args.ensemble)}
    rows.sort(key=lambda r: (-r[metric], order[r["strategy"]], r["k"]))
    best = dict(rows[0])
    if args.task == "linkpred":
        best.update(tests[best["strategy"], best["k"]])
    runtime = time.perf_counter() - t0
    config = _embed_config_echo(args, strategy=list(args.ensemble))
    config.update(task=args.task, k_min=args.k_min, k_max=args.k_max)
    if args.task == "linkpred":
        config.update(val_frac=args.val_frac, test_frac=args.test_frac, decoder_normalize=args.decoder_normalize)
    else:
        config.update(restarts=args.restarts, repeats=args.repeats)
    _emit(args, {"task": "sweep", "selection_metric": metric, "config": config, "rows": rows,
                 "best": best, "runtime_seconds": runtime})
    return 0


def cmd_gen_er(args) -> int:
    if args.nodes < 0 or args.feat_dim < 0:
        raise ParameterError("--nodes and --feat-dim must be non-negative")
    t0 = time.perf_counter()
    g = generate_er(args.nodes, args.edge_prob, args.seed)
    x = np.random.default_rng([args.seed, 1]).standard_normal((args.nodes, args.feat_dim))
    dataio.save_edge_list(g, args.out_graph)
    dataio.save_matrix(x, args.out_features)
    _emit(args, {
        "task": "gen-er",
        "config": {"nodes": args.nodes, "edge_prob": args.edge_prob, "feat_dim": args.feat_dim, "seed": args.seed},
        "graph": {"n": g.n, "m": g.m},
        "runtime_seconds": time.perf_counter() - t0,
    })
    return 0


# --- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nafs", description="Training-free node-adaptive feature smoothing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="compute an embedding")
    _input_flags(p)
    _embed_flags(p)
    _common(p)
    p.add_argument("--out", type=Path, required=True, help="embedding output path")
    p.add_argument("--out-format", choices=("bin", "csv"), default="bin")
    p.add_argument("--report", type=Path, help="JSON report path (default: <out>.json)")
    p.add_argument("--stdout", action="store_true", help="also print the report to stdout")
    p.add_argument("--no-runtime", action="store_true")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("cluster", help="K-Means clustering of an embedding")
    p.add_argument("--embedding", type=Path, required=True)
    p.add_argument("--labels", type=Path, required=True)
    p.add_argument("--clusters", type=int, help="number of clusters (default: distinct labels)")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10)
    _common(p)
    _report_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("linkpred", help="link prediction with held-out edges")
    _input_flags(p)
    _embed_flags(p)
    _common(p)
    p.add_argument("--val-frac", type=float, default=0.05)
    p.add_argument("--test-frac", type=float, default=0.10)
    p.add_argument("--decoder-normalize", type=_on_off, default=True, metavar="{on,off}")
    _report_flags(p)
    p.set_defaults(func=cmd_linkpred)

    p = sub.add_parser("diagnose", help="smoothing-speed curves and spectral bounds")
    dsub = p.add_subparsers(dest="diagnostic", required=True)
    for name, func, k_default in (("distances", cmd_diagnose_distances, 20),
                                  ("theorem1", cmd_diagnose_theorem1, 10),
                                  ("mixing-time", cmd_diagnose_mixing, 200)):
        d = dsub.add_parser(name)
        _input_flags(d)
        _common(d)
        d.add_argument("--k-max", type=int, default=k_default)
        d.add_argument("--normalize-rows", type=_on_off, default=False, metavar="{on,off}")
        d.add_argument("--csv", type=Path, help="per-node / per-bucket table")
        _report_flags(d, "JSON summary path")
        if name == "distances":
            d.add_argument("--r", type=float, default=0.0)
            d.add_argument("--buckets", type=_int_list, help="ascending degree thresholds (default: deciles)")
        if name == "mixing-time":
            d.add_argument("--epsilon", type=float, default=0.01)
        d.set_defaults(func=func)

    p = sub.add_parser("sweep", help="evaluate a range of K and rank the configurations")
    p.add_argument("--task", choices=("cluster", "linkpred"), required=True)
    _input_flags(p)
    _embed_flags(p, single_ensemble=False)
    p.set_defaults(k_max=70)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--ensemble", type=_strategy_list, default=("mean",), help="comma-separated strategies")
    p.add_argument("--labels", type=Path)
    p.add_argument("--clusters", type=int)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--val-frac", type=float, default=0.05)
    p.add_argument("--test-frac", type=float, default=0.10)
    p.add_argument("--decoder-normalize", type=_on_off, default=True, metavar="{on,off}")
    _common(p)
    _report_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-er", help="write an Erdos-Renyi graph and Gaussian features")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edge-prob", type=float, required=True)
    p.add_argument("--feat-dim", type=int, default=64)
    p.add_argument("--out-graph", type=Path, required=True)
    p.add_argument("--out-features", type=Path, required=True)
    _common(p)
    _report_flags(p)
    p.set_defaults(func=cmd_gen_er)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep" and args.task == "cluster" and args.labels is None:
        parser.error("sweep --task cluster requires --labels")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"nafs: error: {exc}", file=sys.stderr)
        return 2
    except (NafsError, OSError) as exc:
        print(f"nafs: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
