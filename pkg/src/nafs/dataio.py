"""File formats: edge lists, feature matrices, labels, dataset manifests, reports.

Binary matrix layout (all little-endian)::

    b"NAFSMAT1" | rows: u64 | cols: u64 | rows*cols float64, row-major
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DataError
from .evaluation import MetricReport
from .graph import Graph, build_graph

MAGIC = b"NAFSMAT1"
_HEADER = struct.Struct("<8sQQ")


def save_matrix(matrix: np.ndarray, path) -> None:
    a = np.asarray(matrix, dtype="<f8")
    if a.ndim != 2:
        raise DataError(f"expected a 2-D matrix, got shape {a.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, a.shape[0], a.shape[1]))
        fh.write(np.ascontiguousarray(a).tobytes())


def _load_binary(raw: bytes, path) -> np.ndarray:
    if len(raw) < _HEADER.size:
        raise DataError(f"{path}: truncated header ({len(raw)} of {_HEADER.size} bytes)")
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}")
    if rows and cols > (2**62) // (8 * rows):
        raise DataError(f"{path}: dimensions {rows} x {cols} overflow")
    expected = rows * cols * 8
    actual = len(raw) - _HEADER.size
    if actual != expected:
        raise DataError(f"{path}: payload is {actual} bytes, expected {expected} for {rows} x {cols}")
    return np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(rows, cols).astype(np.float64)


def _load_csv(raw: bytes, path) -> np.ndarray:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise DataError(f"{path}: neither a binary matrix nor UTF-8 CSV") from None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
        if len(rows[-1]) != len(rows[0]):
            raise DataError(f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(rows[-1])}")
    if not rows:
        return np.zeros((0, 0))
    return np.array(rows, dtype=np.float64)


def load_features(path) -> np.ndarray:
    """Read a feature matrix from the binary format or from CSV (one node per row)."""
    raw = Path(path).read_bytes()
    x = _load_binary(raw, path) if raw[:8] == MAGIC else _load_csv(raw, path)
    bad = np.argwhere(~np.isfinite(x))
    if bad.size:
        i, j = bad[0]
        raise DataError(f"{path}: non-finite value {x[i, j]} at row {i}, column {j}")
    return x


def load_edge_list(path, n: int | None = None) -> Graph:
    """Whitespace-separated 0-based pairs, one per line; '#' lines are comments.

    Without ``n`` the node count is the largest index plus one.
    """
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected two node indices, got {line.strip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer node index in {line.strip()!r}") from None
            if u < 0 or v < 0 or (n is not None and (u >= n or v >= n)):
                bound = f"[0, {n})" if n is not None else "non-negative"
                raise DataError(f"{path}:{lineno}: node index out of range ({u}, {v}); must be {bound}")
            pairs.append((u, v))
    edges = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = int(edges.max()) + 1 if edges.size else 0
    return build_graph(edges, n)


def save_edge_list(g: Graph, path) -> None:
    e = g.edges()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# undirected edge list: {g.n} nodes, {g.m} edges\n")
        for u, v in e.tolist():
            fh.write(f"{u}\t{v}\n")


def load_labels(path) -> np.ndarray:
    """One integer class id per line; line i holds the label of node i."""
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            try:
                labels.append(int(s))
            except ValueError:
                raise DataError(f"{path}:{lineno}: expected an integer class id, got {s!r}") from None
    return np.array(labels, dtype=np.int64)


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    edge_path: str
    feature_path: str
    label_path: str | None = None
    n: int | None = None
    m: int | None = None
    f: int | None = None
    num_classes: int | None = None

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"{path}: cannot read manifest: {exc}") from None
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise DataError(f"{path}: unknown manifest fields {sorted(unknown)}")
        for key in ("name", "edge_path", "feature_path"):
            if key not in data:
                raise DataError(f"{path}: manifest lacks {key!r}")
        base = path.parent
        for key in ("edge_path", "feature_path", "label_path"):
            if data.get(key) is not None:
                data[key] = str(base / data[key])
        return cls(**data)


@dataclass(frozen=True)
class Dataset:
    manifest: DatasetManifest
    graph: Graph
    features: np.ndarray
    labels: np.ndarray | None


def load_dataset(manifest_path) -> Dataset:
    """Load everything a manifest points to and check the recorded dimensions."""
    man = DatasetManifest.load(manifest_path)
    x = load_features(man.feature_path)
    n = man.n if man.n is not None else x.shape[0]
    g = load_edge_list(man.edge_path, n=n)
    labels = load_labels(man.label_path) if man.label_path else None
    checks = [("n", man.n, x.shape[0]), ("m", man.m, g.m), ("f", man.f, x.shape[1])]
    if labels is not None:
        checks.append(("labels", n, labels.size))
        checks.append(("num_classes", man.num_classes, np.unique(labels).size))
    for what, recorded, actual in checks:
        if recorded is not None and recorded != actual:
            raise DataError(f"{manifest_path}: manifest records {what}={recorded}, data has {actual}")
    return Dataset(man, g, x, labels)


# --- canonical JSON -------------------------------------------------------


def _format_float(v: float) -> str:
    if not math.isfinite(v):
        raise DataError(f"cannot serialize non-finite value {v}")
    s = format(v, ".17g")
    if all(ch.isdigit() or ch == "-" for ch in s):
        s += ".0"
    return s


def _encode(obj: Any, indent: int) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(obj[k], indent + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(pad + _encode(v, indent + 1) for v in seq) + "\n" + end + "]"
    raise DataError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """Sorted keys, floats at 17 significant digits, trailing newline."""
    return _encode(obj, 0) + "\n"


def write_report(report: MetricReport | dict, path) -> None:
    data = report.to_dict() if isinstance(report, MetricReport) else report
    Path(path).write_text(canonical_json(data), encoding="utf-8")


def read_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
