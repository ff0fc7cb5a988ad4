"""Readers and writers for graphs, feature tables, and fit results.

Graphs travel as tab-separated edge lists (0-based indices, ``#`` comments,
optional ``n=<count>`` header line) or as dense 0/1 CSV when the path ends
in ``.csv``. Features are plain CSV, one row per vertex, with an optional
header detected by a non-numeric first line. All writers round-trip exactly
through the matching readers.
"""

from __future__ import annotations

import csv
import json
import re
import warnings
from pathlib import Path

import numpy as np

from .em import FitResult
from .model import FeatureMatrix, Graph, ModelParams

_HEADER_RE = re.compile(r"n\s*=\s*(\d+)")

# Field order of params.json; fixed so outputs are diff-friendly.
_PARAMS_KEYS = ("alpha", "pi", "mu", "sigma2", "Q", "j_trace", "icl")


def read_graph(path) -> Graph:
    """Load a graph, symmetrising and dropping self-loops with a warning."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _read_dense_graph(path)
    return _read_edge_list(path)


def _read_edge_list(path: Path) -> Graph:
    declared_n = None
    edges = []
    max_index = -1
    dropped = 0
    with path.open(encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            header = _HEADER_RE.fullmatch(line)
            if header:
                declared_n = int(header.group(1))
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{line_no}: expected 'i<TAB>j', got {raw!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(
                    f"{path}:{line_no}: vertex indices must be integers"
                ) from None
            if i < 0 or j < 0:
                raise ValueError(f"{path}:{line_no}: negative vertex index")
            max_index = max(max_index, i, j)
            if i == j:
                dropped += 1
                continue
            edges.append((i, j))
    if declared_n is not None and max_index >= declared_n:
        raise ValueError(
            f"{path}: vertex index {max_index} exceeds declared n={declared_n}"
        )
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} self-loop(s)", stacklevel=2)
    n = declared_n if declared_n is not None else max_index + 1
    adjacency = np.zeros((n, n))
    for i, j in edges:
        adjacency[i, j] = adjacency[j, i] = 1.0
    return Graph(adjacency)


def _read_dense_graph(path: Path) -> Graph:
    raw = _read_csv_matrix(path, allow_header=False)
    if raw.size and np.any((raw != 0.0) & (raw != 1.0)):
        raise ValueError(f"{path}: dense graph entries must be 0 or 1")
    if raw.shape[0] != raw.shape[1]:
        raise ValueError(f"{path}: dense graph must be square, got {raw.shape}")
    sym = np.maximum(raw, raw.T)
    loops = int(np.count_nonzero(np.diag(sym)))
    if loops:
        warnings.warn(f"{path}: dropped {loops} self-loop(s)", stacklevel=2)
        np.fill_diagonal(sym, 0.0)
    return Graph(sym)


def write_graph(path, graph: Graph) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        handle.write(f"n={graph.n}\n")
        for i, j in graph.edge_pairs():
            handle.write(f"{i}\t{j}\n")
    return path


def read_features(path) -> FeatureMatrix:
    return FeatureMatrix(_read_csv_matrix(Path(path), allow_header=True))


def _read_csv_matrix(path: Path, allow_header: bool) -> np.ndarray:
    rows = []
    width = None
    with path.open(encoding="utf-8", newline="") as handle:
        for row_no, cells in enumerate(csv.reader(handle), start=1):
            if not cells or all(not cell.strip() for cell in cells):
                continue
            if row_no == 1 and allow_header and not _all_numeric(cells):
                continue
            try:
                values = [float(cell) for cell in cells]
            except ValueError:
                raise ValueError(
                    f"{path}:{row_no}: non-numeric cell in {cells!r}"
                ) from None
            if not all(np.isfinite(values)):
                raise ValueError(f"{path}:{row_no}: non-finite value")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ValueError(
                    f"{path}:{row_no}: expected {width} columns, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        return np.zeros((0, 0))
    return np.array(rows)


def _all_numeric(cells) -> bool:
    try:
        [float(cell) for cell in cells]
    except ValueError:
        return False
    return True


def write_features(path, features: FeatureMatrix) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for row in features.values:
            handle.write(",".join(repr(float(x)) for x in row) + "\n")
    return path


def check_pair(graph: Graph, features: FeatureMatrix):
    if features.n != graph.n:
        raise ValueError(
            f"row-count mismatch: features have {features.n} rows, "
            f"graph has {graph.n} vertices"
        )


def write_result(fit: FitResult, out_dir) -> dict[str, Path]:
    """Write partition.csv, tau.csv, params.json, and summary.txt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    paths["partition"] = out / "partition.csv"
    with paths["partition"].open("w", encoding="utf-8") as handle:
        handle.write("vertex,label\n")
        for i, label in enumerate(fit.partition):
            handle.write(f"{i},{int(label)}\n")

    paths["tau"] = out / "tau.csv"
    with paths["tau"].open("w", encoding="utf-8") as handle:
        n_classes = fit.responsibilities.shape[1]
        handle.write(",".join(f"class_{q}" for q in range(n_classes)) + "\n")
        for row in fit.responsibilities:
            handle.write(",".join(repr(float(x)) for x in row) + "\n")

    paths["params"] = out / "params.json"
    payload = {
        "alpha": fit.params.alpha.tolist(),
        "pi": fit.params.pi.tolist(),
        "mu": fit.params.mu.tolist(),
        "sigma2": fit.params.sigma2,
        "Q": fit.params.n_classes,
        "j_trace": list(fit.bound_trace),
        "icl": fit.icl,
    }
    with paths["params"].open("w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")

    paths["summary"] = out / "summary.txt"
    labels, counts = np.unique(fit.partition, return_counts=True)
    sizes = ", ".join(f"{int(l)}: {int(c)}" for l, c in zip(labels, counts))
    lines = [
        f"vertices: {fit.responsibilities.shape[0]}",
        f"classes: {fit.params.n_classes}",
        f"mode: {fit.mode}",
        f"converged: {fit.converged}",
        f"em iterations: {len(fit.bound_trace) - 1}",
        f"final lower bound: {fit.final_bound!r}",
        f"icl: {fit.icl!r}",
        f"class sizes: {sizes}",
        f"alpha: {np.array2string(fit.params.alpha, precision=4)}",
        f"sigma2: {fit.params.sigma2:.6g}",
    ]
    paths["summary"].write_text("\n".join(lines) + "\n", encoding="utf-8")
    return paths


def read_params(path):
    """Load params.json back; returns (params, bound_trace, icl)."""
    with Path(path).open(encoding="utf-8") as handle:
        payload = json.load(handle)
    missing = [key for key in _PARAMS_KEYS if key not in payload]
    if missing:
        raise ValueError(f"{path}: missing keys {missing}")
    n_classes = int(payload["Q"])
    mu = np.array(payload["mu"], dtype=np.float64)
    if mu.size == 0:
        mu = np.zeros((n_classes, 0))
    params = ModelParams(
        alpha=np.array(payload["alpha"]),
        pi=np.array(payload["pi"]),
        mu=mu,
        sigma2=payload["sigma2"],
    )
    return params, list(payload["j_trace"]), payload["icl"]
