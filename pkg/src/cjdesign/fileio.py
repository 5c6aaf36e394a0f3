"""Readers and writers for covariance, schedule and comparison files."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np
from scipy import io as spio
from scipy import sparse

from .bt_model import ComparisonData
from .core import SchedulingDistribution, n_pairs, pair_to_index

FLOAT_FMT = "%.17g"


def _suffix(path) -> str:
    return Path(path).suffix.lower()


def read_matrix(path) -> np.ndarray:
    """Dense matrix from header-free CSV or Matrix Market (``.mtx``)."""
    if _suffix(path) == ".mtx":
        M = spio.mmread(str(path))
        return M.toarray() if sparse.issparse(M) else np.asarray(M, dtype=np.float64)
    M = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return M


def write_matrix(path, M: np.ndarray) -> None:
    if _suffix(path) == ".mtx":
        spio.mmwrite(str(path), sparse.coo_matrix(M), precision=17)
        return
    np.savetxt(path, np.asarray(M), delimiter=",", fmt=FLOAT_FMT)


def read_vector(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2).ravel()


def schedule_to_json(S: SchedulingDistribution, method: str | None = None,
                     meta: dict[str, Any] | None = None) -> dict[str, Any]:
    info = dict(S.info)
    meta = dict(meta or {})
    for key in ("tol", "d", "residual", "seconds", "stop_reason", "clamped"):
        if key in info and key not in meta:
            meta[key] = info[key]
    for key, value in list(meta.items()):
        if isinstance(value, float) and not math.isfinite(value):
            meta[key] = None
    return {
        "n": S.n_objects,
        "method": method or info.get("method", "unknown"),
        "pairs": [{"i": i, "j": j, "q": q} for i, j, q in S.pairs()],
        "meta": meta,
    }


def write_schedule(path, S: SchedulingDistribution, fmt: str | None = None,
                   meta: dict[str, Any] | None = None) -> None:
    fmt = fmt or ("csv" if _suffix(path) == ".csv" else "json")
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(schedule_to_json(S, meta=meta), fh, indent=1)
            fh.write("\n")
    elif fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "q"])
            for i, j, q in S.pairs():
                w.writerow([i, j, FLOAT_FMT % q])
    else:
        raise ValueError(f"unknown schedule format {fmt!r}")


def _schedule_from_pairs(n: int, rows, info: dict[str, Any]) -> SchedulingDistribution:
    probs = np.full(n_pairs(n), np.nan)
    for i, j, q in rows:
        probs[pair_to_index(int(i), int(j), n) - 1] = float(q)
    if np.isnan(probs).any():
        raise ValueError(f"schedule file does not list all {n_pairs(n)} pairs")
    return SchedulingDistribution(n, probs, info)


def read_schedule(path) -> SchedulingDistribution:
    if _suffix(path) == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [(int(r["i"]), int(r["j"]), float(r["q"])) for r in csv.DictReader(fh)]
        if not rows:
            raise ValueError(f"{path}: empty schedule")
        n = max(j for _, j, _ in rows)
        return _schedule_from_pairs(n, rows, {"method": "file"})
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    rows = [(p["i"], p["j"], p["q"]) for p in doc["pairs"]]
    info = dict(doc.get("meta") or {})
    info["method"] = doc.get("method", "unknown")
    return _schedule_from_pairs(int(doc["n"]), rows, info)


def read_comparisons(path, n_objects: int | None = None) -> ComparisonData:
    """Comparison CSV with header ``i,j,y,n`` (aggregated) or ``i,j,winner`` (raw)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = {f.strip() for f in (reader.fieldnames or [])}
        raw = [{k.strip(): v for k, v in row.items()} for row in reader]
    if {"i", "j", "y", "n"} <= fields:
        rows = [(int(r["i"]), int(r["j"]), float(r["y"]), float(r["n"])) for r in raw]
        maker = ComparisonData.from_counts
    elif {"i", "j", "winner"} <= fields:
        rows = [(int(r["i"]), int(r["j"]), int(r["winner"])) for r in raw]
        maker = ComparisonData.from_winners
    else:
        raise ValueError(f"{path}: expected header 'i,j,y,n' or 'i,j,winner', got {sorted(fields)}")
    if n_objects is None:
        n_objects = max((max(r[0], r[1]) for r in rows), default=0)
        if n_objects < 2:
            raise ValueError(f"{path}: cannot infer the number of objects; pass it explicitly")
    return maker(n_objects, rows)
