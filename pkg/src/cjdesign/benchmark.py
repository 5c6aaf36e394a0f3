"""Timing and accuracy sweep comparing the exact and RBD designs."""

from __future__ import annotations

import csv
import json
import math
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import covgen
from .core import PriorSpec
from .exact_design import exact_schedule
from .rbd import RbdConfig
from .scheduler import approx_schedule, kl_divergence

METHODS = ("exact", "rbd")


@dataclass
class BenchmarkRow:
    structure: str
    n: int
    param: str
    method: str
    seed: int
    rep: int
    wall_time_seconds: float | None
    kl_vs_exact: float | None = None
    rbd_dim: int | None = None
    error: str | None = None


@dataclass
class BenchmarkReport:
    rows: list[BenchmarkRow]
    slopes: dict[str, float | None] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def times(self, method: str, n: int | None = None, structure: str | None = None,
              param: str | None = None) -> list[float]:
        return [
            r.wall_time_seconds for r in self.rows
            if r.method == method and r.wall_time_seconds is not None and r.error is None
            and (n is None or r.n == n) and (structure is None or r.structure == structure)
            and (param is None or r.param == param)
        ]

    def median_time(self, method: str, n: int, **kw) -> float | None:
        t = self.times(method, n, **kw)
        return statistics.median(t) if t else None

    def kl_values(self) -> list[float]:
        return [r.kl_vs_exact for r in self.rows if r.kl_vs_exact is not None]

    def cells(self) -> list[tuple[str, str, int]]:
        seen: dict[tuple[str, str, int], None] = {}
        for r in self.rows:
            seen[(r.structure, r.param, r.n)] = None
        return list(seen)

    def summary(self) -> dict:
        cells = []
        for structure, param, n in self.cells():
            entry = {"structure": structure, "param": param, "n": n}
            for method in METHODS:
                t = self.times(method, n, structure=structure, param=param)
                entry[method] = (
                    {"median": statistics.median(t), "min": min(t), "max": max(t)} if t else None
                )
            if entry["exact"] and entry["rbd"]:
                entry["speedup"] = entry["exact"]["median"] / entry["rbd"]["median"]
            kls = [r.kl_vs_exact for r in self.rows
                   if (r.structure, r.param, r.n) == (structure, param, n) and r.kl_vs_exact is not None]
            entry["kl_mean"] = float(np.mean(kls)) if kls else None
            entry["kl_max"] = float(np.max(kls)) if kls else None
            cells.append(entry)
        return {"config": self.config, "slopes": self.slopes, "cells": cells}

    def write(self, out) -> tuple[Path, Path]:
        out = Path(out)
        csv_path = out if out.suffix == ".csv" else out.with_suffix(".csv")
        json_path = csv_path.with_suffix(".json")
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            names = list(BenchmarkRow.__dataclass_fields__)
            w = csv.DictWriter(fh, fieldnames=names)
            w.writeheader()
            for r in self.rows:
                w.writerow({k: ("" if v is None else v) for k, v in asdict(r).items()})
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=1)
            fh.write("\n")
        return csv_path, json_path


def loglog_slope(ns: Iterable[int], times: Iterable[float]) -> float | None:
    """Least-squares slope of log(time) against log(N)."""
    ns, times = np.asarray(list(ns), dtype=float), np.asarray(list(times), dtype=float)
    if ns.size < 2 or np.unique(ns).size < 2:
        return None
    slope, _ = np.polyfit(np.log(ns), np.log(times), 1)
    return float(slope)


def fit_slopes(rows: list[BenchmarkRow]) -> dict[str, float | None]:
    """Per method, fit the slope of the median time at each N (pooled over cells)."""
    report = BenchmarkReport(rows)
    slopes: dict[str, float | None] = {}
    for method in METHODS:
        ns = sorted({r.n for r in rows if r.method == method and r.wall_time_seconds is not None})
        meds = [report.median_time(method, n) for n in ns]
        slopes[method] = loglog_slope(ns, meds)
    return slopes


def _param_label(structure: str, p: float, rho: float, dof: float | None, n: int) -> str:
    if structure in ("laplacian", "expm"):
        return f"p={p:g}"
    if structure == "toeplitz":
        return f"rho={rho:g}"
    return f"dof={dof if dof is not None else n + 2:g}"


def cell_seed(seed: int, *parts: int) -> int:
    return int(np.random.SeedSequence([seed, *parts]).generate_state(1)[0])


def run_benchmark(structures: Iterable[str] = ("laplacian", "toeplitz", "invwishart"),
                  n_list: Iterable[int] = (8, 16, 32, 64),
                  p_list: Iterable[float] = (0.5,),
                  reps: int = 20,
                  seed: int = 0,
                  skip_exact_above: int = 150,
                  rho: float = 0.5,
                  dof: float | None = None,
                  normalize: bool = True,
                  cfg: RbdConfig = RbdConfig(),
                  backend: str | None = None,
                  progress: Callable[[BenchmarkRow], None] | None = None) -> BenchmarkReport:
    """Time both methods on generated priors and record KL(exact || rbd).

    Repetitions run sequentially. Only the design computation is timed.
    A failure in one cell is recorded on its row and the sweep continues.
    """
    structures, n_list, p_list = list(structures), list(n_list), list(p_list)
    rows: list[BenchmarkRow] = []
    for s_idx, structure in enumerate(structures):
        params = p_list if structure in ("laplacian", "expm") else [None]
        for p_idx, p in enumerate(params):
            for n in n_list:
                label = _param_label(structure, p if p is not None else 0.5, rho, dof, n)
                for rep in range(reps):
                    s = cell_seed(seed, s_idx, p_idx, n, rep)
                    try:
                        C = covgen.generate(structure, n, p=p if p is not None else 0.5, rho=rho,
                                            dof=dof, seed=s, normalize=normalize)
                        spec = PriorSpec(C)
                    except Exception as exc:  # noqa: BLE001 - recorded per row
                        for method in METHODS:
                            rows.append(BenchmarkRow(structure, n, label, method, s, rep, None,
                                                     error=f"{type(exc).__name__}: {exc}"))
                        continue

                    exact = None
                    if n <= skip_exact_above:
                        row = BenchmarkRow(structure, n, label, "exact", s, rep, None)
                        try:
                            t0 = time.perf_counter()
                            exact = exact_schedule(spec, max_objects=None, backend=backend)
                            row.wall_time_seconds = time.perf_counter() - t0
                        except Exception as exc:  # noqa: BLE001
                            row.error = f"{type(exc).__name__}: {exc}"
                        rows.append(row)
                        if progress:
                            progress(row)

                    row = BenchmarkRow(structure, n, label, "rbd", s, rep, None)
                    try:
                        t0 = time.perf_counter()
                        approx = approx_schedule(spec, cfg, backend=backend)
                        row.wall_time_seconds = time.perf_counter() - t0
                        row.rbd_dim = approx.info["d"]
                        if exact is not None:
                            row.kl_vs_exact = kl_divergence(exact, approx)
                    except Exception as exc:  # noqa: BLE001
                        row.error = f"{type(exc).__name__}: {exc}"
                    rows.append(row)
                    if progress:
                        progress(row)

    config = {
        "structures": structures, "n_list": n_list, "p_list": p_list, "reps": reps,
        "seed": seed, "skip_exact_above": skip_exact_above, "rho": rho, "dof": dof,
        "normalize": normalize, "tol": cfg.tolerance, "d_max": cfg.d_max,
        "backend": backend or "auto",
    }
    report = BenchmarkReport(rows, fit_slopes(rows), config)
    for k, v in report.slopes.items():
        if v is not None and not math.isfinite(v):
            report.slopes[k] = None
    return report
