"""Time the compiled and numpy kernel backends on the hot paths.

Usage::

    python benchmarks/bench_backends.py [--repeat 5] [--json out.json]

Each workload runs with every available backend; the best of ``--repeat``
runs is reported together with the compiled/numpy speedup.
"""

from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from cjdesign import covgen, kernels
from cjdesign.core import PriorSpec
from cjdesign.exact_design import build_delta
from cjdesign.rbd import rbd
from cjdesign.scheduler import approx_schedule
from cjdesign.sparse_diff import build_E


def workloads():
    C64 = covgen.generate("laplacian", 64, p=0.5, seed=0)
    C200 = covgen.generate("invwishart", 200, seed=0)
    x = np.random.default_rng(0).standard_normal(200 * 199 // 2)
    return {
        "fill_delta N=64": lambda b: build_delta(PriorSpec(C64), backend=b),
        "rbd basis N=200": lambda b: rbd(build_E(200), backend=b),
        "rbd schedule N=200": lambda b: approx_schedule(PriorSpec(C200), backend=b),
        "rmatvec N=200 x100": lambda b: [kernels.resolve(b).diff_rmatvec(x, 200) for _ in range(100)],
        "pair_variances N=200": lambda b: kernels.resolve(b).pair_variances(C200),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None, help="also write results here")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    results = []
    print(f"{'workload':24s}" + "".join(f"{b:>12s}" for b in backends) + "   speedup")
    for name, fn in workloads().items():
        row = {"workload": name}
        for b in backends:
            fn(b)  # warm caches
            row[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
        speed = row["python"] / row["compiled"] if "compiled" in row else None
        row["speedup"] = speed
        results.append(row)
        cells = "".join(f"{row[b] * 1e3:10.2f}ms" for b in backends)
        print(f"{name:24s}{cells}   {'-' if speed is None else f'{speed:.1f}x'}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=1)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
