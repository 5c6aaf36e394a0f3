"""Command-line interface: ``cjdesign <command> ...``.

Exit status is 0 on success. On failure a single JSON line
``{"error": <type>, "message": <text>}`` goes to stderr and the status is 1
(2 for argument errors).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import covgen, fileio, kernels
from .benchmark import run_benchmark
from .bt_model import FitError, map_fit
from .core import DesignError, PriorSpec, validate_prior
from .exact_design import DEFAULT_MAX_OBJECTS, closed_form_schedule, exact_schedule
from .rbd import RbdConfig
from .scheduler import approx_schedule, kl_divergence, max_abs_difference, sample_pairs


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _rbd_config(args) -> RbdConfig:
    return RbdConfig(
        tolerance=args.tol,
        d_max=args.dmax,
        init="random" if args.seed is not None else "first",
        seed=args.seed,
    )


def _emit(obj) -> None:
    print(json.dumps(obj, indent=1))


# ---------------------------------------------------------------- gen-cov

def cmd_gen_cov(args) -> int:
    s = args.structure
    if args.p is not None and s not in ("laplacian", "expm"):
        raise UsageError(f"--p applies to laplacian/expm, not {s}")
    if args.rho is not None and s != "toeplitz":
        raise UsageError(f"--rho applies to toeplitz, not {s}")
    if args.dof is not None and s != "invwishart":
        raise UsageError(f"--dof applies to invwishart, not {s}")
    if args.adjacency is not None and s not in ("laplacian", "expm"):
        raise UsageError(f"--adjacency applies to laplacian/expm, not {s}")
    if args.adjacency is None and args.n is None:
        raise UsageError("--n is required unless --adjacency is given")

    if args.adjacency is not None:
        A = covgen.check_adjacency(fileio.read_matrix(args.adjacency))
        C = covgen.laplacian_covariance(A) if s == "laplacian" else covgen.expm_covariance(A)
        if args.normalize:
            C = covgen.correlation_normalize(C)
    else:
        C = covgen.generate(
            s, args.n,
            p=0.5 if args.p is None else args.p,
            rho=0.5 if args.rho is None else args.rho,
            dof=args.dof, seed=args.seed, normalize=args.normalize,
        )
    fileio.write_matrix(args.out, C)
    rep = validate_prior(C)
    _emit({
        "out": str(args.out), "structure": s, "n": C.shape[0], "seed": args.seed,
        "valid": rep.ok, "symmetry_error": rep.symmetry_error,
        "min_eigenvalue": rep.min_eigenvalue, "problems": list(rep.problems),
    })
    return 0


# ---------------------------------------------------------------- design

def _design(spec: PriorSpec, method: str, args):
    if method == "exact":
        return exact_schedule(spec, max_objects=None if args.force_dense else DEFAULT_MAX_OBJECTS)
    if method == "closed":
        return closed_form_schedule(spec)
    return approx_schedule(spec, _rbd_config(args))


def cmd_design(args) -> int:
    C = fileio.read_matrix(args.cov)
    spec = PriorSpec(C)
    S = _design(spec, args.method, args)
    fileio.write_schedule(args.out, S, args.format)
    summary = {"out": str(args.out), "method": args.method, "n": S.n_objects}
    for key in ("d", "residual", "stop_reason", "seconds"):
        if key in S.info:
            summary[key] = S.info[key]
    _emit(summary)
    return 0


# ---------------------------------------------------------------- compare

def cmd_compare(args) -> int:
    a = fileio.read_schedule(args.first)
    b = fileio.read_schedule(args.second)
    if a.n_objects != b.n_objects:
        raise UsageError(f"schedules cover different numbers of objects: {a.n_objects} vs {b.n_objects}")
    fwd, bwd = kl_divergence(a, b), kl_divergence(b, a)
    _emit({
        "n": a.n_objects,
        "kl_forward": fwd if np.isfinite(fwd) else "inf",
        "kl_backward": bwd if np.isfinite(bwd) else "inf",
        "max_abs_diff": max_abs_difference(a, b),
    })
    return 0


# ---------------------------------------------------------------- benchmark

def cmd_benchmark(args) -> int:
    structures = [s.strip() for s in args.structures.split(",") if s.strip()]
    for s in structures:
        if s not in covgen.STRUCTURES:
            raise UsageError(f"unknown structure {s!r}")

    def progress(row):
        if args.verbose:
            t = "-" if row.wall_time_seconds is None else f"{row.wall_time_seconds:.4g}s"
            print(f"{row.structure} {row.param} N={row.n} rep={row.rep} {row.method}: {t}",
                  file=sys.stderr)

    report = run_benchmark(
        structures=structures, n_list=_ints(args.n_list), p_list=_floats(args.p_list),
        reps=args.reps, seed=args.seed, skip_exact_above=args.skip_exact_above,
        rho=args.rho, dof=args.dof, normalize=not args.no_normalize,
        cfg=RbdConfig(tolerance=args.tol), backend=args.backend, progress=progress,
    )
    csv_path, json_path = report.write(args.out)
    kls = report.kl_values()
    _emit({
        "csv": str(csv_path), "json": str(json_path), "slopes": report.slopes,
        "max_kl": max(kls) if kls else None,
        "errors": sum(r.error is not None for r in report.rows),
    })
    return 0


# ---------------------------------------------------------------- sample

def cmd_sample(args) -> int:
    S = fileio.read_schedule(args.schedule)
    pairs = sample_pairs(S, args.n, seed=args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("index,i,j\n")
        for k, (i, j) in enumerate(pairs, start=1):
            fh.write(f"{k},{i},{j}\n")
    _emit({"out": str(args.out), "count": len(pairs), "seed": args.seed})
    return 0


# ---------------------------------------------------------------- bt-fit / pipeline

def _prior_from_args(args, n_hint: int | None) -> PriorSpec:
    if args.prior_cov is not None and args.prior_sd is not None:
        raise UsageError("give either --prior-cov or --prior-sd, not both")
    if args.prior_cov is not None:
        C = fileio.read_matrix(args.prior_cov)
    else:
        n = args.n_objects or n_hint
        if n is None:
            raise UsageError("--n-objects is needed with --prior-sd when there are no comparisons")
        sd = 1.0 if args.prior_sd is None else args.prior_sd
        C = (sd * sd) * np.eye(n)
    n = C.shape[0]
    if args.prior_mean is None:
        mean = np.zeros(n)
    elif Path(args.prior_mean).exists():
        mean = fileio.read_vector(args.prior_mean)
    else:
        mean = np.full(n, float(args.prior_mean))
    return PriorSpec(C, mean)


def _load_fit_inputs(args):
    n_hint = args.n_objects
    if n_hint is None and args.prior_cov is not None:
        n_hint = fileio.read_matrix(args.prior_cov).shape[0]
    data = fileio.read_comparisons(args.comparisons, n_hint)
    prior = _prior_from_args(args, data.n_objects)
    if prior.n_objects != data.n_objects:
        raise UsageError(f"prior covers {prior.n_objects} objects, comparisons cover {data.n_objects}")
    return data, prior


def _fit(data, prior, args):
    try:
        return map_fit(data, prior, tol=args.tol_fit, max_iter=args.max_iter)
    except FitError as exc:
        dump = {"iterations": exc.last.iterations, "gradient_norm": exc.last.gradient_norm,
                "last_iterate": exc.last.map_estimate.tolist()}
        raise FitError(f"{exc} | iterate: {json.dumps(dump)}", exc.last) from None


def _write_posterior(path, post) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({
            "map": post.map_estimate.tolist(),
            "covariance": post.covariance.tolist(),
            "converged": post.converged,
            "iterations": post.iterations,
            "gradient_norm": post.gradient_norm,
        }, fh)
        fh.write("\n")


def cmd_bt_fit(args) -> int:
    data, prior = _load_fit_inputs(args)
    post = _fit(data, prior, args)
    _write_posterior(args.out, post)
    if args.out_cov:
        fileio.write_matrix(args.out_cov, post.covariance)
    _emit({"out": str(args.out), "n": prior.n_objects, "comparisons": data.total,
           "iterations": post.iterations, "gradient_norm": post.gradient_norm})
    return 0


def cmd_pipeline(args) -> int:
    t0 = time.perf_counter()
    data, prior = _load_fit_inputs(args)
    t_read = time.perf_counter() - t0
    t0 = time.perf_counter()
    post = _fit(data, prior, args)
    t_fit = time.perf_counter() - t0
    phase2 = PriorSpec(post.covariance, np.zeros(prior.n_objects))
    t0 = time.perf_counter()
    S = approx_schedule(phase2, _rbd_config(args))
    t_design = time.perf_counter() - t0
    fileio.write_schedule(args.out_schedule, S, args.format)
    if args.out:
        _write_posterior(args.out, post)
    timings = {"read": t_read, "fit": t_fit, "design_rbd": t_design,
               "total": t_read + t_fit + t_design}
    if args.compare_exact:
        t0 = time.perf_counter()
        exact = exact_schedule(phase2, max_objects=None if args.force_dense else DEFAULT_MAX_OBJECTS)
        timings["design_exact"] = time.perf_counter() - t0
        timings["kl_exact_vs_rbd"] = kl_divergence(exact, S)
    _emit({"out_schedule": str(args.out_schedule), "n": prior.n_objects,
           "comparisons": data.total, "d": S.info["d"], "seconds": timings})
    return 0


# ---------------------------------------------------------------- parser

def _add_rbd_flags(p) -> None:
    p.add_argument("--tol", type=float, default=1e-6, help="RBD residual tolerance")
    p.add_argument("--dmax", type=int, default=None, help="maximum basis size (default N-1)")
    p.add_argument("--seed", type=int, default=None, help="random first column for RBD")


def _add_fit_flags(p) -> None:
    p.add_argument("--comparisons", required=True, help="CSV with header i,j,y,n or i,j,winner")
    p.add_argument("--n-objects", type=int, default=None)
    p.add_argument("--prior-mean", default=None, help="CSV vector file or a constant")
    p.add_argument("--prior-cov", default=None, help="prior covariance (.csv or .mtx)")
    p.add_argument("--prior-sd", type=float, default=None, help="isotropic prior standard deviation")
    p.add_argument("--tol-fit", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=100)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cjdesign", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version="cjdesign 0.1.0 (kernels: %s)" % kernels.BACKEND)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-cov", help="generate a prior covariance matrix")
    p.add_argument("--structure", required=True, choices=covgen.STRUCTURES)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=float, default=None, help="edge probability (laplacian/expm)")
    p.add_argument("--rho", type=float, default=None, help="Toeplitz decay (default 0.5)")
    p.add_argument("--dof", type=float, default=None, help="inverse-Wishart dof (default n+2)")
    p.add_argument("--adjacency", default=None, help="adjacency matrix file instead of a random graph")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--normalize", action="store_true", help="rescale to unit diagonal")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_cov)

    p = sub.add_parser("design", help="compute a scheduling distribution")
    p.add_argument("--cov", required=True)
    p.add_argument("--method", choices=("exact", "rbd", "closed"), default="rbd")
    _add_rbd_flags(p)
    p.add_argument("--force-dense", action="store_true",
                   help=f"allow the exact method above N={DEFAULT_MAX_OBJECTS}")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("compare", help="KL divergence between two schedules")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("benchmark", help="time exact vs RBD designs")
    p.add_argument("--structures", default="laplacian,toeplitz,invwishart")
    p.add_argument("--n-list", default="8,16,32,64")
    p.add_argument("--p-list", default="0.5")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skip-exact-above", type=int, default=150)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--dof", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--backend", choices=("compiled", "python"), default=None)
    p.add_argument("--verbose", "-v", action="store_true")
    p.add_argument("--out", required=True, help="output path; writes <out>.csv and <out>.json")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("sample", help="draw pairs from a schedule")
    p.add_argument("--schedule", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("bt-fit", help="Bradley-Terry MAP fit with Laplace covariance")
    _add_fit_flags(p)
    p.add_argument("--out", required=True, help="posterior JSON")
    p.add_argument("--out-cov", default=None, help="also write the covariance matrix")
    p.set_defaults(func=cmd_bt_fit)

    p = sub.add_parser("pipeline", help="fit phase one, then schedule phase two")
    _add_fit_flags(p)
    _add_rbd_flags(p)
    p.add_argument("--out-schedule", required=True)
    p.add_argument("--out", default=None, help="posterior JSON")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--compare-exact", action="store_true", help="also time the exact design")
    p.add_argument("--force-dense", action="store_true")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(json.dumps({"error": "UsageError", "message": str(exc)}), file=sys.stderr)
        return 2
    except (DesignError, ValueError, OSError, MemoryError, ImportError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
