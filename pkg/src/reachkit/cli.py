"""Command-line surface: sample synthetic clouds, compute defect profiles,
estimate reach, and run Monte Carlo rate experiments.

Exit codes: 0 success, 2 usage or input error, 1 internal error. Every
subcommand is deterministic given its full flag set including --seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

import numpy as np

from .defect import DefectConfig, defect_profile, profile_to_csv
from .errors import ConfigError, InputError
from .estimators import ModelParams, estimate_epsilon, reach, rmax_from_density
from .synth import (
    BumpSphere,
    Circle,
    Dumbbell,
    Sphere,
    Torus,
    TwoSegmentBottleneck,
    ground_truth,
    load_cloud_csv,
    sample,
    save_cloud_csv,
)

_MASK64 = (1 << 64) - 1

SEED_MIX_DOC = "splitmix64(splitmix64(base xor n*0x9E3779B97F4A7C15) xor trial*0xC2B2AE3D27D4EB4F)"


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, n: int, trial: int) -> int:
    """Deterministic per-run seed for parallel/partitioned trials."""
    stage = _splitmix64((base ^ (n * 0x9E3779B97F4A7C15)) & _MASK64)
    return _splitmix64((stage ^ (trial * 0xC2B2AE3D27D4EB4F)) & _MASK64) >> 1


def _add_manifold_flags(p: argparse.ArgumentParser):
    p.add_argument("--manifold", required=True,
                   choices=["circle", "sphere", "torus", "bumpsphere", "segments", "dumbbell"])
    p.add_argument("--radius", type=float, default=1.0, help="circle/sphere/bumpsphere radius")
    p.add_argument("--minor", type=float, default=0.5, help="torus minor radius")
    p.add_argument("--major", type=float, default=2.0, help="torus major radius")
    p.add_argument("--gamma", type=float, default=0.2, help="bump amplitude scale")
    p.add_argument("--order", type=int, default=3, help="bump exponent k")
    p.add_argument("--length", type=float, default=1.0, help="segment length")
    p.add_argument("--neck", type=float, default=0.3, help="bottleneck half-gap")
    p.add_argument("--lobe", type=float, default=1.0, help="dumbbell lobe radius")
    p.add_argument("--smoothing", type=float, default=1.0, help="dumbbell neck arc radius")
    p.add_argument("--d", type=int, default=None, help="intrinsic dimension")


def _spec_from_args(args):
    if args.manifold == "circle":
        return Circle(radius=args.radius)
    if args.manifold == "sphere":
        return Sphere(dim=args.d if args.d is not None else 2, radius=args.radius)
    if args.manifold == "torus":
        return Torus(minor=args.minor, major=args.major)
    if args.manifold == "bumpsphere":
        return BumpSphere(dim=args.d if args.d is not None else 1, radius=args.radius,
                          gamma=args.gamma, order=args.order)
    if args.manifold == "segments":
        return TwoSegmentBottleneck(length=args.length, half_gap=args.neck)
    if args.manifold == "dumbbell":
        return Dumbbell(lobe_radius=args.lobe, half_gap=args.neck, neck_radius=args.smoothing)
    raise InputError(f"unknown manifold {args.manifold!r}")


def _add_defect_flags(p: argparse.ArgumentParser):
    p.add_argument("--max-scale", type=float, default=None, help="largest scale on the grid")
    p.add_argument("--grid-size", type=int, default=200, help="number of grid scales")
    p.add_argument("--simplex-order", type=int, default=2, choices=[2, 3])


def _config_from_args(args, explicit_only=False):
    if explicit_only and args.max_scale is None and args.grid_size == 200 and args.simplex_order == 2:
        return None
    return DefectConfig(order=args.simplex_order, max_scale=args.max_scale, grid_size=args.grid_size)


def _add_params_flags(p: argparse.ArgumentParser):
    p.add_argument("--epsilon", type=float, default=None, help="Hausdorff error budget (estimated when omitted)")
    p.add_argument("--rmax", type=float, default=None, help="upper cap for all estimates")
    p.add_argument("--rmin", type=float, default=None, help="lower reach bound (enables a sanity warning)")
    p.add_argument("--fmin", type=float, default=None, help="density lower bound (derives --rmax when given with --d)")
    p.add_argument("--k", type=int, default=3, help="regularity order (>= 3)")


def _params_from_args(args) -> ModelParams:
    d = args.d if args.d is not None else 1
    r_max = args.rmax
    if r_max is None:
        if args.fmin is None or args.d is None:
            raise InputError(
                "the estimators need a cap: pass --rmax, or pass --fmin together with --d "
                "to derive it from the density bound"
            )
        r_max = rmax_from_density(args.fmin, args.d)
    return ModelParams(d=d, k=args.k, r_max=r_max, r_min=args.rmin,
                       epsilon=args.epsilon, f_min=args.fmin)


def cmd_sample(args) -> int:
    spec = _spec_from_args(args)
    cloud = sample(spec, args.n, args.seed)
    meta = {"manifold": args.manifold, "spec": repr(spec), "n": args.n, "seed": args.seed}
    save_cloud_csv(args.output, cloud, meta)
    return 0


def cmd_defect(args) -> int:
    cloud = load_cloud_csv(args.input)
    config = _config_from_args(args) or DefectConfig()
    profile = defect_profile(cloud, config)
    profile_to_csv(profile, args.output)
    return 0


def cmd_reach(args) -> int:
    cloud = load_cloud_csv(args.input)
    params = _params_from_args(args)
    config = _config_from_args(args, explicit_only=True)
    estimate = reach(cloud, params, config)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(estimate.to_json() + "\n")
    print(f"{estimate.r_hat:.12g}")
    return 0


def cmd_rates(args) -> int:
    try:
        n_grid = [int(tok) for tok in args.n_grid.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError(f"bad --n-grid: {exc}") from exc
    if len(set(n_grid)) < 3:
        raise InputError("--n-grid needs at least 3 distinct sample sizes to fit a slope")
    if args.trials < 1:
        raise InputError("--trials must be >= 1")
    spec = _spec_from_args(args)
    truth = ground_truth(spec).r
    config = _config_from_args(args, explicit_only=True)
    params = _params_from_args(args)

    rows = []
    for n in n_grid:
        for trial in range(args.trials):
            run_seed = derive_seed(args.seed, n, trial)
            row = {"n": n, "trial": trial, "seed": run_seed}
            try:
                cloud = sample(spec, n, run_seed)
                est = reach(cloud, params, config)
                row.update(
                    r_hat=est.r_hat, r_local=est.r_local, r_wfs=est.r_wfs,
                    abs_error=abs(est.r_hat - truth), branch=est.branch, error="",
                )
            except Exception as exc:  # single-run failures are recorded, not fatal
                row.update(r_hat=math.nan, r_local=math.nan, r_wfs=math.nan,
                           abs_error=math.nan, branch="", error=str(exc))
            rows.append(row)

    medians = []
    for n in n_grid:
        errs = [r["abs_error"] for r in rows if r["n"] == n and not math.isnan(r["abs_error"])]
        medians.append(float(np.median(errs)) if errs else math.nan)
    valid = [(n, m) for n, m in zip(n_grid, medians) if not math.isnan(m) and m > 0]
    slope = math.nan
    if len(valid) >= 3:
        slope = float(np.polyfit(np.log([n for n, _ in valid]), np.log([m for _, m in valid]), 1)[0])

    header = ["n", "trial", "seed", "r_hat", "r_local", "r_wfs", "abs_error", "branch", "error"]
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(row[key]) for key in header) + "\n")
    summary = {
        "manifold": args.manifold,
        "ground_truth_r": truth,
        "n_grid": n_grid,
        "trials": args.trials,
        "median_abs_error": dict(zip(map(str, n_grid), medians)),
        "loglog_slope": slope,
        "base_seed": args.seed,
        "seed_mix": SEED_MIX_DOC,
    }
    summary_path = _summary_path(args.output)
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"slope={slope:.4g} summary={summary_path}")
    return 0


def _summary_path(csv_path: str) -> str:
    return (csv_path[:-4] if csv_path.endswith(".csv") else csv_path) + ".summary.json"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reachkit",
                                     description="Reach estimation from point clouds via convexity defects")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a synthetic manifold to a cloud CSV")
    _add_manifold_flags(p)
    p.add_argument("-n", type=int, required=True, dest="n", help="sample size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("defect", help="compute a defect profile CSV from a cloud CSV")
    p.add_argument("input")
    _add_defect_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_defect)

    p = sub.add_parser("reach", help="estimate reach from a cloud CSV")
    p.add_argument("input")
    _add_params_flags(p)
    p.add_argument("--d", type=int, default=None, help="intrinsic dimension")
    _add_defect_flags(p)
    p.add_argument("-o", "--output", default=None, help="write the estimate JSON here")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("rates", help="Monte Carlo error-vs-n experiment")
    _add_manifold_flags(p)
    p.add_argument("--n-grid", required=True, help="comma-separated sample sizes (>= 3 distinct)")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    _add_params_flags(p)
    _add_defect_flags(p)
    p.add_argument("-o", "--output", required=True, help="report CSV path (summary JSON written alongside)")
    p.set_defaults(func=cmd_rates)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
