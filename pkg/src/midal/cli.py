"""Command-line front end: ``midal {simulate,denoise,sweep,metrics,benchmark}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or precondition failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import experiments
from .imageio import dump_json, format_from_suffix, read_image, write_image, write_trace_csv
from .metrics import evaluate, lambda_sweep
from .solver import MidalParams, midal_solve
from .speckle import SpeckleParams, apply_speckle, rescale_image

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path: str) -> np.ndarray:
    if path == "builtin:cameraman":
        return experiments.cameraman()
    return read_image(path)


def _save(img, path: str) -> None:
    fmt = format_from_suffix(path)
    if fmt == "pfm":
        write_image(img, path, "pfm")
    else:
        write_image(img, path, fmt, display_range=(float(np.min(img)), float(np.max(img))))


def _looks(text: str) -> float:
    value = float(text)
    if not value >= 1:
        raise argparse.ArgumentTypeError(f"looks must be >= 1, got {text}")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _grid(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("grid must be a nonempty list of positive numbers")
    return values


def cmd_simulate(args) -> int:
    clean = _load(args.input)
    if (args.xmin is None) != (args.xmax is None):
        raise UsageError("--xmin and --xmax go together")
    if args.xmin is not None:
        clean = rescale_image(clean, args.xmin, args.xmax)
    noisy = apply_speckle(clean, SpeckleParams(args.looks, args.seed))
    _save(noisy, args.output)
    clean_path = args.clean or str(Path(args.output).with_name(Path(args.output).stem + "_clean.pfm"))
    _save(clean, clean_path)
    ratio = noisy / clean
    snr = float(ratio.mean() ** 2 / ratio.var())
    print(f"wrote {args.output} and {clean_path}")
    print(f"empirical SNR (mean^2/var of noise field): {snr:.4f}  (looks = {args.looks:g})")
    return EXIT_OK


def cmd_denoise(args) -> int:
    noisy = _load(args.input)
    params = MidalParams(
        looks=args.looks,
        lam=args.lam,
        mu=args.mu,
        inner_iters=args.inner_iters,
        stop_exponent=args.stop_m,
        max_outer=args.max_outer,
    )
    result = midal_solve(noisy, params)
    _save(result.estimate, args.output)
    if args.trace:
        meta = {k: v for k, v in asdict(params).items()}
        meta["mu"] = params.penalty
        meta["converged"] = result.converged
        write_trace_csv(result.trace, args.trace, meta)
    last = result.trace.records[-1]
    status = "converged" if result.converged else "hit max_outer"
    print(f"iterations: {result.iterations} ({status})")
    print(f"final constraint ||z-u||^2: {last.constraint_sq:.6e}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    noisy = _load(args.noisy)
    truth = _load(args.truth)
    if noisy.shape != truth.shape:
        raise UsageError(f"shape mismatch: noisy {noisy.shape} vs truth {truth.shape}")
    grid = sorted(set(args.grid))
    params = MidalParams(looks=args.looks, lam=grid[0], inner_iters=args.inner_iters, stop_exponent=args.stop_m)
    best, reports = lambda_sweep(noisy, truth, params, grid)
    report = {
        "selected_lambda": best,
        "reports": [{"lambda": lam, **asdict(rep)} for lam, rep in reports],
    }
    dump_json(report, args.out)
    for lam, rep in reports:
        mark = "*" if lam == best else " "
        print(f"{mark} lambda={lam:<8g} err={rep.err:.5f} mae={rep.mae:.5g} mse={rep.mse:.5g}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    est = _load(args.estimate)
    truth = _load(args.truth)
    if est.shape != truth.shape:
        raise UsageError(f"shape mismatch: estimate {est.shape} vs truth {truth.shape}")
    sys.stdout.write(dump_json(evaluate(est, truth)))
    return EXIT_OK


def cmd_benchmark(args) -> int:
    path = Path(args.config)
    if not path.exists() and args.config in experiments.PRESETS:
        path = experiments.preset_path(args.config)
    configs = experiments.load_configs(path)
    if args.only:
        wanted = {int(v) for v in args.only.split(",")}
        configs = [c for c in configs if c.index in wanted]
    rows = experiments.run_benchmark(configs, args.seeds)
    dump_json({"seeds": args.seeds, "experiments": [r.to_dict() for r in rows]}, args.out)
    print(experiments.format_table(rows))
    return EXIT_OK if not any(r.error for r in rows) else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="midal", description="TV denoising of speckled images by ADMM.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="rescale a clean image and apply M-look speckle")
    p.add_argument("--input", required=True, help="PFM/PGM file or builtin:cameraman")
    p.add_argument("--looks", type=_looks, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--xmin", type=_positive)
    p.add_argument("--xmax", type=_positive)
    p.add_argument("--output", required=True, help="noisy image (.pfm or .pgm)")
    p.add_argument("--clean", help="where to write the rescaled clean image (default: <output>_clean.pfm)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("denoise", help="run the solver on a noisy image")
    p.add_argument("--input", required=True)
    p.add_argument("--looks", type=_looks, required=True)
    p.add_argument("--lambda", dest="lam", type=_positive, required=True)
    p.add_argument("--mu", type=_positive, default=None, help="penalty parameter (default: lambda)")
    p.add_argument("--inner-iters", type=int, default=20)
    p.add_argument("--stop-m", type=int, default=4, help="stop when relative change <= 10^-m")
    p.add_argument("--max-outer", type=int, default=500)
    p.add_argument("--output", required=True)
    p.add_argument("--trace", help="write per-iteration CSV trace here")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("sweep", help="select lambda by lowest MSE against the truth")
    p.add_argument("--noisy", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--looks", type=_looks, required=True)
    p.add_argument("--grid", type=_grid, required=True, help="comma-separated lambda values")
    p.add_argument("--inner-iters", type=int, default=20)
    p.add_argument("--stop-m", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("metrics", help="print Err, MAE and MSE as JSON")
    p.add_argument("--estimate", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("benchmark", help="run experiment presets over several seeds")
    p.add_argument("--config", required=True, help=f"config JSON or a preset name {experiments.PRESETS}")
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--only", help="comma-separated experiment indices to run")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"midal {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, RuntimeError, ArithmeticError) as exc:
        print(f"midal {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
