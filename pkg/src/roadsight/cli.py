"""Command line entry points.

Subcommands: ``run`` (process a frame directory), ``eval`` (score a run
against ground truth), ``synth`` (generate synthetic scenes), ``bench``
(timing report). Exit codes: 0 success, 1 format error, 2 config error.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config, save_config
from .errors import ConfigError, FormatError, RoadsightError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roadsight",
        description="Driver-assistance perception post-processing pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="process a directory of frame bundles")
    run.add_argument("--input", required=True, help="input bundle directory")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--config", default=None, help="config JSON path")
    run.add_argument("--render", action="store_true", help="write annotated frames")

    ev = sub.add_parser("eval", help="score pipeline outputs against ground truth")
    ev.add_argument("--pred", required=True, help="run output directory")
    ev.add_argument("--gt", required=True, help="ground-truth directory")
    ev.add_argument("--report", required=True, help="report JSON path")
    ev.add_argument("--config", default=None)

    sy = sub.add_parser("synth", help="generate synthetic scenes with ground truth")
    sy.add_argument("--scenes", type=int, required=True)
    sy.add_argument("--seed", type=int, required=True)
    sy.add_argument("--out", required=True)
    sy.add_argument(
        "--noise",
        default=None,
        help="sigma_frac,outlier_frac (e.g. 0.05,0.05)",
    )
    sy.add_argument("--config", default=None)

    be = sub.add_parser("bench", help="per-stage timing over a frame directory")
    be.add_argument("--input", required=True)
    be.add_argument("--iters", type=int, default=10)
    be.add_argument("--config", default=None)
    be.add_argument("--report", default=None, help="also write the report as JSON")
    return parser


def _cmd_run(args) -> int:
    from .pipeline import run_directory

    cfg = load_config(args.config, input_dir=args.input)
    summary = run_directory(args.input, args.out, cfg, render=args.render)
    ok = summary["frames"] - summary["failed"]
    print(f"processed {ok}/{summary['frames']} frames -> {args.out}")
    if summary["format_errors"]:
        for err in summary["format_errors"]:
            print(f"format error: {err}", file=sys.stderr)
        return 1
    return 0


def _cmd_eval(args) -> int:
    from .evaluate import evaluate_directories, write_report

    cfg = load_config(args.config, input_dir=args.gt)
    report = evaluate_directories(args.pred, args.gt, cfg)
    write_report(report, args.report)
    dist = report["distance"]
    lane = report["lane_iou"]
    print(f"report -> {args.report}")
    if dist["mean_ra"] is not None:
        print(f"distance: mean RA {dist['mean_ra']:.4f}, accuracy {dist['accuracy']:.2%}")
    if lane["mean"] is not None:
        print(f"lane IoU: mean {lane['mean']:.4f}, valid {lane['valid_fraction']:.2%}")
    return 0


def _cmd_synth(args) -> int:
    from pathlib import Path

    from .synth import generate_dataset

    cfg = load_config(args.config)
    sigma, outlier = 0.0, 0.0
    if args.noise:
        parts = args.noise.split(",")
        if len(parts) != 2:
            raise ConfigError(f"--noise expects sigma,outlier: {args.noise!r}")
        try:
            sigma, outlier = float(parts[0]), float(parts[1])
        except ValueError:
            raise ConfigError(f"--noise values must be numbers: {args.noise!r}") from None
        if not (0.0 <= sigma < 1.0 and 0.0 <= outlier < 1.0):
            raise ConfigError(f"--noise fractions must be in [0, 1): {args.noise!r}")
    if args.scenes < 1:
        raise ConfigError(f"--scenes must be >= 1, got {args.scenes}")
    generate_dataset(args.out, args.scenes, args.seed, sigma, outlier)
    save_config(cfg, Path(args.out) / "config.json")
    print(f"wrote {args.scenes} scenes -> {args.out}")
    return 0


def _cmd_bench(args) -> int:
    from .formats import write_json_doc
    from .pipeline import benchmark

    cfg = load_config(args.config, input_dir=args.input)
    report = benchmark(args.input, args.iters, cfg)
    print(
        f"{report['frames']} frames x {report['iterations']} iterations: "
        f"{report['end_to_end']['mean_ms']:.2f} ms/frame mean, {report['fps']:.1f} FPS"
    )
    for stage, s in report["stages"].items():
        print(
            f"  {stage:<14} mean {s['mean_ms']:7.3f} ms   p50 {s['p50_ms']:7.3f}"
            f"   p95 {s['p95_ms']:7.3f}   ({s['samples']} samples)"
        )
    if args.report:
        write_json_doc(args.report, report)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "eval": _cmd_eval,
        "synth": _cmd_synth,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 1
    except RoadsightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
