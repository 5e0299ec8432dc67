"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 unreadable input
data, 3 numerical failure (contour vanished without converging).
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from typing import Sequence

from . import __version__
from .bench import rows_to_csv, run_b_sweep, run_noise_benchmark
from .config import parse_config
from .engine import RunConfig, SegmentationResult, curvature_flow, run
from .exceptions import ConfigError, ContourVanishedError, FormatError, HMCFError, InvalidParameterError
from .fields import Grid2D, mask_to_sdf, reinitialize_sdf
from .io import load_field, load_image, save_field, save_overlay
from .synthetic import make_synthetic
from .wave import WaveParams

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hmcf", description="Hyperbolic mean curvature flow active contours.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("segment", help="segment one image")
    s.add_argument("image")
    s.add_argument("--config", required=True)
    s.add_argument("--out-prefix", required=True)
    s.add_argument("--seed", type=int)

    s = sub.add_parser("bench-noise", help="noise-robustness benchmark on a synthetic disk")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--timing", action="store_true", help="fill the runtime_ms column (not reproducible)")

    s = sub.add_parser("sweep-b", help="deviation from ground truth over a list of b (or mu) values")
    s.add_argument("image")
    s.add_argument("--config", required=True)
    s.add_argument("--b-list", required=True, type=_float_list)
    s.add_argument("--truth", help="ground-truth mask image (required)")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--timing", action="store_true")

    s = sub.add_parser("demo", help="pure curvature evolution of a spiral or star")
    s.add_argument("shape", choices=("spiral", "star"))
    s.add_argument("--b", type=float, required=True)
    s.add_argument("--out-prefix", required=True)
    s.add_argument("--tau", type=float, default=1.0)
    s.add_argument("--iters", type=int, default=200)
    s.add_argument("--every", type=int, default=20)
    s.add_argument("--size", type=int, default=100)

    s = sub.add_parser("reinit", help="replace a field by the signed distance of its zero set")
    s.add_argument("field")
    s.add_argument("--out", required=True)
    return p


def _load_config(path: str, seed: int | None) -> RunConfig:
    try:
        cfg = parse_config(path)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    return cfg if seed is None else replace(cfg, seed=seed)


def _load_image(path: str):
    try:
        return load_image(path)
    except OSError as exc:
        raise FormatError(f"cannot read image {path}: {exc.strerror or exc}") from None


HISTORY_COLUMNS = ("iteration", "changed_fraction", "components", "max_v0", "shift", "c")


def write_history(history: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_COLUMNS)
        for h in history:
            c = "" if h["c"] is None else ";".join(repr(v) for v in h["c"])
            w.writerow(
                [h["iteration"], repr(h["changed_fraction"]), h["components"], repr(h["max_v0"]), repr(h["shift"]), c]
            )


def _cmd_segment(args) -> int:
    cfg = _load_config(args.config, args.seed)
    image = _load_image(args.image)
    out = run(image, cfg)
    prefix = args.out_prefix
    results: tuple[SegmentationResult, ...] = out if isinstance(out, tuple) else (out,)
    if len(results) == 1:
        save_field(results[0].final_phi, f"{prefix}_phi.txt")
        save_overlay(image, results[0].final_phi, f"{prefix}_overlay.ppm")
    else:
        for i, r in enumerate(results, start=1):
            save_field(r.final_phi, f"{prefix}_phi{i}.txt")
        save_overlay(image, [r.final_phi for r in results], f"{prefix}_overlay.ppm")
    write_history(results[0].history, f"{prefix}_history.csv")
    r = results[0]
    print(
        f"iterations={r.iterations} converged={str(r.converged).lower()} vanished={str(r.vanished).lower()}"
    )
    if r.vanished and not r.converged and not cfg.allow_vanish:
        print("error: contour vanished before convergence", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = _load_config(args.config, args.seed)
    rows = run_noise_benchmark(cfg, timing=args.timing)
    with open(args.out, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if not args.truth:
        raise UsageError("sweep-b needs --truth: deviation is only defined against a ground-truth boundary")
    cfg = _load_config(args.config, args.seed)
    image = _load_image(args.image)
    truth = _load_image(args.truth) > 0.5
    rows = run_b_sweep(image, args.b_list, cfg, truth, timing=args.timing)
    with open(args.out, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))
    return EXIT_OK


def _cmd_demo(args) -> int:
    grid = Grid2D(args.size, args.size)
    image, mask = make_synthetic(args.shape, grid)
    wave = WaveParams(b=args.b, tau=args.tau)
    snaps = curvature_flow(mask_to_sdf(mask), wave, args.iters, every=args.every)
    for i, phi in enumerate(snaps):
        save_overlay(image, phi, f"{args.out_prefix}_{i:03d}.ppm")
    save_field(snaps[-1], f"{args.out_prefix}_final.txt")
    print(f"snapshots={len(snaps)}")
    return EXIT_OK


def _cmd_reinit(args) -> int:
    try:
        phi = load_field(args.field)
    except OSError as exc:
        raise FormatError(f"cannot read field {args.field}: {exc.strerror or exc}") from None
    save_field(reinitialize_sdf(phi), args.out)
    return EXIT_OK


COMMANDS = {
    "segment": _cmd_segment,
    "bench-noise": _cmd_bench,
    "sweep-b": _cmd_sweep,
    "demo": _cmd_demo,
    "reinit": _cmd_reinit,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"{parser.format_usage()}error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ContourVanishedError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except InvalidParameterError as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HMCFError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
