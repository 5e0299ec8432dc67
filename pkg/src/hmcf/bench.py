"""Experiment harnesses: noise-robustness benchmark and curvature-weight sweeps."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, replace
from typing import Iterable, Sequence, TextIO

import numpy as np
from numpy.typing import ArrayLike

from .engine import RunConfig, SegmentationResult, segment
from .exceptions import InvalidParameterError
from .fields import Grid2D
from .metrics import contour_points, dice, modified_hausdorff
from .synthetic import NOISE_KINDS, NoiseSpec, apply_noise, make_synthetic, synthetic_level

CSV_COLUMNS = (
    "experiment",
    "model",
    "noise_kind",
    "noise_strength",
    "b",
    "mu",
    "dice",
    "hausdorff",
    "iterations",
    "converged",
    "runtime_ms",
)

# sub-segment points per marching-squares segment for deviation measurements
CONTOUR_DENSITY = 8


@dataclass(frozen=True)
class BenchRow:
    experiment: str
    model: str
    noise_kind: str
    noise_strength: float
    b: float
    mu: float
    dice: float
    hausdorff: float
    iterations: int
    converged: bool
    runtime_ms: float | None = None
    lam: float = 1.0

    def as_csv(self) -> list[str]:
        def num(v):
            return "" if v is None else repr(float(v))

        return [
            self.experiment,
            self.model,
            self.noise_kind,
            num(self.noise_strength),
            num(self.b),
            num(self.mu),
            num(self.dice),
            num(self.hausdorff),
            str(self.iterations),
            "true" if self.converged else "false",
            "" if self.runtime_ms is None else f"{self.runtime_ms:.1f}",
        ]


def write_csv(rows: Iterable[BenchRow], out: str | TextIO) -> None:
    """Write rows under the fixed column header. ``runtime_ms`` is blank unless timed."""
    if isinstance(out, str):
        with open(out, "w", newline="") as fh:
            write_csv(rows, fh)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.as_csv())


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def deviation(result_phi: ArrayLike, truth_points: ArrayLike) -> float:
    """Modified Hausdorff distance from the final zero set to the truth; ``inf`` if the contour is gone."""
    pts = contour_points(result_phi, density=CONTOUR_DENSITY)
    if len(pts) == 0:
        return math.inf
    return modified_hausdorff(pts, truth_points)


def _timed(image, config: RunConfig) -> tuple[SegmentationResult, float]:
    t0 = time.perf_counter()
    res = segment(image, config)
    return res, 1000.0 * (time.perf_counter() - t0)


def noise_grid(config: RunConfig) -> list[RunConfig]:
    """Every (model, parameter) combination of the benchmark tuning grid."""
    bp = config.bench
    c = bp.size / 2
    init = config.init if config.init is not None else (c, c, 0.3 * bp.size)
    out = []
    for b in bp.hmcf_b:
        for lam in bp.hmcf_lambda:
            out.append(
                replace(
                    config,
                    model="hmcf-cv",
                    init=init,
                    wave=replace(config.wave, b=b),
                    modelp=replace(config.modelp, lam=lam, mu=0.0),
                )
            )
    for mu in bp.pmcf_mu:
        for lam in bp.pmcf_lambda:
            out.append(
                replace(config, model="pmcf-cv-baseline", init=init, modelp=replace(config.modelp, lam=lam, mu=mu))
            )
    return out


def run_noise_benchmark(
    config: RunConfig | None = None, kinds: Sequence[str] = NOISE_KINDS, timing: bool = False
) -> list[BenchRow]:
    """Segment a noisy synthetic disk with both models over their tuning grids.

    One row per (noise kind, model, parameter set); use :func:`best_by_kind`
    to pick each model's tuned result. Noise is seeded from ``config.seed``
    so the table is a pure function of the configuration.
    """
    config = config or RunConfig()
    bp = config.bench
    grid = Grid2D(bp.size, bp.size)
    clean, truth_mask = make_synthetic("disk", grid)
    truth = contour_points(synthetic_level("disk", grid), density=CONTOUR_DENSITY)
    rows = []
    for kind in kinds:
        strength = bp.strength(kind)
        noisy = apply_noise(clean, NoiseSpec(kind, strength, config.seed))
        for cfg in noise_grid(config):
            res, ms = _timed(noisy, cfg)
            is_h = cfg.model != "pmcf-cv-baseline"
            rows.append(
                BenchRow(
                    experiment="noise",
                    model=cfg.model,
                    noise_kind=kind,
                    noise_strength=strength,
                    b=float(cfg.wave.b) if is_h else math.nan,
                    mu=cfg.modelp.mu if not is_h else math.nan,
                    dice=dice(res.mask, truth_mask),
                    hausdorff=deviation(res.final_phi.phi, truth),
                    iterations=res.iterations,
                    converged=res.converged,
                    runtime_ms=ms if timing else None,
                    lam=cfg.modelp.lam,
                )
            )
    return rows


def best_by_kind(rows: Iterable[BenchRow]) -> dict[tuple[str, str], BenchRow]:
    """Highest-Dice row per ``(noise_kind, model)``; ties keep the earliest row."""
    best: dict[tuple[str, str], BenchRow] = {}
    for r in rows:
        key = (r.noise_kind, r.model)
        if key not in best or r.dice > best[key].dice:
            best[key] = r
    return best


def _truth_points(truth) -> np.ndarray:
    if truth is None:
        raise InvalidParameterError("a ground-truth boundary is required to measure deviation")
    t = np.asarray(truth)
    if t.ndim == 2 and t.shape[1] == 2 and t.dtype != bool:
        return t.astype(np.float64)
    if t.dtype == bool:
        t = t.astype(np.float64) - 0.5
    pts = contour_points(t, density=CONTOUR_DENSITY)
    if len(pts) == 0:
        raise InvalidParameterError("ground truth has no boundary")
    return pts


def run_b_sweep(
    image: ArrayLike,
    values: Sequence[float],
    config: RunConfig,
    truth,
    parameter: str | None = None,
    timing: bool = False,
) -> list[BenchRow]:
    """One segmentation per value, reporting the deviation from the truth boundary.

    ``parameter`` is ``"b"`` or ``"mu"``; by default ``mu`` for the parabolic
    baseline and ``b`` otherwise. ``truth`` is an ``(n, 2)`` point set, a
    boolean mask, or a level function whose zero set is the boundary. A
    vanished contour gets deviation ``inf``.
    """
    values = [float(v) for v in values]
    if not values:
        raise InvalidParameterError("value list is empty")
    if any(b < a for a, b in zip(values, values[1:])):
        raise InvalidParameterError("value list must be sorted ascending")
    if parameter is None:
        parameter = "mu" if config.model == "pmcf-cv-baseline" else "b"
    if parameter not in ("b", "mu"):
        raise InvalidParameterError(f"parameter must be 'b' or 'mu', got {parameter!r}")
    pts = _truth_points(truth)
    rows = []
    for v in values:
        if parameter == "b":
            cfg = replace(config, wave=replace(config.wave, b=v))
        else:
            cfg = replace(config, modelp=replace(config.modelp, mu=v))
        res, ms = _timed(image, cfg)
        rows.append(
            BenchRow(
                experiment=f"sweep-{parameter}",
                model=cfg.model,
                noise_kind="none",
                noise_strength=0.0,
                b=float(cfg.wave.b) if np.ndim(cfg.wave.b) == 0 else math.nan,
                mu=cfg.modelp.mu,
                dice=math.nan,
                hausdorff=deviation(res.final_phi.phi, pts),
                iterations=res.iterations,
                converged=res.converged,
                runtime_ms=ms if timing else None,
                lam=cfg.modelp.lam,
            )
        )
    return rows


def increments(devs: Sequence[float]) -> np.ndarray:
    return np.diff(np.asarray(devs, dtype=np.float64))


def is_smooth_growth(devs: Sequence[float], factor: float = 3.0) -> bool:
    """Deviations non-decreasing and no step larger than ``factor`` times the median step."""
    inc = increments(devs)
    if not np.all(np.isfinite(inc)):
        return False
    return bool(np.all(inc >= 0) and np.all(inc <= factor * np.median(inc)))


def has_jump(devs: Sequence[float], factor: float = 3.0) -> bool:
    """Some step exceeds ``factor`` times the median step (an infinite step counts)."""
    inc = increments(devs)
    finite = inc[np.isfinite(inc)]
    if len(finite) == 0:
        return False
    med = np.median(finite)
    return bool(np.any(np.isinf(inc)) or np.any(inc > factor * med))


__all__ = [
    "CSV_COLUMNS",
    "BenchRow",
    "best_by_kind",
    "deviation",
    "has_jump",
    "is_smooth_growth",
    "noise_grid",
    "rows_to_csv",
    "run_b_sweep",
    "run_noise_benchmark",
    "write_csv",
]
