"""Outer iteration loop: velocity field, wave interval, reinitialization, convergence.

The hyperbolic models restart every interval from a fresh ``(v0, d)`` pair:
``phi(0)`` is the signed distance of the previous zero set and
``dphi/dt(0)`` the model velocity computed from it.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import InvalidParameterError
from .fields import (
    Grid2D,
    LevelSetState,
    curvature,
    dirac_eps,
    heaviside_eps,
    make_circle_sdf,
    mask_to_sdf,
    reinitialize_sdf,
    zero_level_components,
)
from .metrics import contour_distance
from .validation import check_image, check_scalar, check_same_shape
from .velocity import (
    ModelParams,
    cv_velocity,
    distance_regularization,
    dual_mode_coefficient,
    edge_stopping_g,
    gac_velocity,
    lpf_energies,
    lpf_prefit,
    lpf_velocity,
    multiphase_velocities,
    multiphase_weights,
    region_means,
)
from .wave import WaveParams, evolve_wave

logger = logging.getLogger(__name__)

MODELS = (
    "hmcf-gac",
    "hmcf-cv",
    "hdrf-cv",
    "hmcf-multiphase-cv",
    "hmcf-lpf",
    "pmcf-cv-baseline",
)

# explicit parabolic baseline: tau_p * (mu + gamma) <= PMCF_LIMIT * h^2
PMCF_LIMIT = 0.25


@dataclass
class RegularizationParams:
    """Widths of the regularized Heaviside functions ``H_eps`` and ``H_alpha``."""

    epsilon: float = 1.0
    alpha: float = 0.2

    def __post_init__(self):
        check_scalar(self.epsilon, "epsilon", low=0.0, strict_low=True)
        check_scalar(self.alpha, "alpha", low=0.0, strict_low=True)


def _floats(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass
class BenchParams:
    """Noise-benchmark settings: image size, noise strengths and the per-model tuning grids."""

    size: int = 100
    gaussian: float = 0.15
    salt_pepper: float = 0.15
    speckle: float = 0.3
    periodic: float = 0.3
    hmcf_b: tuple[float, ...] = (20.0, 50.0, 100.0, 200.0)
    hmcf_lambda: tuple[float, ...] = (50.0, 200.0)
    pmcf_mu: tuple[float, ...] = (5.0, 50.0, 200.0)
    pmcf_lambda: tuple[float, ...] = (200.0, 800.0, 1600.0, 3200.0)

    def __post_init__(self):
        check_scalar(self.size, "bench.size", low=64, integer=True)
        for name in ("gaussian", "salt_pepper", "speckle", "periodic"):
            check_scalar(getattr(self, name), f"bench.{name}", low=0.0)
        for name in ("hmcf_b", "hmcf_lambda", "pmcf_mu", "pmcf_lambda"):
            values = _floats(getattr(self, name))
            if not values:
                raise InvalidParameterError(f"bench.{name} must not be empty")
            for v in values:
                check_scalar(v, f"bench.{name}", low=0.0)
            setattr(self, name, values)

    def strength(self, kind: str) -> float:
        return float(getattr(self, kind))


@dataclass
class RunConfig:
    """Everything needed to reproduce one segmentation run.

    ``init`` (and ``init2`` for the four-phase model) is either a circle
    ``(cx, cy, r)``, a path to a mask image, or a boolean mask array.
    ``v_max`` of ``None`` clamps velocities to ``10 / tau``.
    """

    model: str = "hmcf-cv"
    wave: WaveParams = field(default_factory=WaveParams)
    modelp: ModelParams = field(default_factory=ModelParams)
    reg: RegularizationParams = field(default_factory=RegularizationParams)
    reinit_every: int = 1
    max_iters: int = 500
    conv_window: int = 5
    conv_threshold: float = 1e-3
    init: tuple | str | NDArray | None = None
    init2: tuple | str | NDArray | None = None
    seed: int = 0
    v_max: float | None = None
    allow_vanish: bool = False
    bench: BenchParams = field(default_factory=lambda: BenchParams())

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidParameterError(f"unknown model {self.model!r}; expected one of {MODELS}")
        check_scalar(self.reinit_every, "reinit_every", low=1, integer=True)
        check_scalar(self.max_iters, "max_iters", low=1, integer=True)
        check_scalar(self.conv_window, "conv_window", low=1, integer=True)
        check_scalar(self.conv_threshold, "conv_threshold", low=0.0)
        check_scalar(self.seed, "seed", integer=True)
        if self.v_max is not None:
            check_scalar(self.v_max, "v_max", low=0.0, strict_low=True)

    @property
    def velocity_limit(self) -> float:
        return self.v_max if self.v_max is not None else 10.0 / self.wave.tau


@dataclass
class SegmentationResult:
    """Final level set and per-iteration diagnostics of one run.

    Each ``history`` record holds ``iteration``, ``changed_fraction`` (cells
    whose sign flipped), ``components``, ``max_v0``, ``shift`` (symmetric
    mean distance between consecutive zero sets, NaN once the contour is
    gone) and ``c`` (region means, or ``None``).
    """

    final_phi: LevelSetState
    iterations: int
    converged: bool
    vanished: bool = False
    history: list[dict] = field(default_factory=list)

    @property
    def mask(self) -> NDArray[np.bool_]:
        return self.final_phi.phi > 0

    def changed_fractions(self) -> list[float]:
        return [h["changed_fraction"] for h in self.history]


def convergence_check(history: Sequence, window: int = 5, threshold: float = 1e-3) -> bool:
    """True when each of the last ``window`` iterations flipped fewer than ``threshold`` of the cells.

    ``history`` holds either floats or records with a ``changed_fraction`` key.
    """
    check_scalar(window, "window", low=1, integer=True)
    if len(history) < window:
        return False
    tail = history[-window:]
    fractions = [h["changed_fraction"] if isinstance(h, dict) else h for h in tail]
    return all(f < threshold for f in fractions)


# --------------------------------------------------------------------------
# initialization


def initial_level_set(init, shape: tuple[int, int]) -> NDArray[np.float64]:
    """Signed distance of the initial contour on a grid of ``shape``."""
    if init is None:
        raise InvalidParameterError("no initial contour given")
    if isinstance(init, str):
        from .io import load_image

        init = load_image(init) > 0.5
    if isinstance(init, np.ndarray) and init.ndim == 2:
        check_same_shape(np.empty(shape), init, names=("image", "init mask"))
        return mask_to_sdf(init)
    cx, cy, r = (float(v) for v in init)
    return make_circle_sdf(Grid2D.from_shape(shape), cx, cy, r).phi


# --------------------------------------------------------------------------
# helpers shared by the loops


def _has_zero_set(phi: NDArray) -> bool:
    inside = phi > 0
    return bool(inside.any() and not inside.all())


def _record(k, old, new, v0, c) -> dict:
    flipped = np.count_nonzero((old > 0) != (new > 0))
    alive = _has_zero_set(new)
    return {
        "iteration": k + 1,
        "changed_fraction": flipped / new.size,
        "components": zero_level_components(new).count if alive else 0,
        "max_v0": float(np.max(np.abs(v0))),
        "shift": contour_distance(old, new) if alive and _has_zero_set(old) else math.nan,
        "c": None if c is None else tuple(float(x) for x in c),
    }


class _VelocityModel:
    """Per-run precomputation and the per-iteration ``v0`` for single-field models."""

    def __init__(self, image: NDArray, config: RunConfig):
        self.image = image
        self.config = config
        mp = config.modelp
        eps = config.reg.epsilon
        self.eps = eps
        self.b_field = None
        if config.model in ("hmcf-gac", "hdrf-cv"):
            self.g = edge_stopping_g(image, mp.sigma_g, mp.edge_amplitude, mp.edge_exponent)
        if config.model == "hdrf-cv":
            self.b_field = dual_mode_coefficient(
                float(config.wave.b), self.g, mp.n_threshold, config.reg.alpha
            )
        if config.model == "hmcf-lpf":
            prefit = lpf_prefit(image, mp.sigma, mp.lpf_window)
            self.e_s, self.e_l = lpf_energies(image, prefit, mp.sigma)

    def wave_params(self) -> WaveParams:
        if self.b_field is None:
            return self.config.wave
        return replace(self.config.wave, b=self.b_field)

    def __call__(self, phi: NDArray):
        cfg = self.config
        mp = cfg.modelp
        c = None
        if cfg.model == "hmcf-gac":
            v0 = gac_velocity(phi, self.g, mp.u)
        elif cfg.model == "hmcf-lpf":
            v0 = mp.lam * lpf_velocity(phi, self.e_s, self.e_l, self.eps)
        else:
            h = heaviside_eps(phi, self.eps)
            c, _ = region_means(self.image, [h, 1.0 - h])
            v0 = cv_velocity(self.image, phi, c[0], c[1], mp.lam, self.eps)
        if mp.gamma > 0:
            v0 = v0 + distance_regularization(phi, mp.gamma)
        return v0, c


def _clamp(v0: NDArray, limit: float) -> NDArray:
    return np.clip(v0, -limit, limit)


# --------------------------------------------------------------------------
# public loops


def segment(image: ArrayLike, config: RunConfig) -> SegmentationResult:
    """Run a single-field hyperbolic model (``hmcf-*`` or ``hdrf-cv``).

    ``pmcf-cv-baseline`` is dispatched to :func:`segment_pmcf_baseline` and
    ``hmcf-multiphase-cv`` must go through :func:`segment_multiphase`.

    Raises
    ------
    StabilityError
        Before the first iteration if the wave substep is unstable.
    """
    img = check_image(image)
    if config.model == "pmcf-cv-baseline":
        return segment_pmcf_baseline(img, config)
    if config.model == "hmcf-multiphase-cv":
        raise InvalidParameterError("use segment_multiphase for the four-phase model")

    model = _VelocityModel(img, config)
    wave = model.wave_params()
    wave.check_stability()
    limit = config.velocity_limit

    phi = initial_level_set(config.init, img.shape)
    history: list[dict] = []
    converged = vanished = False
    for k in range(config.max_iters):
        v0, c = model(phi)
        v0 = _clamp(v0, limit)
        new = evolve_wave(phi, v0, wave).phi
        is_sdf = False
        if not _has_zero_set(new):
            vanished = True
        elif k % config.reinit_every == 0:
            new = reinitialize_sdf(new)
            is_sdf = True
        history.append(_record(k, phi, new, v0, c))
        phi = new
        if vanished:
            logger.info("contour vanished at iteration %d", k + 1)
            break
        if convergence_check(history, config.conv_window, config.conv_threshold):
            converged = True
            break
    return SegmentationResult(
        LevelSetState(phi, is_sdf=is_sdf), len(history), converged, vanished, history
    )


def pmcf_substeps(config: RunConfig, spacing: float = 1.0) -> int:
    """Explicit-Euler substeps per outer interval for the parabolic baseline."""
    mp = config.modelp
    stiff = mp.mu + mp.gamma
    if stiff <= 0:
        return 1
    return max(1, math.ceil(config.wave.tau * stiff / (PMCF_LIMIT * spacing**2) - 1e-12))


def pmcf_rate(image: NDArray, phi: NDArray, c: Sequence[float], config: RunConfig) -> NDArray:
    """Right-hand side of the parabolic Chan-Vese flow with distance regularization."""
    mp = config.modelp
    eps = config.reg.epsilon
    kappa_signed = -curvature(phi)
    data = mp.lam * ((image - c[1]) ** 2 - (image - c[0]) ** 2)
    rate = dirac_eps(phi, eps) * (mp.mu * kappa_signed + data)
    if mp.gamma > 0:
        rate = rate + distance_regularization(phi, mp.gamma)
    return rate


def segment_pmcf_baseline(image: ArrayLike, config: RunConfig) -> SegmentationResult:
    """Parabolic Chan-Vese baseline by explicit Euler descent.

    Every outer interval of length ``tau`` is split into ``L_p`` substeps so
    that ``tau_p (mu + gamma) <= 0.25 h^2``. The region means are refreshed
    once per interval and no reinitialization is done.
    """
    img = check_image(image)
    phi = initial_level_set(config.init, img.shape)
    eps = config.reg.epsilon
    L = pmcf_substeps(config)
    dt = config.wave.tau / L
    history: list[dict] = []
    converged = vanished = False
    for k in range(config.max_iters):
        h = heaviside_eps(phi, eps)
        c, _ = region_means(img, [h, 1.0 - h])
        new = phi.copy()
        max_rate = 0.0
        for _ in range(L):
            rate = pmcf_rate(img, new, c, config)
            max_rate = max(max_rate, float(np.max(np.abs(rate))))
            new = new + dt * rate
        vanished = not _has_zero_set(new)
        history.append(_record(k, phi, new, np.array([max_rate]), c))
        phi = new
        if vanished:
            break
        if convergence_check(history, config.conv_window, config.conv_threshold):
            converged = True
            break
    return SegmentationResult(LevelSetState(phi), len(history), converged, vanished, history)


def segment_multiphase(
    image: ArrayLike, config: RunConfig
) -> tuple[SegmentationResult, SegmentationResult]:
    """Coupled two-field, four-region hyperbolic Chan-Vese.

    Each iteration computes ``c1..c4`` once, evolves both fields with the
    same wave parameters and reinitializes both. The run stops when both
    fields pass the convergence check or either contour vanishes.
    """
    img = check_image(image)
    if config.init2 is None:
        raise InvalidParameterError("the four-phase model needs two initial contours (init, init2)")
    wave = config.wave
    wave.check_stability()
    mp = config.modelp
    eps = config.reg.epsilon
    limit = config.velocity_limit
    phi1 = initial_level_set(config.init, img.shape)
    phi2 = initial_level_set(config.init2, img.shape)
    hist1: list[dict] = []
    hist2: list[dict] = []
    converged = vanished = False
    for k in range(config.max_iters):
        c, degenerate = region_means(img, multiphase_weights(phi1, phi2, eps))
        v1, v2 = multiphase_velocities(img, phi1, phi2, c, mp.lam, eps)
        if mp.gamma > 0:
            v1 = v1 + distance_regularization(phi1, mp.gamma)
            v2 = v2 + distance_regularization(phi2, mp.gamma)
        v1, v2 = _clamp(v1, limit), _clamp(v2, limit)
        new1 = evolve_wave(phi1, v1, wave).phi
        new2 = evolve_wave(phi2, v2, wave).phi
        vanished = not (_has_zero_set(new1) and _has_zero_set(new2))
        if not vanished and k % config.reinit_every == 0:
            new1 = reinitialize_sdf(new1)
            new2 = reinitialize_sdf(new2)
        r1 = _record(k, phi1, new1, v1, c)
        r2 = _record(k, phi2, new2, v2, c)
        r1["degenerate"] = r2["degenerate"] = tuple(bool(d) for d in degenerate)
        hist1.append(r1)
        hist2.append(r2)
        phi1, phi2 = new1, new2
        if vanished:
            break
        if convergence_check(hist1, config.conv_window, config.conv_threshold) and convergence_check(
            hist2, config.conv_window, config.conv_threshold
        ):
            converged = True
            break
    n = len(hist1)
    return (
        SegmentationResult(LevelSetState(phi1), n, converged, vanished, hist1),
        SegmentationResult(LevelSetState(phi2), n, converged, vanished, hist2),
    )


def multiphase_labels(phi1: ArrayLike, phi2: ArrayLike) -> NDArray[np.int8]:
    """Region index 0..3 for ``(+,+), (+,-), (-,+), (-,-)``."""
    p1 = np.asarray(phi1) > 0
    p2 = np.asarray(phi2) > 0
    return (2 * (~p1) + (~p2)).astype(np.int8)


def curvature_flow(
    phi0: ArrayLike, wave: WaveParams, iterations: int, reinit_every: int = 1, every: int = 1
) -> list[NDArray[np.float64]]:
    """Pure curvature evolution (``v0 = 0``); returns the initial field and every ``every``-th iterate.

    Stops early if the contour vanishes.
    """
    check_scalar(iterations, "iterations", low=1, integer=True)
    check_scalar(every, "every", low=1, integer=True)
    wave.check_stability()
    phi = reinitialize_sdf(np.asarray(phi0, dtype=np.float64))
    snapshots = [phi]
    zero = np.zeros_like(phi)
    for k in range(iterations):
        phi = evolve_wave(phi, zero, wave).phi
        if not _has_zero_set(phi):
            snapshots.append(phi)
            break
        if k % reinit_every == 0:
            phi = reinitialize_sdf(phi)
        if (k + 1) % every == 0:
            snapshots.append(phi)
    return snapshots


def run(image: ArrayLike, config: RunConfig):
    """Dispatch on ``config.model``."""
    if config.model == "hmcf-multiphase-cv":
        return segment_multiphase(image, config)
    return segment(image, config)


__all__ = [
    "MODELS",
    "BenchParams",
    "curvature_flow",
    "RegularizationParams",
    "RunConfig",
    "SegmentationResult",
    "convergence_check",
    "initial_level_set",
    "multiphase_labels",
    "pmcf_substeps",
    "run",
    "segment",
    "segment_multiphase",
    "segment_pmcf_baseline",
]
