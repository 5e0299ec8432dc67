"""Analytic test images and seeded noise models."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .exceptions import InvalidParameterError
from .fields import Grid2D, gaussian_convolve
from .validation import check_scalar

NOISE_KINDS = ("gaussian", "salt_pepper", "speckle", "periodic")
SYNTHETIC_KINDS = ("disk", "multishape", "four-quadrant", "spiral", "star", "vessel")

PERIODIC_FREQUENCY = 0.15
BLUR_SIGMA = 2.0
MIN_SIZE = 64


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "gaussian"
    strength: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise InvalidParameterError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        check_scalar(self.strength, "strength", low=0.0)
        check_scalar(self.seed, "seed", integer=True)


def apply_noise(image, spec: NoiseSpec) -> NDArray[np.float64]:
    """Return a noisy copy of ``image`` clamped to ``[0, 1]``.

    ``salt_pepper`` sets exactly ``round(strength * N)`` distinct pixels,
    half to 0 and the rest to 1. ``periodic`` adds
    ``strength * sin(2 pi f (x + y))`` with ``f = 0.15`` cycles per pixel.
    """
    img = np.asarray(image, dtype=np.float64)
    if spec.strength == 0:
        return img.copy()
    rng = np.random.default_rng(spec.seed)
    s = spec.strength
    if spec.kind == "gaussian":
        out = img + rng.normal(0.0, s, img.shape)
    elif spec.kind == "speckle":
        out = img * (1.0 + rng.normal(0.0, s, img.shape))
    elif spec.kind == "periodic":
        y, x = np.indices(img.shape)
        f = PERIODIC_FREQUENCY
        out = img + s * np.sin(2 * np.pi * f * x + 2 * np.pi * f * y)
    else:
        if s > 1:
            raise InvalidParameterError(f"salt_pepper density must be <= 1, got {s}")
        n = int(round(s * img.size))
        idx = rng.choice(img.size, size=n, replace=False)
        out = img.copy().ravel()
        out[idx[: n // 2]] = 0.0
        out[idx[n // 2 :]] = 1.0
        out = out.reshape(img.shape)
    return np.clip(out, 0.0, 1.0)


# --------------------------------------------------------------------------
# shapes


def _center(grid: Grid2D) -> tuple[float, float]:
    return float(grid.width // 2), float(grid.height // 2)


def star_radius(theta, scale: float):
    """``r(theta) = R1 + R2 cos(5 theta)``."""
    r1 = 0.28 * scale
    return r1 + 0.4 * r1 * np.cos(5 * theta)


def synthetic_level(kind: str, grid: Grid2D) -> NDArray[np.float64]:
    """Analytic function whose zero set is the true boundary, positive inside.

    Available for ``disk`` and ``star`` (and their blurred variants).
    """
    cx, cy = _center(grid)
    y, x = np.indices(grid.shape, dtype=np.float64)
    dx, dy = x - cx, y - cy
    rho = np.hypot(dx, dy)
    scale = min(grid.width, grid.height)
    if kind == "disk":
        return 0.2 * scale - rho
    if kind == "star":
        return star_radius(np.arctan2(dy, dx), scale) - rho
    raise InvalidParameterError(f"no analytic boundary for {kind!r}")


def multishape_centers(grid: Grid2D):
    """Blob centers, blob radius, hole radius and the ring radius they sit on."""
    cx, cy = _center(grid)
    scale = min(grid.width, grid.height)
    ring = 0.3 * scale
    angles = np.deg2rad([0.0, 120.0, 240.0])
    centers = [(cx + ring * np.cos(a), cy + ring * np.sin(a)) for a in angles]
    return centers, 0.12 * scale, 0.05 * scale, ring


def _spiral_mask(grid: Grid2D) -> NDArray[np.bool_]:
    cx, cy = _center(grid)
    y, x = np.indices(grid.shape, dtype=np.float64)
    dx, dy = x - cx, y - cy
    rho = np.hypot(dx, dy)
    theta = np.arctan2(dy, dx) % (2 * np.pi)
    scale = min(grid.width, grid.height)
    pitch = 0.12 * scale  # radial gap per turn
    half_width = 0.03 * scale
    r0 = 0.06 * scale
    turns = 2.5
    mask = np.zeros(grid.shape, dtype=bool)
    for n in range(int(np.ceil(turns)) + 1):
        arm_theta = theta + 2 * np.pi * n
        r_arm = r0 + pitch * arm_theta / (2 * np.pi)
        on_arm = (np.abs(rho - r_arm) <= half_width) & (arm_theta <= 2 * np.pi * turns)
        mask |= on_arm
    return mask | (rho <= r0 + half_width)


def _vessel_mask(grid: Grid2D) -> NDArray[np.bool_]:
    y, x = np.indices(grid.shape, dtype=np.float64)
    w, h = grid.width, grid.height
    # main trunk: a sinusoidal tube across the image, tapering left to right
    centre = 0.5 * h + 0.18 * h * np.sin(2 * np.pi * x / w)
    radius = 0.07 * h * (1.0 - 0.4 * x / w)
    trunk = np.abs(y - centre) <= radius
    # one branch leaving the trunk upward
    bx0, by0 = 0.35 * w, 0.5 * h + 0.18 * h * np.sin(2 * np.pi * 0.35)
    bx1, by1 = 0.75 * w, 0.12 * h
    t = np.clip(((x - bx0) * (bx1 - bx0) + (y - by0) * (by1 - by0)) / ((bx1 - bx0) ** 2 + (by1 - by0) ** 2), 0, 1)
    dist = np.hypot(x - (bx0 + t * (bx1 - bx0)), y - (by0 + t * (by1 - by0)))
    branch = dist <= 0.035 * h
    return trunk | branch


def make_synthetic(kind: str, grid: Grid2D, blur: bool = False):
    """Deterministic test image and its ground truth.

    Returns ``(image, mask)``. For ``four-quadrant`` the truth is an integer
    label array (0..3, quadrant order TL, TR, BL, BR) and the image holds
    the values ``0, 1/3, 2/3, 1``. ``vessel`` is always blurred; any kind
    can be blurred with ``blur=True`` (Gaussian, sigma 2).
    """
    if kind not in SYNTHETIC_KINDS:
        raise InvalidParameterError(f"unknown synthetic kind {kind!r}; expected one of {SYNTHETIC_KINDS}")
    if min(grid.width, grid.height) < MIN_SIZE:
        raise InvalidParameterError(f"synthetic images need at least {MIN_SIZE}x{MIN_SIZE} cells")
    if kind == "four-quadrant":
        y, x = np.indices(grid.shape)
        labels = 2 * (y >= grid.height // 2) + (x >= grid.width // 2)
        image = labels / 3.0
        if blur:
            image = gaussian_convolve(image, BLUR_SIGMA)
        return image, labels.astype(np.int8)

    if kind in ("disk", "star"):
        mask = synthetic_level(kind, grid) > 0
    elif kind == "multishape":
        y, x = np.indices(grid.shape, dtype=np.float64)
        centers, r_blob, r_hole, _ = multishape_centers(grid)
        mask = np.zeros(grid.shape, dtype=bool)
        for i, (bx, by) in enumerate(centers):
            d = np.hypot(x - bx, y - by)
            blob = d < r_blob
            if i == 0:
                blob &= d >= r_hole
            mask |= blob
    elif kind == "spiral":
        mask = _spiral_mask(grid)
    else:
        mask = _vessel_mask(grid)
        blur = True
    image = mask.astype(np.float64)
    if blur:
        image = gaussian_convolve(image, BLUR_SIGMA)
    return image, mask
