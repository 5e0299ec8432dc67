"""Initial velocity fields for the hyperbolic models and the edge-modulated coefficient.

Every function here maps the current level set (and image statistics) to
the normal speed ``v0`` that seeds one outer wave interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import DegenerateRegionError
from .fields import (
    _values,
    curvature,
    dirac_eps,
    gaussian_convolve,
    gradient,
    heaviside_eps,
)
from .validation import check_scalar
from .wave import nine_point_laplacian

DEGENERATE_WEIGHT = 1e-12


@dataclass
class ModelParams:
    """Model weights for the velocity fields.

    ``window`` of ``None`` means ``ceil(6 * sigma)`` rounded up to odd.
    """

    lam: float = 1.0
    mu: float = 0.0
    gamma: float = 0.0
    u: float = 0.0
    sigma: float = 3.0
    n_threshold: float = 0.5
    window: int | None = None
    sigma_g: float = 1.5
    edge_amplitude: float = 100.0
    edge_exponent: float = 2.0

    def __post_init__(self):
        check_scalar(self.lam, "lambda", low=0.0, strict_low=True)
        check_scalar(self.mu, "mu", low=0.0)
        check_scalar(self.gamma, "gamma", low=0.0)
        check_scalar(self.u, "u", low=0.0)
        check_scalar(self.sigma, "sigma", low=0.0, strict_low=True)
        check_scalar(self.n_threshold, "n_threshold", low=0.0, strict_low=True, high=1.0)
        check_scalar(self.sigma_g, "sigma_g", low=0.0, strict_low=True)
        check_scalar(self.edge_amplitude, "edge_amplitude", low=0.0, strict_low=True)
        check_scalar(self.edge_exponent, "edge_exponent", low=0.0, strict_low=True)
        if self.window is not None:
            check_scalar(self.window, "window", low=3, integer=True)

    @property
    def lpf_window(self) -> int:
        if self.window is not None:
            return int(self.window)
        w = math.ceil(6 * self.sigma)
        return w if w % 2 else w + 1


# --------------------------------------------------------------------------
# edge stopping and the dual-mode coefficient


def edge_stopping_g(
    image: ArrayLike,
    sigma_g: float = 1.5,
    amplitude: float = 100.0,
    exponent: float = 2.0,
) -> NDArray[np.float64]:
    """``g = 1 / (1 + A (s / s_max)^p)`` with ``s = |grad (G_sigma * I)|``, scaled to max 1.

    A constant image has no gradient and gives ``g == 1``.
    """
    img = np.asarray(image, dtype=np.float64)
    gx, gy = gradient(gaussian_convolve(img, sigma_g))
    s = np.hypot(gx, gy)
    s_max = s.max()
    if s_max <= 0:
        return np.ones_like(img)
    g = 1.0 / (1.0 + amplitude * (s / s_max) ** exponent)
    return g / g.max()


def heaviside_alpha(g: ArrayLike, n: float = 0.5, alpha: float = 0.2) -> NDArray[np.float64]:
    """Smoothed threshold ``(1 + (2/pi) arctan((g - n) / alpha)) / 2``."""
    check_scalar(alpha, "alpha", low=0.0, strict_low=True)
    return 0.5 * (1.0 + (2.0 / np.pi) * np.arctan((np.asarray(g, dtype=np.float64) - n) / alpha))


def dual_mode_coefficient(
    b: float, g: ArrayLike, n: float = 0.5, alpha: float = 0.2
) -> NDArray[np.float64]:
    """Per-cell curvature coefficient ``b * H_alpha(g)``: near ``b`` in flat regions, small at edges."""
    check_scalar(b, "b", low=0.0, strict_low=True)
    return b * heaviside_alpha(g, n, alpha)


# --------------------------------------------------------------------------
# geodesic active contour


def gac_velocity(phi, g: ArrayLike, u: float = 0.0, spacing: float = 1.0) -> NDArray[np.float64]:
    """Balloon force plus edge attraction: ``g u + <grad g, grad phi>``."""
    check_scalar(u, "u", low=0.0)
    g = np.asarray(g, dtype=np.float64)
    gx, gy = gradient(g, spacing)
    px, py = gradient(phi, spacing)
    return g * u + gx * px + gy * py


# --------------------------------------------------------------------------
# Chan-Vese, two-phase and four-phase


def region_means(
    image: ArrayLike, weights: list[NDArray]
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Weighted means of ``image`` for each weight field.

    Returns the means and a flag per region whose weight sum is at most
    1e-12; flagged regions get the global image mean.
    """
    img = np.asarray(image, dtype=np.float64)
    sums = np.array([w.sum() for w in weights])
    degenerate = sums <= DEGENERATE_WEIGHT
    means = np.array(
        [img.mean() if d else float((img * w).sum() / s) for w, s, d in zip(weights, sums, degenerate)]
    )
    return means, degenerate


def _raise_degenerate(degenerate, names):
    if np.any(degenerate):
        bad = ", ".join(n for n, d in zip(names, degenerate) if d)
        raise DegenerateRegionError(f"region weight vanished for {bad}")


def cv_means(image: ArrayLike, phi, epsilon: float = 1.0) -> tuple[float, float]:
    """Interior and exterior means ``(c1, c2)`` weighted by ``H_eps(phi)``.

    Raises
    ------
    DegenerateRegionError
        If either region's weight sum is at most 1e-12. Use
        :func:`region_means` to get the global-mean fallback instead.
    """
    h = heaviside_eps(phi, epsilon)
    c, degenerate = region_means(image, [h, 1.0 - h])
    _raise_degenerate(degenerate, ("c1", "c2"))
    return float(c[0]), float(c[1])


def cv_velocity(
    image: ArrayLike, phi, c1: float, c2: float, lam: float = 1.0, epsilon: float = 1.0
) -> NDArray[np.float64]:
    """``delta_eps(phi) lam [(I - c2)^2 - (I - c1)^2]``; positive where a pixel fits the interior."""
    img = np.asarray(image, dtype=np.float64)
    return dirac_eps(phi, epsilon) * lam * ((img - c2) ** 2 - (img - c1) ** 2)


def multiphase_weights(phi1, phi2, epsilon: float = 1.0) -> list[NDArray]:
    h1, h2 = heaviside_eps(phi1, epsilon), heaviside_eps(phi2, epsilon)
    return [h1 * h2, h1 * (1 - h2), (1 - h1) * h2, (1 - h1) * (1 - h2)]


def multiphase_means(image: ArrayLike, phi1, phi2, epsilon: float = 1.0) -> tuple[float, ...]:
    """Means ``c1..c4`` of the four regions ``(+,+), (+,-), (-,+), (-,-)`` of ``(phi1, phi2)``.

    Raises
    ------
    DegenerateRegionError
        If any region's weight sum is at most 1e-12.
    """
    c, degenerate = region_means(image, multiphase_weights(phi1, phi2, epsilon))
    _raise_degenerate(degenerate, ("c1", "c2", "c3", "c4"))
    return tuple(float(v) for v in c)


def multiphase_velocities(
    image: ArrayLike, phi1, phi2, c, lam: float = 1.0, epsilon: float = 1.0
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Coupled four-phase velocities for ``phi1`` and ``phi2``.

    ``v1 = delta(phi1) lam {[(I-c3)^2 - (I-c1)^2] H(phi2) + [(I-c4)^2 - (I-c2)^2] (1 - H(phi2))}``
    and ``v2`` with the roles of ``phi1`` and ``phi2`` exchanged.
    """
    img = np.asarray(image, dtype=np.float64)
    c1, c2, c3, c4 = c
    e1, e2, e3, e4 = ((img - ci) ** 2 for ci in (c1, c2, c3, c4))
    h1, h2 = heaviside_eps(phi1, epsilon), heaviside_eps(phi2, epsilon)
    v1 = dirac_eps(phi1, epsilon) * lam * ((e3 - e1) * h2 + (e4 - e2) * (1 - h2))
    v2 = dirac_eps(phi2, epsilon) * lam * ((e2 - e1) * h1 + (e4 - e3) * (1 - h1))
    return v1, v2


# --------------------------------------------------------------------------
# local pre-fitting


@dataclass
class PrefitFunctions:
    """Local low/high intensity fits and, once computed, their fitting energies."""

    f_s: NDArray[np.float64]
    f_l: NDArray[np.float64]
    e_s: NDArray[np.float64] | None = None
    e_l: NDArray[np.float64] | None = None


def lpf_prefit(image: ArrayLike, sigma: float = 3.0, window: int | None = None) -> PrefitFunctions:
    """Split each pixel's square window at its mean and average each side.

    ``f_s`` averages window values ``<=`` the local mean, ``f_l`` those
    above it (``f_l = f_s`` for a constant window). Borders are mirrored.
    """
    check_scalar(sigma, "sigma", low=0.0, strict_low=True)
    if window is None:
        window = ModelParams(sigma=sigma).lpf_window
    check_scalar(window, "window", low=3, integer=True)
    if window % 2 == 0:
        raise ValueError(f"window must be odd, got {window}")
    img = np.asarray(image, dtype=np.float64)
    r = window // 2
    H, W = img.shape
    p = np.pad(img, r, mode="reflect")
    shifts = [p[dy : dy + H, dx : dx + W] for dy in range(window) for dx in range(window)]
    m = sum(shifts) / len(shifts)
    lo_sum = np.zeros_like(img)
    lo_cnt = np.zeros_like(img)
    hi_sum = np.zeros_like(img)
    hi_cnt = np.zeros_like(img)
    for v in shifts:
        le = v <= m
        lo_sum += np.where(le, v, 0.0)
        lo_cnt += le
        hi_sum += np.where(le, 0.0, v)
        hi_cnt += ~le
    lo = lo_sum / np.maximum(lo_cnt, 1)
    hi = hi_sum / np.maximum(hi_cnt, 1)
    # a flat window can put every sample on one side once the mean is rounded
    f_s = np.where(lo_cnt > 0, lo, hi)
    f_l = np.where(hi_cnt > 0, hi, lo)
    return PrefitFunctions(f_s, f_l)


def lpf_energies(
    image: ArrayLike, prefit: PrefitFunctions, sigma: float = 3.0
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """``e(x) = sum_y K(y - x) (I(x) - f(y))^2`` for ``f_s`` and ``f_l``.

    Expanded into three Gaussian convolutions per energy. Also stores the
    results on ``prefit``.
    """
    img = np.asarray(image, dtype=np.float64)
    k1 = gaussian_convolve(np.ones_like(img), sigma)

    def energy(f):
        e = img**2 * k1 - 2 * img * gaussian_convolve(f, sigma) + gaussian_convolve(f**2, sigma)
        return np.maximum(e, 0.0)

    prefit.e_s = energy(prefit.f_s)
    prefit.e_l = energy(prefit.f_l)
    return prefit.e_s, prefit.e_l


def lpf_velocity(phi, e_s: ArrayLike, e_l: ArrayLike, epsilon: float = 1.0) -> NDArray[np.float64]:
    """``delta_eps(phi) (e_l - e_s)``."""
    return dirac_eps(phi, epsilon) * (np.asarray(e_l) - np.asarray(e_s))


# --------------------------------------------------------------------------
# distance regularization


def distance_regularization(phi, gamma: float, spacing: float = 1.0) -> NDArray[np.float64]:
    """``gamma (lap phi - div(grad phi / |grad phi|))``; vanishes on a signed distance function."""
    check_scalar(gamma, "gamma", low=0.0)
    p = _values(phi)
    if gamma == 0:
        return np.zeros_like(p)
    return gamma * (nine_point_laplacian(p, 1.0, spacing) + curvature(p, spacing))

