"""Grid geometry, level-set fields and the differential operators acting on them.

Arrays are indexed ``[y, x]`` (row-major, ``shape == (height, width)``) and
the level set convention is positive inside the contour.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import ndimage
from scipy.spatial import cKDTree

from .exceptions import ContourVanishedError, InvalidParameterError
from .validation import check_field, check_scalar

GRADIENT_FLOOR = 1e-8


@dataclass(frozen=True)
class Grid2D:
    """Regular pixel grid with isotropic spacing."""

    width: int
    height: int
    spacing: float = 1.0

    def __post_init__(self):
        check_scalar(self.width, "width", low=3, integer=True)
        check_scalar(self.height, "height", low=3, integer=True)
        check_scalar(self.spacing, "spacing", low=0.0, strict_low=True)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @classmethod
    def from_shape(cls, shape: tuple[int, int], spacing: float = 1.0) -> "Grid2D":
        return cls(width=int(shape[1]), height=int(shape[0]), spacing=spacing)

    def coordinates(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Physical ``(x, y)`` coordinates of every cell, each of shape ``self.shape``."""
        y, x = np.mgrid[0 : self.height, 0 : self.width].astype(np.float64)
        return x * self.spacing, y * self.spacing


@dataclass
class LevelSetState:
    """A level set function plus its signed-distance bookkeeping.

    ``phi > 0`` marks the interior. ``is_sdf`` is set right after a
    reinitialization and cleared by anything that evolves ``phi``.
    """

    phi: NDArray[np.float64]
    is_sdf: bool = False
    spacing: float = 1.0
    positive_inside: bool = field(default=True, init=False)

    @property
    def grid(self) -> Grid2D:
        return Grid2D.from_shape(self.phi.shape, self.spacing)

    @property
    def mask(self) -> NDArray[np.bool_]:
        return self.phi > 0

    def copy(self) -> "LevelSetState":
        return LevelSetState(self.phi.copy(), self.is_sdf, self.spacing)


def _values(phi) -> NDArray[np.float64]:
    return phi.phi if isinstance(phi, LevelSetState) else np.asarray(phi, dtype=np.float64)


def make_circle_sdf(grid: Grid2D, cx: float, cy: float, r: float) -> LevelSetState:
    """Signed distance ``r - |(x, y) - (cx, cy)|`` of a circle, positive inside."""
    if not r > 0:
        raise InvalidParameterError(f"radius must be positive, got {r!r}")
    x, y = grid.coordinates()
    if not (0 <= cx <= x.max() and 0 <= cy <= y.max()):
        raise InvalidParameterError(f"circle center ({cx}, {cy}) lies outside the grid")
    phi = r - np.hypot(x - cx, y - cy)
    return LevelSetState(phi, is_sdf=True, spacing=grid.spacing)


def mask_to_sdf(mask: ArrayLike, spacing: float = 1.0) -> NDArray[np.float64]:
    """Signed distance of a binary mask, via the zero crossings of ``mask - 0.5``."""
    mask = np.asarray(mask, dtype=bool)
    return reinitialize_sdf(np.where(mask, 0.5, -0.5), spacing=spacing)


# --------------------------------------------------------------------------
# zero level set geometry


def edge_crossings(phi: ArrayLike) -> tuple[NDArray, NDArray]:
    """Linearly interpolated sign-change points on horizontal and vertical edges.

    Returns
    -------
    hx, vy : ndarray
        ``hx[y, x]`` is the x position of the crossing on the edge
        ``(y, x)-(y, x+1)`` and ``vy[y, x]`` the y position on
        ``(y, x)-(y+1, x)``; NaN where the edge has no crossing.
        Positions are in cell units.
    """
    p = _values(phi)
    inside = p > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        a, b = p[:, :-1], p[:, 1:]
        t = a / (a - b)
        hx = np.where(inside[:, :-1] != inside[:, 1:], np.arange(p.shape[1] - 1) + t, np.nan)
        a, b = p[:-1, :], p[1:, :]
        t = a / (a - b)
        vy = np.where(
            inside[:-1, :] != inside[1:, :], np.arange(p.shape[0] - 1)[:, None] + t, np.nan
        )
    return hx, vy


def sample_at_crossings(field: ArrayLike, phi: ArrayLike) -> NDArray[np.float64]:
    """Linear interpolation of ``field`` at the zero crossings of ``phi``.

    Horizontal-edge crossings come first, then vertical ones, each in
    row-major order.
    """
    f = _values(field)
    hx, vy = edge_crossings(phi)
    yy, xx = np.nonzero(~np.isnan(hx))
    t = hx[yy, xx] - xx
    horiz = (1 - t) * f[yy, xx] + t * f[yy, xx + 1]
    yy, xx = np.nonzero(~np.isnan(vy))
    t = vy[yy, xx] - yy
    vert = (1 - t) * f[yy, xx] + t * f[yy + 1, xx]
    return np.concatenate([horiz, vert])


def zero_crossing_points(phi: ArrayLike, spacing: float = 1.0) -> NDArray[np.float64]:
    """All sub-pixel zero crossings as an ``(n, 2)`` array of ``(x, y)``."""
    hx, vy = edge_crossings(phi)
    hy_idx, hx_idx = np.nonzero(~np.isnan(hx))
    vy_idx, vx_idx = np.nonzero(~np.isnan(vy))
    pts = np.concatenate(
        [
            np.column_stack([hx[hy_idx, hx_idx], hy_idx.astype(float)]),
            np.column_stack([vx_idx.astype(float), vy[vy_idx, vx_idx]]),
        ]
    )
    return pts * spacing


def contour_segments(phi: ArrayLike, spacing: float = 1.0) -> tuple[NDArray, NDArray]:
    """Marching-squares polyline of the zero level set.

    Each grid cell with a sign change contributes one segment (two for a
    saddle, disambiguated by the mean of the four corners) joining the
    interpolated edge crossings.

    Returns
    -------
    start, end : ndarray of shape (n, 2)
        Segment end points as ``(x, y)`` in physical units.
    """
    p = _values(phi)
    hx, vy = edge_crossings(p)
    H, W = p.shape
    ys, xs = np.mgrid[0 : H - 1, 0 : W - 1].astype(float)
    # edge order: top, right, bottom, left
    ex = np.stack([hx[:-1, :], xs + 1, hx[1:, :], xs], axis=-1)
    ey = np.stack([ys, vy[:, 1:], ys + 1, vy[:, :-1]], axis=-1)
    has = np.stack(
        [~np.isnan(hx[:-1, :]), ~np.isnan(vy[:, 1:]), ~np.isnan(hx[1:, :]), ~np.isnan(vy[:, :-1])],
        axis=-1,
    )
    count = has.sum(axis=-1)

    starts, ends = [], []
    two = count == 2
    if np.any(two):
        order = np.argsort(~has[two], axis=-1, kind="stable")[:, :2]
        px, py = ex[two], ey[two]
        rows = np.arange(order.shape[0])
        starts.append(np.column_stack([px[rows, order[:, 0]], py[rows, order[:, 0]]]))
        ends.append(np.column_stack([px[rows, order[:, 1]], py[rows, order[:, 1]]]))

    four = count == 4
    if np.any(four):
        cy, cx = np.nonzero(four)
        px, py = ex[four], ey[four]
        tl = p[cy, cx] > 0
        center_in = 0.25 * (p[cy, cx] + p[cy, cx + 1] + p[cy + 1, cx] + p[cy + 1, cx + 1]) > 0
        # corners that differ from the center are cut off by their own segment
        cut_tl = tl != center_in
        rows = np.arange(len(cy))
        # cut_tl: (top, left) + (right, bottom); else (top, right) + (bottom, left)
        pairs = [
            (np.zeros_like(rows), np.where(cut_tl, 3, 1)),
            (np.where(cut_tl, 1, 2), np.where(cut_tl, 2, 3)),
        ]
        for i0, i1 in pairs:
            starts.append(np.column_stack([px[rows, i0], py[rows, i0]]))
            ends.append(np.column_stack([px[rows, i1], py[rows, i1]]))

    if not starts:
        empty = np.empty((0, 2))
        return empty, empty
    return np.concatenate(starts) * spacing, np.concatenate(ends) * spacing


def _segment_distance(q: NDArray, a: NDArray, b: NDArray) -> NDArray:
    """Euclidean distance from points ``q`` to segments ``a-b`` (broadcasting)."""
    ab = b - a
    aq = q - a
    denom = np.einsum("...i,...i->...", ab, ab)
    t = np.einsum("...i,...i->...", aq, ab) / np.where(denom > 0, denom, 1.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[..., None] * ab
    return np.linalg.norm(q - closest, axis=-1)


def distance_to_segments(
    points: NDArray, start: NDArray, end: NDArray, k: int = 8
) -> NDArray[np.float64]:
    """Exact distance from each point to the nearest of a set of segments.

    Candidate segments come from a k-d tree over segment midpoints; points
    whose candidate set cannot be certified are resolved with a ball query
    so the result is exact, not approximate.
    """
    mid = 0.5 * (start + end)
    reach = 0.5 * float(np.linalg.norm(end - start, axis=1).max())
    tree = cKDTree(mid)
    d = np.full(len(points), np.inf)
    todo = np.arange(len(points))
    while len(todo):
        kk = min(k, len(mid))
        mdist, idx = tree.query(points[todo], k=kk)
        if kk == 1:
            mdist, idx = mdist[:, None], idx[:, None]
        d[todo] = _segment_distance(points[todo, None, :], start[idx], end[idx]).min(axis=1)
        if kk == len(mid):
            break
        # a segment of half-length r with midpoint at distance m is >= sqrt(m^2 - r^2) away
        bound = np.sqrt(np.maximum(mdist[:, -1] ** 2 - reach**2, 0.0))
        todo = todo[d[todo] > bound]
        k *= 4
    return d


def reinitialize_sdf(phi: ArrayLike, spacing: float = 1.0) -> NDArray[np.float64]:
    """Project a level set function onto the signed distance of its zero set.

    The zero set is the marching-squares polyline through the linearly
    interpolated edge crossings; every cell gets its exact Euclidean
    distance to that polyline, signed by the input (positive inside).

    Raises
    ------
    ContourVanishedError
        If ``phi`` has no sign change.
    """
    p = check_field(phi, "phi", min_size=2)
    start, end = contour_segments(p, spacing)
    if len(start) == 0:
        raise ContourVanishedError("level set function has no zero crossing")
    H, W = p.shape
    y, x = np.mgrid[0:H, 0:W].astype(np.float64)
    q = np.column_stack([x.ravel(), y.ravel()]) * spacing
    d = distance_to_segments(q, start, end).reshape(H, W)
    return np.where(p > 0, d, -d)


# --------------------------------------------------------------------------
# differential operators


def gradient(phi: ArrayLike, spacing: float = 1.0) -> tuple[NDArray, NDArray]:
    """Central-difference ``(d/dx, d/dy)``; one-sided at the border."""
    gy, gx = np.gradient(_values(phi), spacing)
    return gx, gy


def curvature(phi: ArrayLike, spacing: float = 1.0) -> NDArray[np.float64]:
    """Level set curvature ``-div(grad phi / |grad phi|)``.

    Positive on convex parts of a positive-inside contour: a circle SDF of
    radius ``r`` gives ``1/r`` on its zero set. The gradient magnitude is
    floored at 1e-8, so constant fields give zero.

    Uses the expanded form
    ``-(pxx py^2 - 2 px py pxy + pyy px^2) / |grad phi|^3`` with central
    differences. Ghost cells extrapolate linearly, so planes give zero
    curvature up to the border.
    """
    p = np.pad(_values(phi), 1, mode="reflect", reflect_type="odd")
    c = p[1:-1, 1:-1]
    h = float(spacing)
    px = (p[1:-1, 2:] - p[1:-1, :-2]) / (2 * h)
    py = (p[2:, 1:-1] - p[:-2, 1:-1]) / (2 * h)
    pxx = (p[1:-1, 2:] - 2 * c + p[1:-1, :-2]) / h**2
    pyy = (p[2:, 1:-1] - 2 * c + p[:-2, 1:-1]) / h**2
    pxy = (p[2:, 2:] - p[2:, :-2] - p[:-2, 2:] + p[:-2, :-2]) / (4 * h**2)
    mag = np.maximum(np.hypot(px, py), GRADIENT_FLOOR)
    return -(pxx * py**2 - 2 * px * py * pxy + pyy * px**2) / mag**3


def heaviside_eps(phi: ArrayLike, epsilon: float = 1.0) -> NDArray[np.float64]:
    """Regularized Heaviside ``(1 + (2/pi) arctan(phi/eps)) / 2``."""
    check_scalar(epsilon, "epsilon", low=0.0, strict_low=True)
    return 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(_values(phi) / epsilon))


def dirac_eps(phi: ArrayLike, epsilon: float = 1.0) -> NDArray[np.float64]:
    """Regularized Dirac delta ``eps / (pi (eps^2 + phi^2))``."""
    check_scalar(epsilon, "epsilon", low=0.0, strict_low=True)
    p = _values(phi)
    return (epsilon / np.pi) / (epsilon**2 + p**2)


def gaussian_kernel1d(sigma: float) -> NDArray[np.float64]:
    """Normalized 1-D Gaussian taps on ``[-ceil(3 sigma), ceil(3 sigma)]``."""
    radius = math.ceil(3 * sigma)
    j = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(j**2) / (2 * sigma**2))
    return w / w.sum()


def gaussian_convolve(field: ArrayLike, sigma: float) -> NDArray[np.float64]:
    """Separable Gaussian smoothing with symmetric (half-sample) boundary reflection."""
    check_scalar(sigma, "sigma", low=0.0, strict_low=True)
    f = np.asarray(field, dtype=np.float64)
    w = gaussian_kernel1d(sigma)
    out = ndimage.correlate1d(f, w, axis=0, mode="reflect")
    return ndimage.correlate1d(out, w, axis=1, mode="reflect")


# --------------------------------------------------------------------------
# topology

_FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass
class Components:
    """Connected components of ``{phi > 0}`` and the holes they enclose."""

    count: int
    labels: NDArray[np.int32]
    masks: list[NDArray[np.bool_]]
    boundaries: list[NDArray[np.bool_]]
    holes: int


def zero_level_components(phi: ArrayLike) -> Components:
    """Label the positive region with 4-connectivity and count its holes.

    A hole is a 4-connected component of ``{phi <= 0}`` that does not touch
    the grid border.
    """
    p = _values(phi)
    inside = p > 0
    labels, count = ndimage.label(inside, structure=_FOUR)
    masks = [labels == i for i in range(1, count + 1)]
    boundaries = [m & ~ndimage.binary_erosion(m, structure=_FOUR) for m in masks]

    out_labels, n_out = ndimage.label(~inside, structure=_FOUR)
    border = np.unique(
        np.concatenate([out_labels[0], out_labels[-1], out_labels[:, 0], out_labels[:, -1]])
    )
    holes = n_out - np.count_nonzero(border > 0)
    return Components(count, labels.astype(np.int32), masks, boundaries, int(holes))
