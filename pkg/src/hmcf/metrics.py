"""Overlap and contour-distance metrics."""
from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import cKDTree

from .exceptions import InvalidParameterError
from .fields import contour_segments, distance_to_segments, sample_at_crossings
from .validation import check_same_shape


def dice(a: ArrayLike, b: ArrayLike) -> float:
    """Dice coefficient ``2|A & B| / (|A| + |B|)``; 1.0 when both masks are empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    check_same_shape(a, b, names=("a", "b"))
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def _check_points(p, name):
    p = np.asarray(p, dtype=np.float64).reshape(-1, 2)
    if len(p) == 0:
        raise InvalidParameterError(f"point set {name} is empty")
    return p


def directed_mean_distance(a: ArrayLike, b: ArrayLike) -> float:
    """Mean over points of ``a`` of the distance to the nearest point of ``b``."""
    a = _check_points(a, "a")
    b = _check_points(b, "b")
    d, _ = cKDTree(b).query(a, k=1)
    return float(d.mean())


def modified_hausdorff(a: ArrayLike, b: ArrayLike) -> float:
    """Symmetric average Hausdorff distance between two point sets.

    ``max(mean_i min_q |P_i - q|, mean_j min_p |Q_j - p|)``. Both sets must be
    non-empty ``(n, 2)`` arrays.
    """
    return max(directed_mean_distance(a, b), directed_mean_distance(b, a))


def contour_points(phi, spacing: float = 1.0, density: int = 1) -> NDArray[np.float64]:
    """Sub-pixel points on the zero level set as ``(n, 2)`` ``(x, y)`` pairs.

    ``density=1`` returns the edge crossings (each shared by two segments,
    deduplicated); larger values add ``density - 1`` evenly spaced points
    inside every marching-squares segment.
    """
    start, end = contour_segments(phi, spacing)
    if len(start) == 0:
        return np.empty((0, 2))
    t = np.arange(density) / density
    pts = start[:, None, :] + t[None, :, None] * (end - start)[:, None, :]
    pts = np.concatenate([pts.reshape(-1, 2), end])
    return np.unique(np.round(pts, 12), axis=0)


def contour_distance(phi_a, phi_b, spacing: float = 1.0) -> float:
    """Symmetric mean distance between two zero level sets, measured point-to-polyline.

    Each direction averages the exact distance from the crossings of one
    contour to the marching-squares polyline of the other; the larger of
    the two means is returned. Raises if either contour is empty.
    """
    sa, ea = contour_segments(phi_a, spacing)
    sb, eb = contour_segments(phi_b, spacing)
    pa = contour_points(phi_a, spacing)
    pb = contour_points(phi_b, spacing)
    if len(pa) == 0 or len(pb) == 0:
        raise InvalidParameterError("contour is empty")
    d_ab = distance_to_segments(pa, sb, eb).mean()
    d_ba = distance_to_segments(pb, sa, ea).mean()
    return float(max(d_ab, d_ba))


def contour_displacement(phi_before, phi_after) -> float:
    """Mean normal displacement of the zero set from ``phi_before`` to ``phi_after``.

    Evaluates ``phi_before`` (assumed a signed distance function) by linear
    interpolation at the edge crossings of ``phi_after``.
    """
    vals = sample_at_crossings(phi_before, phi_after)
    if len(vals) == 0:
        raise InvalidParameterError("contour is empty")
    return float(np.mean(np.abs(vals)))


def convex_deficiency(mask: ArrayLike) -> float:
    """Area of the convex hull of the mask's pixel squares minus the mask area, in cells."""
    from scipy.spatial import ConvexHull

    m = np.asarray(mask, dtype=bool)
    y, x = np.nonzero(m)
    if len(x) == 0:
        return 0.0
    corners = np.concatenate(
        [np.c_[x + dx, y + dy] for dx in (-0.5, 0.5) for dy in (-0.5, 0.5)]
    ).astype(np.float64)
    return float(ConvexHull(corners).volume - len(x))
