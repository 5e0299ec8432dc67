"""Input validation helpers shared by the functional API and the estimators."""
from __future__ import annotations

import numbers

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import InvalidParameterError


def check_field(X: ArrayLike, name: str = "field", min_size: int = 3) -> NDArray[np.float64]:
    """Return ``X`` as a finite 2-D float64 array.

    Raises
    ------
    InvalidParameterError
        If ``X`` is not 2-D, is smaller than ``min_size`` along an axis,
        or contains NaN/Inf.
    """
    if hasattr(X, "phi"):
        X = X.phi
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidParameterError(f"{name} must be 2-D, got shape {arr.shape}")
    if min(arr.shape) < min_size:
        raise InvalidParameterError(
            f"{name} must be at least {min_size}x{min_size}, got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains NaN or Inf")
    return arr


def check_image(X: ArrayLike, name: str = "image") -> NDArray[np.float64]:
    """Validate an intensity image normalized to ``[0, 1]``."""
    arr = check_field(X, name=name)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidParameterError(
            f"{name} intensities must lie in [0, 1], got [{arr.min():g}, {arr.max():g}]"
        )
    return arr


def check_same_shape(*arrays: NDArray, names: tuple[str, ...] | None = None) -> None:
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) > 1:
        label = ", ".join(names) if names else "inputs"
        raise InvalidParameterError(f"{label} must share one grid, got shapes {sorted(shapes)}")


def check_scalar(
    value,
    name: str,
    *,
    low: float | None = None,
    high: float | None = None,
    strict_low: bool = False,
    integer: bool = False,
):
    """Check a scalar against optional bounds and return it.

    ``strict_low`` makes the lower bound exclusive.
    """
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(value, bool) or not isinstance(value, kind):
        expected = "an integer" if integer else "a real number"
        raise InvalidParameterError(f"{name} must be {expected}, got {value!r}")
    if not np.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    if low is not None:
        if (strict_low and value <= low) or (not strict_low and value < low):
            op = ">" if strict_low else ">="
            raise InvalidParameterError(f"{name} must be {op} {low}, got {value!r}")
    if high is not None and value > high:
        raise InvalidParameterError(f"{name} must be <= {high}, got {value!r}")
    return value
