"""Netpbm images, plain-text fields and contour overlays."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import FormatError, InvalidParameterError
from .fields import _values

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
FIELD_FORMAT = "%.17g"


@dataclass(frozen=True)
class OverlaySpec:
    color: tuple[int, int, int] = (255, 0, 0)
    thickness: int = 1

    def __post_init__(self):
        if len(self.color) != 3 or any(not (0 <= int(c) <= 255) for c in self.color):
            raise InvalidParameterError(f"color channels must be in [0, 255], got {self.color}")
        if self.thickness != 1:
            raise InvalidParameterError("only 1-pixel contour lines are supported")


# --------------------------------------------------------------------------
# images


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens: list[bytes] = []
    i, n = 2, len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        if j == i:
            raise FormatError(f"truncated header {data[:16]!r}")
        tokens.append(data[i:j])
        i = j
    return tokens, i


def _parse_pgm(data: bytes) -> NDArray[np.float64]:
    magic = data[:2]
    tokens, pos = _header_tokens(data, 3)
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"non-numeric header fields {b' '.join(tokens)!r} after {magic!r}") from None
    if w < 1 or h < 1 or not (1 <= maxval <= 65535):
        raise FormatError(f"bad header {magic!r} {w} {h} {maxval}")
    if magic == b"P2":
        body = data[pos:].split()
        if len(body) < w * h:
            raise FormatError(f"truncated P2 data: expected {w * h} values, found {len(body)}")
        try:
            vals = np.array([int(v) for v in body[: w * h]], dtype=np.float64)
        except ValueError:
            raise FormatError("non-integer sample in P2 data") from None
    else:
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            raise FormatError(f"missing whitespace after P5 header {data[:pos]!r}")
        start = pos + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = w * h * dtype.itemsize
        if len(data) - start < need:
            raise FormatError(f"truncated P5 data: expected {need} bytes, found {len(data) - start}")
        vals = np.frombuffer(data, dtype=dtype, count=w * h, offset=start).astype(np.float64)
    if vals.max(initial=0) > maxval:
        raise FormatError(f"sample exceeds maxval {maxval}")
    return (vals / maxval).reshape(h, w)


def _parse_png(path: str) -> NDArray[np.float64]:
    try:
        from PIL import Image
    except ImportError:
        raise FormatError("PNG input needs the optional Pillow dependency (pip install artifact[png])") from None
    with Image.open(path) as im:
        if im.mode not in ("L", "I;16", "I"):
            raise FormatError(f"PNG mode {im.mode!r} is not single-channel grayscale")
        arr = np.asarray(im, dtype=np.float64)
        maxval = 255.0 if im.mode == "L" else 65535.0
    return arr / maxval


def load_image(path: str | os.PathLike) -> NDArray[np.float64]:
    """Read a PGM (P2 or P5, maxval up to 65535) or grayscale PNG into ``[0, 1]``.

    Raises
    ------
    FormatError
        On unsupported or malformed files; the message names the header bytes.
    """
    path = os.fspath(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] in (b"P2", b"P5"):
        return _parse_pgm(data)
    if data[:8] == PNG_SIGNATURE:
        return _parse_png(path)
    raise FormatError(f"unsupported image format, header bytes {data[:8]!r}")


def save_pgm(image: ArrayLike, path: str | os.PathLike, maxval: int = 255) -> None:
    """Write ``image`` (values in ``[0, 1]``) as binary P5."""
    img = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    h, w = img.shape
    q = np.round(img * maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        fh.write(q.astype(dtype).tobytes())


def contour_pixels(phi) -> NDArray[np.bool_]:
    """Cells with a 4-neighbour on the other side of the zero level (``phi > 0`` is inside).

    A list or tuple of fields gives the union of their contour cells.
    """
    if isinstance(phi, (list, tuple)):
        return np.logical_or.reduce([contour_pixels(p) for p in phi])
    inside = _values(phi) > 0
    edge = np.zeros_like(inside)
    dx = inside[:, 1:] != inside[:, :-1]
    dy = inside[1:, :] != inside[:-1, :]
    edge[:, 1:] |= dx
    edge[:, :-1] |= dx
    edge[1:, :] |= dy
    edge[:-1, :] |= dy
    return edge


def overlay_rgb(image: ArrayLike, phi, spec: OverlaySpec = OverlaySpec()) -> NDArray[np.uint8]:
    img = np.asarray(image, dtype=np.float64)
    mask = contour_pixels(phi)
    if mask.shape != img.shape:
        raise InvalidParameterError(f"image shape {img.shape} differs from phi shape {mask.shape}")
    gray = np.round(np.clip(img, 0.0, 1.0) * 255).astype(np.uint8)
    rgb = np.repeat(gray[..., None], 3, axis=2)
    rgb[mask] = np.asarray(spec.color, dtype=np.uint8)
    return rgb


def save_ppm(rgb: NDArray[np.uint8], path: str | os.PathLike) -> None:
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())


def load_ppm(path: str | os.PathLike) -> NDArray[np.uint8]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P6":
        raise FormatError(f"not a P6 file, header bytes {data[:8]!r}")
    tokens, pos = _header_tokens(data, 3)
    w, h, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise FormatError(f"only 8-bit P6 is supported, got maxval {maxval}")
    need = 3 * w * h
    body = data[pos + 1 : pos + 1 + need]
    if len(body) < need:
        raise FormatError("truncated P6 data")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)


def save_overlay(image: ArrayLike, phi, path: str | os.PathLike, spec: OverlaySpec = OverlaySpec()) -> int:
    """Write the image as P6 with the zero-level cells painted; returns the painted count.

    ``phi`` may be a list of fields, in which case every contour is drawn.
    """
    rgb = overlay_rgb(image, phi, spec)
    save_ppm(rgb, path)
    return int(contour_pixels(phi).sum())


# --------------------------------------------------------------------------
# plain-text fields


def save_field(phi, path: str | os.PathLike) -> None:
    """``width height`` on the first line, then one row of values per line (17 significant digits)."""
    p = np.atleast_2d(_values(phi))
    h, w = p.shape
    with open(path, "w") as fh:
        fh.write(f"{w} {h}\n")
        for row in p:
            fh.write(" ".join(FIELD_FORMAT % v for v in row))
            fh.write("\n")


def load_field(path: str | os.PathLike) -> NDArray[np.float64]:
    """Inverse of :func:`save_field`.

    Raises
    ------
    FormatError
        If the header is malformed or the row/column counts disagree with it.
    """
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty field file")
    head = lines[0].split()
    try:
        w, h = int(head[0]), int(head[1])
        if len(head) != 2 or w < 1 or h < 1:
            raise ValueError
    except (ValueError, IndexError):
        raise FormatError(f"bad field header {lines[0]!r}") from None
    rows = lines[1:]
    if len(rows) != h:
        raise FormatError(f"expected {h} rows, found {len(rows)}")
    out = np.empty((h, w))
    for i, ln in enumerate(rows):
        parts = ln.split()
        if len(parts) != w:
            raise FormatError(f"row {i + 1}: expected {w} values, found {len(parts)}")
        try:
            out[i] = [float(v) for v in parts]
        except ValueError:
            raise FormatError(f"row {i + 1}: non-numeric value") from None
    return out
