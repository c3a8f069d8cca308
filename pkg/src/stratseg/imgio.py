"""Grayscale images, bit-exact PGM I/O and region histograms.

Pixels are 8-bit, stored row-major with the origin at the top-left corner.
Only single-channel PGM with maxval <= 255 is handled; the canonical writer
emits binary P5 with newline separators so golden files are byte-exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    MalformedHeader,
    RectOutOfBounds,
    TruncatedData,
    UnsupportedMaxval,
)

__all__ = ["GrayImage", "Rect", "load_pgm", "save_pgm", "region_histogram"]


@dataclass(frozen=True)
class GrayImage:
    """Immutable 8-bit grayscale image.

    `pixels` is a (height, width) uint8 array; it is copied on construction
    and marked read-only, so instances are safe to share across threads.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255):
                raise ValueError("intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class Rect:
    """Axis-aligned pixel rectangle: top-left inclusive, extent in pixels."""

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1 or self.x0 < 0 or self.y0 < 0:
            raise ValueError(f"invalid rect {self!r}")

    @property
    def area(self) -> int:
        return self.w * self.h


def _tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping '#' comments.

    Also yields the byte offset just past each token so the P5 raster start
    (one whitespace byte after maxval) can be located.
    """
    i = 0
    n = len(data)
    while i < n:
        c = data[i : i + 1]
        if c in b" \t\r\n":
            i += 1
        elif c == b"#":
            j = data.find(b"\n", i)
            i = n if j < 0 else j + 1
        else:
            j = i
            while j < n and data[j : j + 1] not in b" \t\r\n#":
                j += 1
            yield data[i:j], j
            i = j


def load_pgm(data: bytes) -> GrayImage:
    """Parse a binary (P5) or ASCII (P2) PGM byte string."""
    gen = _tokens(data)
    try:
        magic, _ = next(gen)
    except StopIteration:
        raise MalformedHeader("empty input") from None
    if magic not in (b"P5", b"P2"):
        raise MalformedHeader(f"bad magic {magic!r}")
    header = []
    for _ in range(3):
        try:
            header.append(next(gen))
        except StopIteration:
            raise MalformedHeader("incomplete header") from None
    try:
        width, height, maxval = (int(tok) for tok, _ in header)
    except ValueError:
        raise MalformedHeader("non-numeric header field") from None
    if width < 1 or height < 1:
        raise MalformedHeader(f"non-positive dimensions {width}x{height}")
    if maxval > 255:
        raise UnsupportedMaxval(f"maxval {maxval} > 255")
    if maxval < 1:
        raise MalformedHeader(f"invalid maxval {maxval}")

    npix = width * height
    if magic == b"P5":
        raster_start = header[2][1] + 1  # single whitespace byte after maxval
        raster = data[raster_start : raster_start + npix]
        if len(raster) < npix:
            raise TruncatedData(f"expected {npix} bytes, got {len(raster)}")
        arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    else:
        values = []
        for tok, _ in gen:
            try:
                values.append(int(tok))
            except ValueError:
                raise MalformedHeader(f"non-numeric sample {tok!r}") from None
        if len(values) < npix:
            raise TruncatedData(f"expected {npix} samples, got {len(values)}")
        arr = np.array(values[:npix], dtype=np.int64).reshape(height, width)
        if arr.max(initial=0) > maxval:
            raise MalformedHeader("sample exceeds maxval")
        arr = arr.astype(np.uint8)
    if int(arr.max(initial=0)) > maxval:
        raise MalformedHeader("sample exceeds maxval")
    return GrayImage(arr)


def save_pgm(img: GrayImage) -> bytes:
    """Serialize to canonical binary P5: 'P5\\n<w> <h>\\n255\\n' + raster."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def region_histogram(img: GrayImage, r: Rect) -> np.ndarray:
    """256-bin intensity histogram of the pixels inside `r` (int64 counts)."""
    if r.x0 + r.w > img.width or r.y0 + r.h > img.height:
        raise RectOutOfBounds(f"{r} outside {img.width}x{img.height} image")
    sub = img.pixels[r.y0 : r.y0 + r.h, r.x0 : r.x0 + r.w]
    return np.bincount(sub.ravel(), minlength=256).astype(np.int64)
