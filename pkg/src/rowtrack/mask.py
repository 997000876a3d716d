"""Binary mask grid, coordinate conventions and PGM file I/O.

Coordinate convention used across the toolkit: origin at the top-left
corner, x grows rightward (column index), y grows downward (row index).
A mask value of 1 marks a crop-row pixel.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

MIN_SIDE = 16
DEFAULT_SIZE = 512


class MaskError(Exception):
    """Base class for mask file problems."""


class UnsupportedImageFormat(MaskError):
    """File is not an 8-bit P2/P5 PGM."""


class MalformedPgmHeader(MaskError):
    """PGM header could not be parsed."""


class TruncatedPgmPayload(MaskError):
    """Pixel payload is shorter than the header promises."""


class ImagePoint(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True, eq=False)
class Mask:
    """Immutable H x W binary grid; pixels[y, x] in {0, 1}."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2:
            raise ValueError("mask must be a 2-D grid")
        h, w = px.shape
        if h < MIN_SIDE or w < MIN_SIDE:
            raise ValueError(f"mask must be at least {MIN_SIDE}x{MIN_SIDE}, got {w}x{h}")
        if px.max(initial=0) > 1:
            raise ValueError("mask pixels must be 0 or 1")
        if not px.flags["C_CONTIGUOUS"]:
            px = np.ascontiguousarray(px)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def at(self, x: int, y: int) -> int:
        """Read I(x, y): column x, row y."""
        return int(self.pixels[y, x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mask):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


def _read_pgm_tokens(data: bytes, count: int, start: int) -> tuple[list[int], int]:
    # Header tokens are whitespace separated; '#' starts a comment to end of line.
    tokens: list[int] = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace():
            j += 1
        if j == i:
            raise MalformedPgmHeader("unexpected end of header")
        tok = data[i:j]
        if not tok.isdigit():
            raise MalformedPgmHeader(f"non-numeric header token {tok!r}")
        tokens.append(int(tok))
        i = j
    return tokens, i


def load_mask(path: str | os.PathLike) -> Mask:
    """Load a binary or plain PGM; grey values >= 128 become 1, the rest 0."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 2:
        raise MalformedPgmHeader("file too short for a PGM header")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedImageFormat(f"unsupported magic {magic!r}, expected P2 or P5")
    try:
        (width, height, maxval), pos = _read_pgm_tokens(data, 3, 2)
    except MalformedPgmHeader:
        raise
    if width <= 0 or height <= 0 or maxval <= 0:
        raise MalformedPgmHeader("non-positive dimension or maxval")
    if maxval > 255:
        raise UnsupportedImageFormat(f"maxval {maxval} > 255 (16-bit PGM not supported)")

    if magic == b"P5":
        # Exactly one whitespace byte separates the header from the payload.
        pos += 1
        payload = data[pos : pos + width * height]
        if len(payload) < width * height:
            raise TruncatedPgmPayload(
                f"expected {width * height} pixel bytes, got {len(payload)}"
            )
        grid = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    else:
        values = data[pos:].split()
        if len(values) < width * height:
            raise TruncatedPgmPayload(
                f"expected {width * height} samples, got {len(values)}"
            )
        try:
            flat = np.array([int(v) for v in values[: width * height]], dtype=np.int64)
        except ValueError as exc:
            raise TruncatedPgmPayload(f"bad sample in P2 payload: {exc}") from exc
        grid = flat.reshape(height, width)

    return Mask((grid >= 128).astype(np.uint8))


def save_mask(mask: Mask, path: str | os.PathLike) -> None:
    """Write a P5 PGM with 1 -> 255 and 0 -> 0. The write is atomic."""
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    payload = (mask.pixels * np.uint8(255)).tobytes()
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".pgm.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def column_sum(mask: Mask, x: int, y_from: int, y_to: int) -> int:
    """Sum of I(x, y) for y in the half-open range [y_from, y_to)."""
    if not 0 <= x < mask.width:
        raise IndexError(f"column {x} out of range [0, {mask.width})")
    if not 0 <= y_from <= y_to <= mask.height:
        raise IndexError(f"row range [{y_from}, {y_to}) invalid for height {mask.height}")
    return int(mask.pixels[y_from:y_to, x].sum(dtype=np.int64))
