"""Raster containers, channel handling, block partitioning and PNM I/O.

Images are plain numpy arrays in row-major order with x to the right and
y downwards:

* color image: ``uint8`` array of shape ``(height, width, 3)``
* gray image: ``uint8`` array of shape ``(height, width)``
* float image: ``float64`` array of shape ``(height, width)``
* binary mask: ``bool`` array of shape ``(height, width)``
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConfigError, DataError, ImageFormatError, TruncatedImageError

GrayMode = Literal["green", "luminance"]

LUMINANCE_WEIGHTS = (0.299, 0.587, 0.114)


def check_color(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise DataError(f"expected uint8 (H, W, 3) color image, got {img.dtype} {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise DataError("image must be at least 1x1")
    return img


def check_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise DataError(f"expected uint8 (H, W) gray image, got {img.dtype} {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise DataError("image must be at least 1x1")
    return img


# --------------------------------------------------------------------------
# PNM (P5 / P6) I/O

def _read_header(data: bytes, path) -> tuple[bytes, int, int, int, int]:
    """Parse a binary PNM header, return (magic, width, height, maxval, offset)."""
    tokens: list[bytes] = []
    pos = 0
    n = len(data)
    while len(tokens) < 4:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise ImageFormatError(f"{path}: header ends prematurely")
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    if pos >= n or not data[pos:pos + 1].isspace():
        raise ImageFormatError(f"{path}: missing whitespace after header")
    pos += 1

    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"{path}: unsupported magic {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ImageFormatError(f"{path}: non-integer header field") from None
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: invalid dimensions {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    return magic, width, height, maxval, pos


def _read_pnm(path, expect: bytes) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    magic, width, height, _, offset = _read_header(data, path)
    if magic != expect:
        raise ImageFormatError(f"{path}: expected {expect.decode()}, found {magic.decode()}")
    channels = 3 if magic == b"P6" else 1
    need = width * height * channels
    raster = data[offset:offset + need]
    if len(raster) < need:
        raise TruncatedImageError(
            f"{path}: expected {need} raster bytes, found {len(raster)}")
    arr = np.frombuffer(raster, dtype=np.uint8).copy()
    if channels == 3:
        return arr.reshape(height, width, 3)
    return arr.reshape(height, width)


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Read a binary PPM (P6) file into an ``(H, W, 3)`` uint8 array.

    Raises ``FileNotFoundError`` for a missing file, ``ImageFormatError`` for a
    malformed header and ``TruncatedImageError`` when raster bytes are missing.
    """
    return _read_pnm(path, b"P6")


def load_gray(path: str | os.PathLike) -> np.ndarray:
    """Read a binary PGM (P5) file into an ``(H, W)`` uint8 array."""
    return _read_pnm(path, b"P5")


def save_image(path: str | os.PathLike, img: np.ndarray) -> None:
    img = check_color(img)
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())


def save_gray(path: str | os.PathLike, img: np.ndarray) -> None:
    img = np.asarray(img)
    if img.dtype == bool:
        img = img.astype(np.uint8) * 255
    img = check_gray(img)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())


# --------------------------------------------------------------------------
# channels

def split_channels(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    img = check_color(img)
    return tuple(np.ascontiguousarray(img[:, :, k]) for k in range(3))


def merge_channels(r: np.ndarray, g: np.ndarray, b: np.ndarray) -> np.ndarray:
    planes = [check_gray(p) for p in (r, g, b)]
    if not planes[0].shape == planes[1].shape == planes[2].shape:
        raise DataError("channel planes differ in shape")
    return np.stack(planes, axis=-1)


def to_gray(img: np.ndarray, mode: GrayMode = "green") -> np.ndarray:
    """Convert a color image to gray.

    ``green`` copies the green channel, which carries the highest vessel
    contrast in fundus photographs. ``luminance`` applies the Rec. 601
    weights and rounds to the nearest integer.
    """
    img = check_color(img)
    if mode == "green":
        return img[:, :, 1].copy()
    if mode == "luminance":
        wr, wg, wb = LUMINANCE_WEIGHTS
        y = wr * img[:, :, 0] + wg * img[:, :, 1] + wb * img[:, :, 2]
        return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)
    raise ConfigError(f"unknown gray mode {mode!r}")


# --------------------------------------------------------------------------
# blocks

@dataclass(frozen=True)
class Block:
    x: int
    y: int
    width: int
    height: int

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.y, self.y + self.height), slice(self.x, self.x + self.width)


@dataclass(frozen=True)
class BlockGrid:
    block_width: int
    block_height: int
    blocks: tuple[Block, ...]

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


def partition_blocks(width: int, height: int, block_width: int, block_height: int) -> BlockGrid:
    """Tile a ``width x height`` image with non-overlapping blocks.

    Blocks are listed in raster order. Blocks on the right and bottom edges
    are truncated to the image bounds.
    """
    if block_width < 1 or block_height < 1:
        raise ConfigError("block dimensions must be >= 1")
    if width < 1 or height < 1:
        raise ConfigError("image dimensions must be >= 1")
    blocks = []
    for y in range(0, height, block_height):
        for x in range(0, width, block_width):
            blocks.append(Block(x, y, min(block_width, width - x), min(block_height, height - y)))
    return BlockGrid(block_width, block_height, tuple(blocks))


def grid_blocks(width: int, height: int, g: int) -> BlockGrid:
    """Split an image into exactly ``g x g`` blocks of near-equal size.

    Unlike :func:`partition_blocks` the block count is fixed, which keeps
    feature vectors the same length for any image at least ``g`` pixels wide.
    """
    if g < 1:
        raise ConfigError("grid size must be >= 1")
    if width < g or height < g:
        raise ConfigError(f"image {width}x{height} is smaller than a {g}x{g} grid")
    xs = [(i * width) // g for i in range(g + 1)]
    ys = [(j * height) // g for j in range(g + 1)]
    blocks = tuple(
        Block(xs[i], ys[j], xs[i + 1] - xs[i], ys[j + 1] - ys[j])
        for j in range(g) for i in range(g)
    )
    return BlockGrid(-(-width // g), -(-height // g), blocks)
