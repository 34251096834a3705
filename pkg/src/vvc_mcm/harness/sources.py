"""Image input (binary PGM) and block/reference extraction."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InputError
from ..geometry import BlockSpec, Reference, extend_reference, is_vertical
from ..predictor import SampleBlock


def read_pgm(path, bit_depth: int = 10) -> np.ndarray:
    """Read a P5 PGM (8- or 16-bit) and rescale its samples to ``bit_depth``."""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    return parse_pgm(data, bit_depth)


def parse_pgm(data: bytes, bit_depth: int = 10) -> np.ndarray:
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise InputError("truncated PGM header")
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise InputError(f"not a binary PGM (magic {fields[0]!r})")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError as e:
        raise InputError("malformed PGM header") from e
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise InputError("invalid PGM dimensions or maxval")
    pos += 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    if len(data) - pos < count * dtype.itemsize:
        raise InputError("PGM pixel data is truncated")
    img = np.frombuffer(data, dtype=dtype, count=count, offset=pos).astype(np.int64)
    img = img.reshape(height, width)
    src_bits = 8 if maxval <= 255 else maxval.bit_length()
    shift = bit_depth - src_bits
    return img << shift if shift >= 0 else img >> -shift


def write_pgm(path, image: np.ndarray, maxval: int = 255) -> None:
    img = np.asarray(image)
    h, w = img.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode()
    dtype = ">u2" if maxval > 255 else "u1"
    Path(path).write_bytes(header + img.astype(dtype).tobytes())


def synthetic_image(width: int, height: int, bit_depth: int = 10, seed: int = 0) -> np.ndarray:
    """Seeded test picture: oriented ramps and gratings plus noise."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(float)
    img = np.zeros((height, width))
    for _ in range(6):
        theta = rng.uniform(0, np.pi)
        period = rng.uniform(6, 48)
        phase = rng.uniform(0, 2 * np.pi)
        u = xx * np.cos(theta) + yy * np.sin(theta)
        img += rng.uniform(0.3, 1.0) * np.sin(2 * np.pi * u / period + phase)
    img += 0.02 * (xx * rng.uniform(-1, 1) + yy * rng.uniform(-1, 1))
    img += rng.normal(0, 0.15, size=img.shape)
    img -= img.min()
    img /= max(img.max(), 1e-9)
    return np.round(img * ((1 << bit_depth) - 1)).astype(np.int64)


@dataclass(frozen=True)
class BlockContext:
    """Original block plus its top and left neighbour lines.

    ``top[0]`` and ``left[0]`` are the shared corner sample; ``top[j]`` is the
    neighbour above column ``j - 1``, ``left[j]`` the one left of row ``j - 1``.
    """

    x0: int
    y0: int
    block: BlockSpec
    original: SampleBlock
    top: tuple[int, ...]
    left: tuple[int, ...]

    def main_reference(self, mode: int) -> Reference:
        main, side = (self.top, self.left) if is_vertical(mode) else (self.left, self.top)
        return extend_reference(Reference(main, 0), side, mode, self.block)


def _reach(block: BlockSpec) -> int:
    # enough for the widest angle (512/32 = 16 samples per line) plus the taps
    return max(block.width, block.height) * 17 + 4


def block_context(image: np.ndarray, x0: int, y0: int, block: BlockSpec) -> BlockContext:
    """Cut a block and its reference lines; positions outside the picture
    are clamped to its border."""
    h, w = image.shape
    if not (0 <= x0 and x0 + block.width <= w and 0 <= y0 and y0 + block.height <= h):
        raise InputError(f"block at ({x0}, {y0}) does not fit a {w}x{h} image")
    n = _reach(block)
    yt = min(max(y0 - 1, 0), h - 1)
    xl = min(max(x0 - 1, 0), w - 1)
    top = tuple(int(image[yt, min(max(x0 - 1 + j, 0), w - 1)]) for j in range(n))
    left = tuple(int(image[min(max(y0 - 1 + j, 0), h - 1), xl]) for j in range(n))
    orig = image[y0:y0 + block.height, x0:x0 + block.width]
    return BlockContext(x0, y0, block, SampleBlock(block.width, block.height,
                                                   tuple(int(v) for v in orig.ravel())), top, left)


def sample_blocks(image: np.ndarray, block: BlockSpec, count: int | None = None,
                  seed: int = 0) -> list[BlockContext]:
    """Grid-aligned blocks with a real top/left neighbourhood, in a seeded
    random order; ``count=None`` returns all of them."""
    h, w = image.shape
    spots = [(x, y) for y in range(block.height, h - block.height + 1, block.height)
             for x in range(block.width, w - block.width + 1, block.width)]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(spots))
    if count is not None:
        if count > len(spots):
            raise InputError(f"image holds {len(spots)} usable blocks, {count} requested")
        order = order[:count]
    return [block_context(image, *spots[i], block) for i in sorted(order)]
