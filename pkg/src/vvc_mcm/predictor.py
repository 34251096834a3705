"""Bit-exact 4-tap angular interpolation, single sample and whole block."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, CoverageError
from .geometry import BlockSpec, Reference, is_vertical, mode_angle, required_ref_range
from .tables import TableSet, load_builtin_tables

# products fit PRODUCT_EXTRA_BITS above the sample width (signed), the rounded
# 4-term sum SUM_EXTRA_BITS; the HDL emitter declares the same widths
PRODUCT_EXTRA_BITS = 7
SUM_EXTRA_BITS = 9


@dataclass(frozen=True)
class PredictionConfig:
    bit_depth: int = 10
    tables: TableSet = field(default_factory=load_builtin_tables)
    filter_choice: str = "fC"

    def __post_init__(self):
        if not 8 <= self.bit_depth <= 12:
            raise ConfigError(f"bit_depth must be in [8, 12], got {self.bit_depth}")
        self.tables.get(self.filter_choice)

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    def row(self, k: int):
        return self.tables.get(self.filter_choice).rows[k]


@dataclass(frozen=True)
class SampleBlock:
    width: int
    height: int
    samples: tuple[int, ...]

    def at(self, x: int, y: int) -> int:
        return self.samples[y * self.width + x]

    def rows(self):
        w = self.width
        return [self.samples[i:i + w] for i in range(0, len(self.samples), w)]

    def transposed(self) -> "SampleBlock":
        t = tuple(self.at(x, y) for x in range(self.width) for y in range(self.height))
        return SampleBlock(self.height, self.width, t)


def clip(value: int, bit_depth: int) -> int:
    return min(max(value, 0), (1 << bit_depth) - 1)


def filter_sum(row, r0: int, r1: int, r2: int, r3: int) -> int:
    """Rounded, shifted 4-tap sum before clipping."""
    return (row[0] * r0 + row[1] * r1 + row[2] * r2 + row[3] * r3 + 32) >> 6


def predict_sample(refs: Reference, i0: int, k: int, config: PredictionConfig) -> int:
    if not 0 <= k <= 31:
        raise ValueError(f"fractional index out of range: {k}")
    if not refs.covers(i0, i0 + 3):
        raise CoverageError(f"reference [{refs.first}, {refs.last}] does not cover [{i0}, {i0 + 3}]")
    return clip(filter_sum(config.row(k), refs[i0], refs[i0 + 1], refs[i0 + 2], refs[i0 + 3]),
                config.bit_depth)


def predict_block(refs: Reference, mode: int, block: BlockSpec,
                  config: PredictionConfig) -> SampleBlock:
    """Predict ``block`` from its main reference.

    For vertical modes ``refs`` is the (extended) top reference; for
    horizontal modes it is the (extended) left reference and the block is
    computed transposed, then transposed back.
    """
    lo, hi = required_ref_range(mode, block)
    if not refs.covers(lo, hi):
        raise CoverageError(f"mode {mode} on {block.width}x{block.height} needs reference "
                            f"[{lo}, {hi}], have [{refs.first}, {refs.last}]")
    angle = mode_angle(mode)
    vertical = is_vertical(mode)
    along, across = (block.width, block.height) if vertical else (block.height, block.width)
    table = config.tables.get(config.filter_choice).rows
    base = refs.base
    s = refs.samples
    top = config.max_value
    out = []
    for d in range(across):
        pos = (d + 1) * angle
        i0, k = pos >> 5, pos & 31
        f0, f1, f2, f3 = table[k]
        j = i0 - base
        for a in range(along):
            v = (f0 * s[j + a] + f1 * s[j + a + 1] + f2 * s[j + a + 2] + f3 * s[j + a + 3] + 32) >> 6
            out.append(0 if v < 0 else top if v > top else v)
    pred = SampleBlock(along, across, tuple(out))
    return pred if vertical else pred.transposed()
