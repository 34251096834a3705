"""Angular / wide-angle intra geometry: mode -> angle, sample -> (i0, k).

Reference indexing follows the standard's ``ref[]`` array for the main
(projection) side: index 0 is the top-left corner sample and index ``j >= 1``
is the neighbour at column ``j - 1`` above the block.  Horizontal modes use
the left column as main reference and are computed on the transposed block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError, CoverageError, InvalidModeError

VERTICAL = "vertical"
HORIZONTAL = "horizontal"

# intraPredAngle for modes 2..66
_ANGULAR = (
    32, 29, 26, 23, 20, 18, 16, 14, 12, 10, 8, 6, 4, 3, 2, 1, 0,
    -1, -2, -3, -4, -6, -8, -10, -12, -14, -16, -18, -20, -23, -26, -29, -32,
    -29, -26, -23, -20, -18, -16, -14, -12, -10, -8, -6, -4, -3, -2, -1, 0,
    1, 2, 3, 4, 6, 8, 10, 12, 14, 16, 18, 20, 23, 26, 29, 32,
)
# modes 67..80; modes -1..-14 mirror them
_WIDE = (35, 39, 45, 51, 57, 64, 73, 86, 102, 128, 171, 256, 341, 512)

ANGLE_TABLE: dict[int, int] = {m: a for m, a in zip(range(2, 67), _ANGULAR)}
ANGLE_TABLE.update({66 + i: a for i, a in enumerate(_WIDE, start=1)})
ANGLE_TABLE.update({-i: a for i, a in enumerate(_WIDE, start=1)})

ANGULAR_MODES = tuple(range(2, 67))
WAIP_MODES = tuple(range(-14, 0)) + tuple(range(67, 81))
ALL_MODES = tuple(sorted(ANGLE_TABLE))
BLOCK_DIMS = (4, 8, 16, 32, 64)


def check_mode(mode: int) -> int:
    if isinstance(mode, bool) or not isinstance(mode, int) or mode not in ANGLE_TABLE:
        raise InvalidModeError(f"not an angular or wide-angle intra mode: {mode!r}")
    return mode


def mode_angle(mode: int) -> int:
    return ANGLE_TABLE[check_mode(mode)]


def inverse_angle(angle: int) -> int:
    """Round(512 * 32 / angle), as used to project the side reference."""
    if angle == 0:
        raise ValueError("inverse angle undefined for angle 0")
    q = 16384 / angle
    return int(q + 0.5) if q >= 0 else -int(-q + 0.5)


def is_vertical(mode: int) -> bool:
    check_mode(mode)
    return mode >= 34


def mirror_mode(mode: int) -> int:
    """Mode predicting the transposed block with the transposed references."""
    check_mode(mode)
    if 2 <= mode <= 66:
        return 68 - mode
    # wide angles pair -i with 66 + i
    return 66 - mode


@dataclass(frozen=True)
class BlockSpec:
    width: int
    height: int

    def __post_init__(self):
        if self.width not in BLOCK_DIMS or self.height not in BLOCK_DIMS:
            raise ConfigError(f"block dimensions must be powers of two in [4, 64]: {self.width}x{self.height}")
        if self.width * self.height < 16:
            raise ConfigError("block must hold at least 16 samples")

    def transposed(self) -> "BlockSpec":
        return BlockSpec(self.height, self.width)


@dataclass(frozen=True)
class SamplePlan:
    i0: int
    k: int
    axis: str


@dataclass(frozen=True)
class Reference:
    """Linear reference array; ``samples[j]`` holds ref index ``j + base``."""

    samples: tuple[int, ...]
    base: int = 0

    @classmethod
    def of(cls, samples: Sequence[int], base: int = 0) -> "Reference":
        return cls(tuple(int(v) for v in samples), base)

    @property
    def first(self) -> int:
        return self.base

    @property
    def last(self) -> int:
        return self.base + len(self.samples) - 1

    def __getitem__(self, index: int) -> int:
        j = index - self.base
        if j < 0 or j >= len(self.samples):
            raise CoverageError(f"reference index {index} outside [{self.first}, {self.last}]")
        return self.samples[j]

    def covers(self, lo: int, hi: int) -> bool:
        return self.first <= lo and hi <= self.last


def sample_plan(mode: int, x: int, y: int) -> SamplePlan:
    angle = mode_angle(mode)
    if x < 0 or y < 0:
        raise ValueError("sample position must be non-negative")
    if is_vertical(mode):
        pos = (y + 1) * angle
        axis = VERTICAL
    else:
        pos = (x + 1) * angle
        axis = HORIZONTAL
    return SamplePlan(pos >> 5, pos & 31, axis)


def _main_dims(mode: int, block: BlockSpec) -> tuple[int, int]:
    """(along, across) extent of the block seen from the main reference."""
    if is_vertical(mode):
        return block.width, block.height
    return block.height, block.width


def required_ref_range(mode: int, block: BlockSpec) -> tuple[int, int]:
    """Inclusive range of main-reference indices read while predicting ``block``."""
    angle = mode_angle(mode)
    along, across = _main_dims(mode, block)
    offsets = [((d + 1) * angle) >> 5 for d in range(across)]
    return min(offsets), along - 1 + max(offsets) + 3


def extend_reference(main_ref: Reference, side_ref: Sequence[int], mode: int,
                     block: BlockSpec) -> Reference:
    """Project the side reference onto negative main-reference indices.

    ``side_ref`` uses the same convention as the main array: element 0 is the
    corner and element ``j`` the side neighbour at distance ``j - 1``.  For
    non-negative angles ``main_ref`` is returned unchanged.
    """
    angle = mode_angle(mode)
    if angle >= 0:
        return main_ref
    lo, _ = required_ref_range(mode, block)
    if lo >= main_ref.first:
        return main_ref
    if main_ref.first > 0:
        raise CoverageError(f"main reference must start at index <= 0, starts at {main_ref.first}")
    inv = inverse_angle(angle)
    missing = range(lo, main_ref.first)
    proj = [(x * inv + 256) >> 9 for x in missing]
    need = max(proj)
    if need >= len(side_ref):
        raise CoverageError(
            f"side reference too short: indices {len(side_ref)}..{need} missing "
            f"for main-reference range [{lo}, {main_ref.first - 1}]")
    ext = [int(side_ref[j]) for j in proj]
    return Reference(tuple(ext) + main_ref.samples, lo)
