"""Cycle and clock-frequency model for a fixed-parallelism prediction engine."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import ConfigError


@dataclass(frozen=True)
class ThroughputQuery:
    frame_width: int = 1920
    frame_height: int = 1080
    fps: float = 30
    parallelism: int = 512
    square_sizes: int = 5
    rect_sizes: int = 12
    angular_modes: int = 65
    waip_modes: int = 28
    region: int = 64 * 64

    def __post_init__(self):
        for name in ("frame_width", "frame_height", "parallelism", "square_sizes",
                     "rect_sizes", "angular_modes", "waip_modes", "region"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.fps < 0:
            raise ConfigError("fps must be non-negative")
        if self.region % self.parallelism:
            raise ConfigError("parallelism must divide the region area")


@dataclass(frozen=True)
class ThroughputResult:
    cycles_per_region: Fraction
    regions_per_frame: Fraction
    cycles_per_frame: Fraction
    required_frequency_hz: Fraction

    def as_dict(self) -> dict:
        return {k: _num(getattr(self, k)) for k in
                ("cycles_per_region", "regions_per_frame", "cycles_per_frame", "required_frequency_hz")}


def _num(f: Fraction):
    return int(f) if f.denominator == 1 else float(f)


def throughput_model(q: ThroughputQuery) -> ThroughputResult:
    """Every square size is tried with all angular modes and every rectangular
    size with the wide-angle modes, once per ``region`` of the frame."""
    per_region = Fraction(q.region, q.parallelism) * (
        q.angular_modes * q.square_sizes + q.waip_modes * q.rect_sizes)
    regions = Fraction(q.frame_width * q.frame_height, q.region)
    per_frame = per_region * regions
    return ThroughputResult(per_region, regions, per_frame, per_frame * Fraction(q.fps))
