"""VVC luma intra interpolation filters and the coefficient-averaging approximation.

Both tables have 32 phases (k = 0..31) of 4 taps at Q6 scale. ``fC`` is the
DCT-based cubic filter, ``fG`` the 4-tap smoothing (Gaussian) filter.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import ConfigError, InvariantViolation

ROWS = 32
TAPS = 4
GROUP_SIZES = (1, 2, 4, 8, 16, 32)
FILTER_IDS = ("fC", "fG")

# H.266 luma intra interpolation filter coefficients, indexed by phase k
_FC_ROWS = (
    (0, 64, 0, 0),
    (-1, 63, 2, 0),
    (-2, 62, 4, 0),
    (-2, 60, 7, -1),
    (-2, 58, 10, -2),
    (-3, 57, 12, -2),
    (-4, 56, 14, -2),
    (-4, 55, 15, -2),
    (-4, 54, 16, -2),
    (-5, 53, 18, -2),
    (-6, 52, 20, -2),
    (-6, 49, 24, -3),
    (-6, 46, 28, -4),
    (-5, 44, 29, -4),
    (-4, 42, 30, -4),
    (-4, 39, 33, -4),
    (-4, 36, 36, -4),
    (-4, 33, 39, -4),
    (-4, 30, 42, -4),
    (-4, 29, 44, -5),
    (-4, 28, 46, -6),
    (-3, 24, 49, -6),
    (-2, 20, 52, -6),
    (-2, 18, 53, -5),
    (-2, 16, 54, -4),
    (-2, 15, 55, -4),
    (-2, 14, 56, -4),
    (-2, 12, 57, -3),
    (-2, 10, 58, -2),
    (-1, 7, 60, -2),
    (0, 4, 62, -2),
    (0, 2, 63, -1),
)

_FG_ROWS = (
    (16, 32, 16, 0),
    (16, 32, 16, 0),
    (15, 31, 17, 1),
    (15, 31, 17, 1),
    (14, 30, 18, 2),
    (14, 30, 18, 2),
    (13, 29, 19, 3),
    (13, 29, 19, 3),
    (12, 28, 20, 4),
    (12, 28, 20, 4),
    (11, 27, 21, 5),
    (11, 27, 21, 5),
    (10, 26, 22, 6),
    (10, 26, 22, 6),
    (9, 25, 23, 7),
    (9, 25, 23, 7),
    (8, 24, 24, 8),
    (8, 24, 24, 8),
    (7, 23, 25, 9),
    (7, 23, 25, 9),
    (6, 22, 26, 10),
    (6, 22, 26, 10),
    (5, 21, 27, 11),
    (5, 21, 27, 11),
    (4, 20, 28, 12),
    (4, 20, 28, 12),
    (3, 19, 29, 13),
    (3, 19, 29, 13),
    (2, 18, 30, 14),
    (2, 18, 30, 14),
    (1, 17, 31, 15),
    (1, 17, 31, 15),
)


@dataclass(frozen=True)
class CoefficientTable:
    id: str
    rows: tuple[tuple[int, int, int, int], ...]
    approx_n: int = 1

    def __post_init__(self):
        if self.id not in FILTER_IDS:
            raise ConfigError(f"unknown filter id {self.id!r}")
        if len(self.rows) != ROWS or any(len(r) != TAPS for r in self.rows):
            raise ConfigError("coefficient table must be 32 x 4")
        if self.approx_n not in GROUP_SIZES:
            raise ConfigError(f"approx_n must be one of {GROUP_SIZES}, got {self.approx_n}")

    def row(self, k: int) -> tuple[int, int, int, int]:
        return self.rows[k]

    def column(self, tap: int) -> tuple[int, ...]:
        return tuple(r[tap] for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "c0", "c1", "c2", "c3"])
        for k, r in enumerate(self.rows):
            w.writerow([k, *r])
        return buf.getvalue()


@dataclass(frozen=True)
class TableSet:
    fc: CoefficientTable
    fg: CoefficientTable

    def __post_init__(self):
        if self.fc.approx_n != self.fg.approx_n:
            raise ConfigError("fC and fG must share the same grouping factor")
        if self.fc.id != "fC" or self.fg.id != "fG":
            raise ConfigError("TableSet expects (fC, fG)")

    @property
    def approx_n(self) -> int:
        return self.fc.approx_n

    def get(self, filter_id: str) -> CoefficientTable:
        if filter_id in ("fC", "fc"):
            return self.fc
        if filter_id in ("fG", "fg"):
            return self.fg
        raise ConfigError(f"unknown filter id {filter_id!r}")

    def __iter__(self):
        return iter((self.fc, self.fg))


@dataclass(frozen=True)
class TapDemand:
    """Coefficients one MCM block must produce for one tap column.

    ``coefficients`` never contains 0 or +-1; those are reported through the
    two flags instead.
    """

    tap: int
    coefficients: tuple[int, ...]
    bypass_ones: bool = False
    zero_dropped: bool = False


def _self_check(rows, name):
    for k, r in enumerate(rows):
        if sum(r) != 64:
            raise InvariantViolation(f"{name} row {k} sums to {sum(r)}, expected 64")


_self_check(_FC_ROWS, "fC")
_self_check(_FG_ROWS, "fG")
if _FC_ROWS[0] != (0, 64, 0, 0):
    raise InvariantViolation("fC phase 0 must be the identity")


def load_builtin_tables() -> TableSet:
    return TableSet(CoefficientTable("fC", _FC_ROWS), CoefficientTable("fG", _FG_ROWS))


def approximate_table(table: CoefficientTable, n: int) -> CoefficientTable:
    """Replace each run of ``n`` consecutive rows by its column-wise mean.

    The mean is floored (rounded toward negative infinity), so a group of
    precise values averaging 51.625 becomes 51 and one averaging -6.5
    becomes -7.
    """
    if n not in GROUP_SIZES:
        raise ConfigError(f"grouping factor must be one of {GROUP_SIZES}, got {n!r}")
    if table.approx_n != 1:
        raise ConfigError("only precise tables can be approximated")
    if n == 1:
        return table
    cols = []
    for tap in range(TAPS):
        col = table.column(tap)
        out = []
        for g in range(0, ROWS, n):
            mean = sum(col[g:g + n]) // n
            out.extend([mean] * n)
        cols.append(out)
    rows = tuple(tuple(cols[t][k] for t in range(TAPS)) for k in range(ROWS))
    return CoefficientTable(table.id, rows, n)


def approximate_tables(tables: TableSet, n: int) -> TableSet:
    return TableSet(approximate_table(tables.fc, n), approximate_table(tables.fg, n))


def tables_for(n: int) -> TableSet:
    """Built-in tables approximated with grouping factor ``n`` (1 = precise)."""
    return approximate_tables(load_builtin_tables(), n)


def tap_demands(tables: TableSet) -> list[TapDemand]:
    demands = []
    for tap in range(TAPS):
        values = set(tables.fc.column(tap)) | set(tables.fg.column(tap))
        zero = 0 in values
        ones = bool(values & {1, -1})
        coeffs = tuple(sorted(values - {0, 1, -1}))
        demands.append(TapDemand(tap, coeffs, bypass_ones=ones, zero_dropped=zero))
    return demands


def distinct_value_count(tables: TableSet) -> int:
    """Distinct signed values across both tables, counting 0 and 64.

    Over the precise tables this convention gives 57.
    """
    return len({v for t in tables for r in t.rows for v in r})
