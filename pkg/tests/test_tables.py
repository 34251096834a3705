import pytest
from hypothesis import given, strategies as st

from vvc_mcm.errors import ConfigError
from vvc_mcm.tables import (GROUP_SIZES, ROWS, approximate_table, distinct_value_count,
                            load_builtin_tables, tables_for, tap_demands)

PRECISE = load_builtin_tables()


def floored_means(column, n):
    # independent oracle: exact rational mean, floored
    from fractions import Fraction
    import math
    out = []
    for g in range(0, ROWS, n):
        out += [math.floor(Fraction(sum(column[g:g + n]), n))] * n
    return out


def test_rows_sum_to_64():
    for t in PRECISE:
        assert all(sum(r) == 64 for r in t.rows)


def test_known_rows():
    assert PRECISE.fc.row(0) == (0, 64, 0, 0)
    assert PRECISE.fc.row(16) == (-4, 36, 36, -4)
    assert PRECISE.fg.row(0) == (16, 32, 16, 0)
    assert PRECISE.fg.row(31) == (1, 17, 31, 15)


@pytest.mark.parametrize("n", GROUP_SIZES)
@pytest.mark.parametrize("fid", ["fC", "fG"])
def test_approximation_matches_oracle(n, fid):
    t = approximate_table(PRECISE.get(fid), n)
    for tap in range(4):
        assert list(t.column(tap)) == floored_means(PRECISE.get(fid).column(tap), n)


def test_group_sixteen_column_two():
    t = tables_for(16)
    assert sorted(set(t.fc.column(2))) == [16, 51]
    assert sorted(set(t.fg.column(2))) == [19, 27]


def test_floor_rounds_negative_means_down():
    # fC tap 0, rows 10..11 are -6, -6; rows 12..13 are -6, -5 -> -5.5 floors to -6
    assert tables_for(2).fc.column(0)[12] == -6


def test_n1_is_identity():
    assert tables_for(1) == PRECISE


@pytest.mark.parametrize("n", GROUP_SIZES)
def test_rows_constant_within_groups(n):
    for t in tables_for(n):
        for g in range(0, ROWS, n):
            assert len(set(t.rows[g:g + n])) == 1


def test_distinct_values_57():
    assert distinct_value_count(PRECISE) == 57


def test_distinct_values_shrink():
    counts = [distinct_value_count(tables_for(n)) for n in GROUP_SIZES]
    assert counts == sorted(counts, reverse=True)
    assert distinct_value_count(tables_for(32)) <= 8
    assert distinct_value_count(tables_for(16)) < distinct_value_count(PRECISE)


def test_tap_demands_flags():
    d = tap_demands(PRECISE)
    assert [x.tap for x in d] == [0, 1, 2, 3]
    # tap 1 contains 64 but not 0; taps 0/2/3 contain zeros
    assert not d[1].zero_dropped and 64 in d[1].coefficients
    assert d[0].zero_dropped and d[0].bypass_ones
    for x in d:
        assert not {0, 1, -1} & set(x.coefficients)


def test_tap_demands_n16():
    d = tap_demands(tables_for(16))
    assert d[2].coefficients == (16, 19, 27, 51)


@given(st.sampled_from(GROUP_SIZES), st.sampled_from(["fC", "fG"]), st.integers(0, 31))
def test_approximate_rows_near_64(n, fid, k):
    # flooring loses at most 3 (one unit per tap) and never gains
    s = sum(tables_for(n).get(fid).row(k))
    assert 60 <= s <= 64


def test_bad_group_size():
    with pytest.raises(ConfigError):
        tables_for(3)
    with pytest.raises(ConfigError):
        approximate_table(tables_for(4).fc, 2)


def test_csv_dump():
    text = PRECISE.fc.to_csv()
    assert text.splitlines()[0] == "k,c0,c1,c2,c3"
    assert text.splitlines()[1] == "0,0,64,0,0"
    assert len(text.splitlines()) == 33


def test_full_collapse_column_two():
    # fC column 2 sums to 1088
    assert sum(PRECISE.fc.column(2)) == 1088
    assert set(tables_for(32).fc.column(2)) == {1088 // 32}


@pytest.mark.parametrize("n", GROUP_SIZES)
def test_reaveraging_is_idempotent(n):
    from vvc_mcm.tables import CoefficientTable
    t = tables_for(n).fc
    as_precise = CoefficientTable("fC", t.rows)
    assert approximate_table(as_precise, n).rows == t.rows


def test_all_zero_column_demand():
    from vvc_mcm.tables import CoefficientTable, TableSet
    rows = tuple((16, 48, 0, 0) for _ in range(ROWS))
    d = tap_demands(TableSet(CoefficientTable("fC", rows), CoefficientTable("fG", rows)))
    assert d[3].coefficients == () and d[3].zero_dropped
