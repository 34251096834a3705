import pytest
from hypothesis import given, settings, strategies as st

from vvc_mcm.errors import CoverageError, InvariantViolation
from vvc_mcm.mcm import (BYPASS, MCM, SHIFT_ONLY, AdderGraph, AdderNode, cost, csd_adders,
                         csd_digits, evaluate, fuse_parallel, normalize, synthesize,
                         synthesize_demand)
from vvc_mcm.tables import GROUP_SIZES, TapDemand, tables_for, tap_demands

LIMIT = 1 << 12


def a_op(u, v, bound=LIMIT):
    """Odd positive results of (u << i) +- (v << j), one shift zero."""
    out = set()
    for s in range(13):
        for x, y in ((u << s, v), (u, v << s)):
            for r in (x + y, abs(x - y)):
                if r and r % 2 and r < bound:
                    out.add(r)
    return out


def min_adders(target, depth_cap=3):
    """Exhaustive search for the fewest adders realising ``target``."""
    frontier = [frozenset({1})]
    for steps in range(1, depth_cap + 1):
        nxt = set()
        for s in frontier:
            for u in s:
                for v in s:
                    for r in a_op(u, v):
                        if r == target:
                            return steps
                        nxt.add(s | {r})
        frontier = nxt
    return None


def test_normalize_examples():
    ns = normalize([-6, 64, 51, 0, 1, -1, 2, 16])
    by = ns.by_original()
    assert ns.zero
    assert (by[-6].fundamental, by[-6].shift, by[-6].negate, by[-6].kind) == (3, 1, True, MCM)
    assert (by[64].fundamental, by[64].shift, by[64].kind) == (1, 6, SHIFT_ONLY)
    assert by[1].kind == BYPASS and by[-1].kind == BYPASS and by[-1].negate
    assert ns.fundamentals == (3, 51)


@given(st.integers(-4096, 4096).filter(bool))
def test_normalize_reconstructs(c):
    item = normalize([c]).items[0]
    assert item.fundamental % 2 == 1
    assert item.apply(item.fundamental) == c


def test_single_constants():
    assert synthesize([3]).adder_count == 1
    assert synthesize([1]).adder_count == 0
    assert synthesize([]).adder_count == 0


def test_fifty_one_needs_two():
    assert min_adders(51) == 2
    assert synthesize([51]).adder_count == 2
    assert synthesize([51], "csd").adder_count == 3
    assert csd_adders(51) == 3


def test_csd_digits():
    # 51 = 64 - 16 + 4 - 1
    assert sorted(csd_digits(51)) == sorted([(6, 1), (4, -1), (2, 1), (0, -1)])
    for c in range(1, 2000, 2):
        d = csd_digits(c)
        assert sum(s << p for p, s in d) == c
        ps = sorted(p for p, _ in d)
        assert all(b - a >= 2 for a, b in zip(ps, ps[1:]))


def test_products_at_full_scale():
    g, norm = synthesize_demand([16, 51, 19, 27])
    p = evaluate(g, norm, 1023)
    assert (p[51], p[19], p[27], p[16]) == (52173, 19437, 27621, 16368)


def all_demands():
    for n in GROUP_SIZES:
        for d in tap_demands(tables_for(n)):
            yield n, d


@pytest.mark.parametrize("heuristic", ["hcub", "csd"])
def test_demands_exact(heuristic):
    for _n, d in all_demands():
        g, norm = synthesize_demand(d, heuristic)
        g.validate()
        for x in range(1024):
            assert evaluate(g, norm, x) == {c: c * x for c in d.coefficients}


def test_hcub_not_worse():
    for _n, d in all_demands():
        f = normalize(d.coefficients).fundamentals
        assert synthesize(f).adder_count <= synthesize(f, "csd").adder_count


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(1, 1023).map(lambda v: v | 1), min_size=1, max_size=8))
def test_random_sets(funds):
    g = synthesize(funds)
    g.validate()
    assert set(g.output_map) == set(funds)
    assert g.adder_count <= synthesize(funds, "csd").adder_count
    # every fundamental needs its own node unless it is 1
    assert g.adder_count >= len(funds - {1})
    for x in (1, 7, 1023):
        vals = g.values(x)
        for f, nid in g.outputs:
            assert vals[nid] == f * x


def test_even_fundamental_rejected():
    with pytest.raises(ValueError):
        synthesize([6])
    with pytest.raises(ValueError):
        synthesize([3], "magic")


def test_evaluate_missing_output():
    norm = normalize([3, 5])
    with pytest.raises(CoverageError):
        evaluate(synthesize([3]), norm, 1)


def test_cost_examples():
    c = cost(synthesize([3]), 10, 6)
    assert (c.adder_count, c.depth, c.gate_estimate) == (1, 1, 78)
    c = cost(synthesize([51]))
    assert (c.adder_count, c.depth) == (2, 2)
    assert cost(synthesize([51]), kappa=0).gate_estimate == 0
    with pytest.raises(ValueError):
        cost(synthesize([3]), kappa=-1)


def test_validate_catches_bad_annotation():
    bad = AdderGraph((AdderNode(1, 0, 1, 0, 0, False, 5),), ((5, 1),), "x")
    with pytest.raises(InvariantViolation):
        bad.validate()
    fwd = AdderGraph((AdderNode(1, 1, 1, 0, 0, False, 3),), (), "x")
    with pytest.raises(InvariantViolation):
        fwd.validate()


def test_dump_listing():
    g = synthesize([3])
    assert g.dump() == "0 input - - - 1\n1 0,0 1,0 + 3\nout 3 1\n"


def test_fuse_parallel():
    a = TapDemand(0, (3, 5), bypass_ones=True)
    b = TapDemand(1, (5, 7), zero_dropped=True)
    f = fuse_parallel([a, b])
    assert f == TapDemand(-1, (3, 5, 7), True, True)
    assert fuse_parallel([a, a]).tap == 0
    with pytest.raises(ValueError):
        fuse_parallel([])


def test_fused_block_cheaper_than_replication():
    for n in GROUP_SIZES:
        d = tap_demands(tables_for(n))
        fused = synthesize(normalize(fuse_parallel(d).coefficients).fundamentals).adder_count
        separate = sum(synthesize(normalize(x.coefficients).fundamentals).adder_count for x in d)
        assert fused <= separate
