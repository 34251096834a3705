"""Multiplierless multiple-constant multiplication (MCM) adder graphs.

A graph computes odd positive multiples ("fundamentals") of one input ``x``
with nodes ``(a << sa) +/- (b << sb)``.  Signs and trailing powers of two of
the requested coefficients stay outside the graph: they are applied as output
wiring (shift) and at the consuming adder (negation).

Two builders are provided: ``csd`` recodes every constant on its own into
canonical signed digits, ``hcub`` grows a shared set of fundamentals with a
distance-driven successor search in the style of the Hcub heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import CoverageError, InvariantViolation
from .tables import TapDemand

MCM = "mcm"
BYPASS = "bypass"
SHIFT_ONLY = "shift"


@dataclass(frozen=True)
class NormalizedCoefficient:
    original: int
    fundamental: int
    shift: int
    negate: bool
    kind: str

    def apply(self, value: int) -> int:
        """Product ``original * x`` given ``value = fundamental * x``."""
        v = value << self.shift
        return -v if self.negate else v


@dataclass(frozen=True)
class NormalizedSet:
    items: tuple[NormalizedCoefficient, ...]
    zero: bool = False

    @property
    def fundamentals(self) -> tuple[int, ...]:
        """Odd fundamentals that need adders (kind ``mcm``), ascending."""
        return tuple(sorted({c.fundamental for c in self.items if c.kind == MCM}))

    def by_original(self) -> dict[int, NormalizedCoefficient]:
        return {c.original: c for c in self.items}

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)


def _split(c: int) -> tuple[int, int]:
    m = abs(c)
    shift = (m & -m).bit_length() - 1
    return m >> shift, shift


def normalize(coefficients: Iterable[int]) -> NormalizedSet:
    items = []
    zero = False
    for c in sorted(set(int(c) for c in coefficients)):
        if c == 0:
            zero = True
            continue
        fund, shift = _split(c)
        if fund == 1:
            kind = BYPASS if shift == 0 else SHIFT_ONLY
        else:
            kind = MCM
        items.append(NormalizedCoefficient(c, fund, shift, c < 0, kind))
    return NormalizedSet(tuple(items), zero)


@dataclass(frozen=True)
class AdderNode:
    id: int
    a: int
    a_shift: int
    b: int
    b_shift: int
    subtract: bool
    constant: int

    def expr(self) -> str:
        op = "-" if self.subtract else "+"
        return f"(n{self.a} << {self.a_shift}) {op} (n{self.b} << {self.b_shift})"


@dataclass(frozen=True)
class AdderGraph:
    """Node 0 is the input (constant 1); ``nodes`` holds the adders in
    topological order with ids 1..N."""

    nodes: tuple[AdderNode, ...] = ()
    outputs: tuple[tuple[int, int], ...] = ()
    heuristic: str = ""

    @property
    def output_map(self) -> dict[int, int]:
        return dict(self.outputs)

    @property
    def adder_count(self) -> int:
        return len(self.nodes)

    def constant(self, node_id: int) -> int:
        return 1 if node_id == 0 else self.nodes[node_id - 1].constant

    def node_depths(self) -> list[int]:
        depth = [0]
        for n in self.nodes:
            depth.append(1 + max(depth[n.a], depth[n.b]))
        return depth

    @property
    def depth(self) -> int:
        return max(self.node_depths())

    def values(self, x: int) -> list[int]:
        vals = [x]
        for n in self.nodes:
            a = vals[n.a] << n.a_shift
            b = vals[n.b] << n.b_shift
            vals.append(a - b if n.subtract else a + b)
        return vals

    def validate(self, require_odd: bool = True) -> None:
        consts = [1]
        for i, n in enumerate(self.nodes, start=1):
            if n.id != i:
                raise InvariantViolation(f"node {n.id} stored at position {i}")
            if not (0 <= n.a < i and 0 <= n.b < i):
                raise InvariantViolation(f"node {i} references a later node")
            a = consts[n.a] << n.a_shift
            b = consts[n.b] << n.b_shift
            v = a - b if n.subtract else a + b
            if v != n.constant:
                raise InvariantViolation(f"node {i} annotated {n.constant} but computes {v}")
            if require_odd and (v <= 0 or v % 2 == 0):
                raise InvariantViolation(f"node {i} constant {v} is not odd positive")
            consts.append(v)
        for fund, nid in self.outputs:
            if not 0 <= nid <= len(self.nodes):
                raise InvariantViolation(f"output {fund} points at missing node {nid}")
            if consts[nid] != fund:
                raise InvariantViolation(f"output {fund} wired to node computing {consts[nid]}")

    def dump(self) -> str:
        lines = ["0 input - - - 1"]
        for n in self.nodes:
            sign = "-" if n.subtract else "+"
            lines.append(f"{n.id} {n.a},{n.b} {n.a_shift},{n.b_shift} {sign} {n.constant}")
        for fund, nid in self.outputs:
            lines.append(f"out {fund} {nid}")
        return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self):
        self.nodes: list[AdderNode] = []
        self.by_const: dict[int, int] = {1: 0}

    def add(self, a, sa, b, sb, subtract, dedupe=True) -> int:
        ca = 1 if a == 0 else self.nodes[a - 1].constant
        cb = 1 if b == 0 else self.nodes[b - 1].constant
        c = (ca << sa) - (cb << sb) if subtract else (ca << sa) + (cb << sb)
        if dedupe and c in self.by_const:
            return self.by_const[c]
        nid = len(self.nodes) + 1
        self.nodes.append(AdderNode(nid, a, sa, b, sb, subtract, c))
        self.by_const.setdefault(c, nid)
        return nid

    def graph(self, outputs: Mapping[int, int], heuristic: str) -> AdderGraph:
        return AdderGraph(tuple(self.nodes), tuple(sorted(outputs.items())), heuristic)


def csd_digits(c: int) -> list[tuple[int, int]]:
    """Canonical signed-digit recoding as (position, +-1) pairs, LSB first."""
    digits = []
    pos = 0
    while c:
        if c & 1:
            d = 2 - (c & 3)
            digits.append((pos, d))
            c -= d
        c >>= 1
        pos += 1
    return digits


def csd_adders(c: int) -> int:
    return max(len(csd_digits(c)) - 1, 0)


def _synth_csd(fundamentals: Sequence[int]) -> AdderGraph:
    b = _Builder()
    outputs = {}
    for c in fundamentals:
        digits = csd_digits(c)
        if digits[0] != (0, 1) and digits[0] != (0, -1):
            raise ValueError(f"fundamental must be odd: {c}")
        signed = digits[0][1]
        node = 0
        for pos, d in digits[1:]:
            same = (signed > 0) == (d > 0)
            node = b.add(0, pos, node, 0, not same, dedupe=False)
            signed += d << pos
        outputs[c] = node
    return b.graph(outputs, "csd")


# --- Hcub-style search -----------------------------------------------------

@lru_cache(maxsize=None)
def _pair_masks(bound: int) -> tuple[tuple[int, ...], ...]:
    """masks[u][v]: bitmask of odd values in (0, bound] one adder away from u, v."""
    odd = range(1, bound + 1, 2)
    max_shift = bound.bit_length() + 1
    masks = [[0] * (bound + 1) for _ in range(bound + 1)]
    for u in odd:
        for v in odd:
            m = 0
            for s in range(1, max_shift + 1):
                us = u << s
                vs = v << s
                for w in (us + v, us - v, v - us, vs + u, vs - u, u - vs):
                    if 0 < w <= bound:
                        m |= 1 << w
            masks[u][v] = m
    return tuple(tuple(r) for r in masks)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _derive(u: int, v: int, target: int, bound: int):
    """Shifts/op realising ``target`` from constants ``u`` and ``v``."""
    max_shift = bound.bit_length() + 1
    for s in range(1, max_shift + 1):
        for (p, q) in ((u, v), (v, u)):
            ps = p << s
            if ps + q == target:
                return p, s, q, 0, False
            if ps - q == target:
                return p, s, q, 0, True
            if q - ps == target:
                return q, 0, p, s, True
    raise InvariantViolation(f"no derivation of {target} from {u}, {v}")


def _synth_hcub(fundamentals: Sequence[int]) -> AdderGraph:
    targets = set(fundamentals) - {1}
    if not targets:
        return AdderGraph((), tuple((f, 0) for f in fundamentals if f == 1), "hcub")
    bound = 1 << (max(targets).bit_length() + 1)
    masks = _pair_masks(bound)
    b = _Builder()
    ready = [1]
    rmask = 1 << 1
    depth = {1: 0}

    def succ_of(s, rs):
        m = masks[s][s]
        row = masks[s]
        for r in rs:
            m |= row[r]
        return m

    def insert(val):
        nonlocal rmask
        best = None
        for u in ready:
            for v in ready:
                if v < u:
                    continue
                if masks[u][v] >> val & 1:
                    key = (max(depth[u], depth[v]), u, v)
                    if best is None or key < best:
                        best = key
        _, u, v = best
        p, sp, q, sq, sub = _derive(u, v, val, bound)
        nid = b.add(b.by_const[p], sp, b.by_const[q], sq, sub)
        depth[val] = 1 + max(depth[u], depth[v])
        ready.append(val)
        rmask |= 1 << val
        return nid

    while targets:
        reach = 0
        for u in ready:
            row = masks[u]
            for v in ready:
                reach |= row[v]
        reach &= ~rmask
        hits = sorted(t for t in targets if reach >> t & 1)
        if hits:
            for t in hits:
                insert(t)
                targets.discard(t)
            continue

        succs = _bits(reach)
        # successor sets of every candidate with respect to the current ready set
        succ_r = {s: succ_of(s, ready) for s in succs}
        dist2 = 0
        for s in succs:
            dist2 |= succ_r[s]

        def dist(t, reach_m, d2_m):
            if reach_m >> t & 1:
                return 1
            if d2_m >> t & 1:
                return 2
            return 3

        old = {t: dist(t, reach, dist2) for t in targets}
        best_s, best_benefit = None, 0.0
        for s in succs:
            reach_new = reach | succ_r[s]
            reach_new &= ~((rmask | (1 << s)))
            d2_new = 0
            for s2 in _bits(reach_new):
                prev = succ_r.get(s2)
                if prev is None:
                    prev = succ_of(s2, ready)
                d2_new |= prev | masks[s2][s]
            benefit = 0.0
            for t in targets:
                dn = 0 if t == s else dist(t, reach_new, d2_new)
                if dn < old[t]:
                    benefit += 10.0 ** (-dn) * (old[t] - dn)
            if benefit > best_benefit:
                best_s, best_benefit = s, benefit
        if best_s is None:
            # no candidate brings any target within estimated reach: step along
            # the CSD chain of the smallest remaining target
            t = min(targets)
            digits = csd_digits(t)
            signed = digits[0][1]
            for pos, d in digits[1:-1]:
                signed += d << pos
                if abs(signed) not in depth:
                    best_s = abs(signed)
                    break
        insert(best_s)
    outputs = {f: b.by_const[f] for f in fundamentals}
    return b.graph(outputs, "hcub")


def synthesize(fundamentals: Iterable[int], heuristic: str = "hcub") -> AdderGraph:
    """Adder graph producing every odd fundamental in ``fundamentals``.

    ``hcub`` never returns a graph with more adders than ``csd`` for the same
    input: the CSD graph is kept when the search result is larger.
    """
    funds = sorted(set(int(f) for f in fundamentals))
    for f in funds:
        if f < 1 or f % 2 == 0:
            raise ValueError(f"fundamentals must be odd and positive: {f}")
    if not funds:
        return AdderGraph((), (), heuristic)
    if heuristic == "csd":
        return _synth_csd(funds)
    if heuristic != "hcub":
        raise ValueError(f"unknown heuristic {heuristic!r}")
    g = _synth_hcub(funds)
    base = _synth_csd(funds)
    if base.adder_count < g.adder_count:
        return AdderGraph(base.nodes, base.outputs, "hcub")
    return g


def synthesize_demand(demand: TapDemand | Iterable[int], heuristic: str = "hcub"):
    """Normalize a coefficient demand and synthesize its graph."""
    coeffs = demand.coefficients if isinstance(demand, TapDemand) else demand
    norm = normalize(coeffs)
    return synthesize(norm.fundamentals, heuristic), norm


def evaluate(graph: AdderGraph, normalized: NormalizedSet, x: int) -> dict[int, int]:
    outs = graph.output_map
    vals = graph.values(x)
    products = {}
    for c in normalized:
        if c.kind == MCM:
            if c.fundamental not in outs:
                raise CoverageError(f"graph has no output for fundamental {c.fundamental}")
            products[c.original] = c.apply(vals[outs[c.fundamental]])
        else:
            products[c.original] = c.apply(x)
    return products


@dataclass(frozen=True)
class CostReport:
    adder_count: int
    depth: int
    gate_estimate: float
    per_output: dict = field(default_factory=dict)


def node_width(constant: int, input_width: int) -> int:
    return input_width + math.ceil(math.log2(constant)) + 1


def cost(graph: AdderGraph, input_width: int = 10, kappa: float = 6) -> CostReport:
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    depths = graph.node_depths()
    gates = sum(kappa * node_width(n.constant, input_width) for n in graph.nodes)
    per_output = {}
    for fund, nid in graph.outputs:
        cone = set()
        stack = [nid]
        while stack:
            i = stack.pop()
            if i == 0 or i in cone:
                continue
            cone.add(i)
            n = graph.nodes[i - 1]
            stack.extend((n.a, n.b))
        per_output[fund] = {"node": nid, "depth": depths[nid], "cone_adders": len(cone)}
    return CostReport(graph.adder_count, max(depths), gates, per_output)


def fuse_parallel(demands: Sequence[TapDemand]) -> TapDemand:
    """One demand covering every coefficient of ``demands`` exactly once."""
    if not demands:
        raise ValueError("fuse_parallel needs at least one demand")
    taps = {d.tap for d in demands}
    coeffs = sorted(set().union(*(d.coefficients for d in demands)))
    return TapDemand(
        taps.pop() if len(taps) == 1 else -1,
        tuple(coeffs),
        bypass_ones=any(d.bypass_ones for d in demands),
        zero_dropped=any(d.zero_dropped for d in demands),
    )
