"""Verilog-2001 generation for MCM blocks and prediction units.

Every emitted module is purely combinational (continuous assignments and
instances only).  Control of a unit is ``{fsel, k}``: ``fsel`` = 0 selects
fC, 1 selects fG, ``k`` is the 5-bit phase.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ConfigError, HdlParseError
from ..mcm import (BYPASS, MCM, SHIFT_ONLY, AdderGraph, AdderNode, NormalizedSet,
                   fuse_parallel, normalize, synthesize)
from ..predictor import PRODUCT_EXTRA_BITS, SUM_EXTRA_BITS
from ..tables import FILTER_IDS, ROWS, TAPS, TableSet, tables_for, tap_demands
from .verilog import parse_verilog

IMPLEMENTATIONS = ("mcm_n32", "mcm_n16", "mcm_n8", "mcm_n4", "mcm_n2", "mcm_precise", "mult")
PARALLEL_SAMPLES = (1, 4, 8, 16, 32, 64)
# signed width of a ROM word: coefficients span [-6, 64]
COEF_WIDTH = 8


@dataclass(frozen=True)
class EmitConfig:
    architecture: str = "mcm"          # "mcm" | "mult"
    n: int = 1
    input_width: int = 10
    prefix: str = "vvc"
    parallel_samples: int = 1
    heuristic: str = "hcub"

    def __post_init__(self):
        if self.architecture not in ("mcm", "mult"):
            raise ConfigError(f"unknown architecture {self.architecture!r}")
        if self.parallel_samples not in PARALLEL_SAMPLES and self.parallel_samples != 2:
            raise ConfigError(f"parallel_samples must be one of {PARALLEL_SAMPLES}")
        if self.architecture == "mult" and self.n != 1:
            raise ConfigError("the multiplier baseline is precise (n = 1)")
        if not re.fullmatch(r"[A-Za-z_]\w*", self.prefix):
            raise ConfigError(f"invalid module prefix {self.prefix!r}")

    @classmethod
    def for_implementation(cls, name: str, **kw) -> "EmitConfig":
        if name == "mult":
            return cls(architecture="mult", n=1, **kw)
        if name == "mcm_precise":
            return cls(architecture="mcm", n=1, **kw)
        m = re.fullmatch(r"mcm_n(\d+)", name)
        if m is None or name not in IMPLEMENTATIONS:
            raise ConfigError(f"unknown implementation {name!r}; expected one of {IMPLEMENTATIONS}")
        return cls(architecture="mcm", n=int(m.group(1)), **kw)

    @property
    def implementation(self) -> str:
        if self.architecture == "mult":
            return "mult"
        return "mcm_precise" if self.n == 1 else f"mcm_n{self.n}"

    @property
    def product_width(self) -> int:
        return self.input_width + PRODUCT_EXTRA_BITS

    @property
    def sum_width(self) -> int:
        return self.input_width + SUM_EXTRA_BITS

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class Source:
    kind: str                # "mcm" | "bypass" | "zero" | "shift"
    coefficient: int
    index: int = -1          # position among the tap block's MCM outputs
    shift: int = 0
    negate: bool = False


@dataclass(frozen=True)
class SelectionTable:
    entries: dict = field(default_factory=dict)      # (filter, k, tap) -> Source
    mcm_outputs: tuple = ()                          # per tap: MCM-kind coefficients

    def source(self, filter_id: str, k: int, tap: int) -> Source:
        return self.entries[(filter_id, k, tap)]


def port_name(c: int) -> str:
    return f"p{c}" if c >= 0 else f"m{-c}"


def _port_coefficient(name: str) -> int:
    m = re.fullmatch(r"([pm])(\d+)", name)
    if m is None:
        raise ValueError(f"not a coefficient port: {name}")
    v = int(m.group(2))
    return v if m.group(1) == "p" else -v


def _source_for(c: int, mcm_list) -> Source:
    if c == 0:
        return Source("zero", 0)
    norm = normalize([c]).items[0]
    if norm.kind == BYPASS:
        return Source("bypass", c, negate=norm.negate)
    if norm.kind == SHIFT_ONLY:
        return Source("shift", c, shift=norm.shift, negate=norm.negate)
    return Source("mcm", c, index=mcm_list.index(c), shift=norm.shift, negate=norm.negate)


def build_selection_table(tables: TableSet) -> SelectionTable:
    demands = tap_demands(tables)
    mcm_outputs = []
    for d in demands:
        mcm_outputs.append(tuple(c.original for c in normalize(d.coefficients) if c.kind == MCM))
    entries = {}
    for table in tables:
        for k, row in enumerate(table.rows):
            for tap, c in enumerate(row):
                entries[(table.id, k, tap)] = _source_for(c, mcm_outputs[tap])
    return SelectionTable(entries, tuple(mcm_outputs))


# --- MCM block ---------------------------------------------------------------

def _node_width(graph: AdderGraph, nid: int, input_width: int) -> int:
    c = graph.constant(nid)
    return input_width + 1 if c == 1 else input_width + math.ceil(math.log2(c)) + 1


def _shifted(name: str, s: int) -> str:
    return name if s == 0 else f"({name} <<< {s})"


def emit_mcm_module(graph: AdderGraph, normalized: NormalizedSet, config: EmitConfig,
                    name: str | None = None) -> str:
    """Combinational block computing ``c * x`` for every coefficient in ``normalized``.

    Shift-only coefficients are exposed as plain wiring; negative
    coefficients are negated at their output port only.
    """
    name = name or f"{config.prefix}_mcm"
    w = config.input_width
    pw = config.product_width
    outs = graph.output_map
    items = [c for c in normalized if c.kind != BYPASS]
    lines = [f"// {name}: {graph.adder_count} adders, "
             f"coefficients {', '.join(str(c.original) for c in items) or 'none'}",
             f"module {name} ("]
    ports = [f"    input  [{w - 1}:0] x"]
    ports += [f"    output signed [{pw - 1}:0] {port_name(c.original)}" for c in items]
    lines.append(",\n".join(ports))
    lines.append(");")
    lines.append(f"    wire signed [{w}:0] n0;")
    lines.append("    assign n0 = $signed({1'b0, x});")
    for n in graph.nodes:
        lines.append(f"    wire signed [{_node_width(graph, n.id, w) - 1}:0] n{n.id};")
    for n in graph.nodes:
        op = "-" if n.subtract else "+"
        lines.append(f"    assign n{n.id} = {_shifted(f'n{n.a}', n.a_shift)} {op} "
                     f"{_shifted(f'n{n.b}', n.b_shift)};  // {n.constant}")
    for c in items:
        nid = outs[c.fundamental] if c.kind == MCM else 0
        e = _shifted(f"n{nid}", c.shift)
        if c.negate:
            e = f"-{e}" if e.startswith("(") else f"-({e})"
        lines.append(f"    assign {port_name(c.original)} = {e};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def _operand(e, line):
    """(signal, shift) from ``nX`` or ``nX <<< s``."""
    if e[0] == "id":
        return e[1], 0
    if e[0] == "bin" and e[1] in ("<<<", "<<") and e[2][0] == "id" and e[3][0] == "num":
        return e[2][1], e[3][1]
    raise HdlParseError("expected node operand 'nX' or 'nX <<< s'", line)


def mcm_module_coefficients(text: str) -> tuple[int, ...]:
    """Coefficients named by the output ports of an emitted MCM block."""
    mod = next(iter(parse_verilog(text).values()))
    return tuple(_port_coefficient(p) for p in mod.outputs)


def parse_mcm_module(text: str) -> AdderGraph:
    """Recover the adder graph of a block written by :func:`emit_mcm_module`.

    Node constants are recomputed from the structure, not taken from
    comments or names.  Output ports are mapped to the fundamental their
    name claims, so a corrupted node shows up as an evaluation mismatch.
    """
    design = parse_verilog(text)
    if len(design) != 1:
        raise HdlParseError(f"expected exactly one module, found {len(design)}")
    mod = next(iter(design.values()))
    if mod.inputs != ["x"]:
        raise HdlParseError(f"MCM block must have the single input 'x', has {mod.inputs}")
    if mod.assigns.get("n0") is None:
        raise HdlParseError("missing input node n0")
    node_names = sorted((s for s in mod.signals if re.fullmatch(r"n\d+", s) and s != "n0"),
                        key=lambda s: mod.assign_lines.get(s, 0))
    ids = {"n0": 0}
    consts = [1]
    nodes = []
    for s in node_names:
        line = mod.assign_lines.get(s)
        e = mod.assigns.get(s)
        if e is None:
            raise HdlParseError(f"node {s} is never assigned")
        if e[0] != "bin" or e[1] not in ("+", "-"):
            raise HdlParseError(f"node {s} must be a sum or difference", line)
        (a, sa), (b, sb) = _operand(e[2], line), _operand(e[3], line)
        for op in (a, b):
            if op not in ids:
                raise HdlParseError(f"node {s} uses {op} before it is defined", line)
        sub = e[1] == "-"
        ca, cb = consts[ids[a]] << sa, consts[ids[b]] << sb
        c = ca - cb if sub else ca + cb
        nid = len(nodes) + 1
        ids[s] = nid
        consts.append(c)
        nodes.append(AdderNode(nid, ids[a], sa, ids[b], sb, sub, c))
    outputs = {}
    for p in mod.outputs:
        coeff = _port_coefficient(p)
        e = mod.assigns.get(p)
        line = mod.assign_lines.get(p)
        if e is None:
            raise HdlParseError(f"output {p} is never assigned")
        if e[0] == "un" and e[1] == "-":
            e = e[2]
        sig, _ = _operand(e, line)
        if sig not in ids:
            raise HdlParseError(f"output {p} driven by unknown node {sig}", line)
        norm = normalize([coeff]).items[0]
        if norm.kind == MCM:
            outputs[norm.fundamental] = ids[sig]
    return AdderGraph(tuple(nodes), tuple(sorted(outputs.items())), "parsed")


# --- prediction units --------------------------------------------------------

def _mcm_blocks(tables: TableSet, config: EmitConfig):
    blocks = []
    for d in tap_demands(tables):
        norm = normalize(d.coefficients)
        graph = synthesize(norm.fundamentals, config.heuristic)
        blocks.append((d, norm, graph))
    return blocks


def _sel_literal(filter_id: str, k: int) -> str:
    return f"6'd{(FILTER_IDS.index(filter_id) << 5) | k}"


def _source_expr(src: Source, ref: str, mcm_wire, pw: int) -> str:
    if src.kind == "zero":
        return f"{pw}'sd0"
    if src.kind == "mcm":
        return mcm_wire(src.coefficient)
    e = _shifted(ref, src.shift)
    if src.negate:
        e = f"-{e}" if e.startswith("(") else f"-({e})"
    return e


def _mux(target: str, table: SelectionTable, tap: int, ref: str, mcm_wire, pw: int) -> list[str]:
    entries = [(f, k) for f in FILTER_IDS for k in range(ROWS)]
    exprs = [_source_expr(table.source(f, k, tap), ref, mcm_wire, pw) for f, k in entries]
    lines = [f"    assign {target} ="]
    for (f, k), e in zip(entries[:-1], exprs[:-1]):
        lines.append(f"        (sel == {_sel_literal(f, k)}) ? {e} :")
    lines.append(f"        {exprs[-1]};")
    return lines


def _round_clip(lines, terms, out, sw, w):
    lines.append(f"    assign {out}_acc = {' + '.join(terms)} + {sw}'sd32;")
    lines.append(f"    assign {out}_sh = {out}_acc >>> 6;")
    lines.append(f"    assign {out} = ({out}_sh < 0) ? {w}'d0 : "
                 f"({out}_sh > {sw}'sd{(1 << w) - 1}) ? {w}'d{(1 << w) - 1} : {out}_sh;")


def emit_predictor_unit(config: EmitConfig, tables: TableSet | None = None,
                        include_blocks: bool = True) -> str:
    """Single-sample unit: architecture (a) for ``mcm``, (b) for ``mult``.

    With ``include_blocks`` the text also carries the four MCM blocks, so it
    can be parsed and simulated on its own.
    """
    tables = tables or tables_for(config.n)
    if tables.approx_n != config.n:
        raise ConfigError(f"tables approximated with n={tables.approx_n}, config says n={config.n}")
    w, pw, sw = config.input_width, config.product_width, config.sum_width
    name = f"{config.prefix}_unit"
    sel_table = build_selection_table(tables)
    parts = []
    lines = [f"// {name}: {config.implementation}, control = {{fsel, k}}",
             f"module {name} (",
             ",\n".join([f"    input  [{w - 1}:0] r{i}" for i in range(TAPS)]
                        + ["    input  fsel", "    input  [4:0] k", f"    output [{w - 1}:0] pred"]),
             ");",
             "    wire [5:0] sel;",
             "    assign sel = {fsel, k};"]
    for t in range(TAPS):
        lines.append(f"    wire signed [{w}:0] s{t};")
        lines.append(f"    assign s{t} = $signed({{1'b0, r{t}}});")
        lines.append(f"    wire signed [{pw - 1}:0] t{t};")
    if config.architecture == "mcm":
        for (d, norm, graph) in _mcm_blocks(tables, config):
            t = d.tap
            mname = f"{config.prefix}_mcm{t}"
            if include_blocks:
                parts.append(emit_mcm_module(graph, norm, config, mname))
            used = sel_table.mcm_outputs[t]
            for c in used:
                lines.append(f"    wire signed [{pw - 1}:0] t{t}_{port_name(c)};")
            conns = [f".x(r{t})"] + [f".{port_name(c)}(t{t}_{port_name(c)})" for c in used]
            lines.append(f"    {mname} u_mcm{t} ({', '.join(conns)});")
            lines += _mux(f"t{t}", sel_table, t, f"s{t}",
                          lambda c, t=t: f"t{t}_{port_name(c)}", pw)
    else:
        for t in range(TAPS):
            lines.append(f"    wire signed [{COEF_WIDTH - 1}:0] c{t};")
            entries = [(f, k) for f in FILTER_IDS for k in range(ROWS)]
            rom = [tables.get(f).rows[k][t] for f, k in entries]
            lines.append(f"    assign c{t} =  // ROM column {t}")
            for (f, k), v in zip(entries[:-1], rom[:-1]):
                lines.append(f"        (sel == {_sel_literal(f, k)}) ? {_slit(v, COEF_WIDTH)} :")
            lines.append(f"        {_slit(rom[-1], COEF_WIDTH)};")
            lines.append(f"    assign t{t} = s{t} * c{t};")
    lines.append(f"    wire signed [{sw - 1}:0] pred_acc;")
    lines.append(f"    wire signed [{sw - 1}:0] pred_sh;")
    _round_clip(lines, [f"t{t}" for t in range(TAPS)], "pred", sw, w)
    lines.append("endmodule")
    parts.append("\n".join(lines) + "\n")
    return "\n".join(parts)


def _slit(v: int, width: int) -> str:
    return f"{width}'sd{v}" if v >= 0 else f"-{width}'sd{-v}"


@dataclass(frozen=True)
class LaneWindow:
    """Lane ``x`` filters references ``r[offset_x] .. r[offset_x + 3]``.

    The default places the lanes on consecutive samples of one row, which
    share (filter, k) in every angular mode.
    """

    offsets: tuple[int, ...]

    @classmethod
    def row(cls, lanes: int) -> "LaneWindow":
        return cls(tuple(range(lanes)))

    @property
    def lanes(self) -> int:
        return len(self.offsets)

    @property
    def ref_count(self) -> int:
        return max(self.offsets) + TAPS

    def taps_of_ref(self, j: int) -> tuple[int, ...]:
        return tuple(sorted({j - o for o in self.offsets if 0 <= j - o < TAPS}))


def parallel_ref_demands(tables: TableSet, window: LaneWindow):
    """Fused coefficient demand of every reference input of a parallel unit."""
    per_tap = tap_demands(tables)
    out = []
    for j in range(window.ref_count):
        taps = window.taps_of_ref(j)
        out.append((taps, fuse_parallel([per_tap[t] for t in taps]) if taps else None))
    return out


def emit_parallel_unit(config: EmitConfig, tables: TableSet | None = None,
                       window: LaneWindow | None = None) -> str:
    """Multi-lane unit sharing one fused MCM block per reference input."""
    m = config.parallel_samples
    if m <= 1:
        raise ConfigError("parallel unit needs parallel_samples > 1")
    if config.architecture != "mcm":
        raise ConfigError("parallel units are emitted for MCM architectures only")
    tables = tables or tables_for(config.n)
    if tables.approx_n != config.n:
        raise ConfigError(f"tables approximated with n={tables.approx_n}, config says n={config.n}")
    window = window or LaneWindow.row(m)
    if window.lanes != m:
        raise ConfigError(f"window has {window.lanes} lanes, config asks for {m}")
    w, pw, sw = config.input_width, config.product_width, config.sum_width
    name = f"{config.prefix}_par{m}"
    sel_table = build_selection_table(tables)
    parts = []
    block_names = {}
    ref_blocks = []
    for j, (taps, demand) in enumerate(parallel_ref_demands(tables, window)):
        if demand is None:
            ref_blocks.append(None)
            continue
        key = demand.coefficients
        if key not in block_names:
            norm = normalize(key)
            graph = synthesize(norm.fundamentals, config.heuristic)
            bname = f"{name}_mcm{len(block_names)}"
            block_names[key] = bname
            parts.append(emit_mcm_module(graph, norm, config, bname))
        ref_blocks.append((block_names[key], taps))
    lines = [f"// {name}: {config.implementation}, {m} lanes, control = {{fsel, k}}",
             f"module {name} ("]
    ports = [f"    input  [{w - 1}:0] r{j}" for j in range(window.ref_count)]
    ports += ["    input  fsel", "    input  [4:0] k"]
    ports += [f"    output [{w - 1}:0] pred{x}" for x in range(m)]
    lines += [",\n".join(ports), ");", "    wire [5:0] sel;", "    assign sel = {fsel, k};"]
    for j, blk in enumerate(ref_blocks):
        lines.append(f"    wire signed [{w}:0] s{j};")
        lines.append(f"    assign s{j} = $signed({{1'b0, r{j}}});")
        if blk is None:
            continue
        bname, taps = blk
        used = sorted({c for t in taps for c in sel_table.mcm_outputs[t]})
        for c in used:
            lines.append(f"    wire signed [{pw - 1}:0] r{j}_{port_name(c)};")
        conns = [f".x(r{j})"] + [f".{port_name(c)}(r{j}_{port_name(c)})" for c in used]
        lines.append(f"    {bname} u_mcm_r{j} ({', '.join(conns)});")
    for x, off in enumerate(window.offsets):
        for t in range(TAPS):
            j = off + t
            lines.append(f"    wire signed [{pw - 1}:0] l{x}_t{t};")
            lines += _mux(f"l{x}_t{t}", sel_table, t, f"s{j}",
                          lambda c, j=j: f"r{j}_{port_name(c)}", pw)
        lines.append(f"    wire signed [{sw - 1}:0] pred{x}_acc;")
        lines.append(f"    wire signed [{sw - 1}:0] pred{x}_sh;")
        _round_clip(lines, [f"l{x}_t{t}" for t in range(TAPS)], f"pred{x}", sw, w)
    lines.append("endmodule")
    parts.append("\n".join(lines) + "\n")
    return "\n".join(parts)


def count_adders(text: str) -> int:
    """Adder nodes across all MCM blocks *instantiated* in ``text``."""
    design = parse_verilog(text)
    per_module = {name: sum(1 for s in mod.assigns if re.fullmatch(r"n\d+", s) and s != "n0")
                  for name, mod in design.items()}
    total = 0
    for mod in design.values():
        for inst in mod.instances:
            total += per_module.get(inst.module, 0)
    return total


def write_hdl(outdir, config: EmitConfig, tables: TableSet | None = None,
              window: LaneWindow | None = None) -> dict:
    """Write the config's HDL files plus ``manifest.json``; returns the manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tables = tables or tables_for(config.n)
    files = []
    if config.architecture == "mcm":
        for (d, norm, graph) in _mcm_blocks(tables, config):
            fname = f"{config.prefix}_mcm{d.tap}.v"
            (outdir / fname).write_text(emit_mcm_module(graph, norm, config, f"{config.prefix}_mcm{d.tap}"))
            files.append(fname)
    unit = emit_predictor_unit(config, tables, include_blocks=False)
    (outdir / f"{config.prefix}_unit.v").write_text(unit)
    files.append(f"{config.prefix}_unit.v")
    if config.parallel_samples > 1:
        par = emit_parallel_unit(config, tables, window)
        fname = f"{config.prefix}_par{config.parallel_samples}.v"
        (outdir / fname).write_text(par)
        files.append(fname)
    modules = {}
    for fname in files:
        for mname, mod in parse_verilog((outdir / fname).read_text()).items():
            modules.setdefault(mname, {
                "file": fname,
                "ports": {p: {"direction": mod.signals[p].direction,
                              "width": mod.signals[p].width,
                              "signed": mod.signals[p].signed} for p in mod.ports},
            })
    manifest = {
        "implementation": config.implementation,
        "config": asdict(config),
        "config_hash": config.digest(),
        "files": files,
        "modules": dict(sorted(modules.items())),
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
