"""Command-line front end: ``vvc-mcm <command> [options]``.

Exit codes: 0 success, 1 input/configuration error, 2 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .errors import ConfigError, CoverageError, InputError, InvalidModeError, InvariantViolation
from .geometry import ANGULAR_MODES, BlockSpec
from .hdl.emit import IMPLEMENTATIONS, EmitConfig, write_hdl
from .harness.evaluate import error_eval, mode_decision_divergence, mode_decisions
from .harness.report import EvalReport, report_text, report_write
from .harness.sources import read_pgm, sample_blocks, synthetic_image
from .harness.sweep import cost_sweep
from .harness.throughput import ThroughputQuery, throughput_model
from .mcm import cost, normalize, synthesize
from .predictor import PredictionConfig
from .tables import GROUP_SIZES, tables_for, tap_demands


class UsageError(Exception):
    pass


def int_list(text: str) -> list[int]:
    """``"2,4,8"``, ranges ``"2-66"``, or ``"-14:-1"`` for ranges with negatives."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi = part.split(":")
            out.extend(range(int(lo), int(hi) + 1))
        elif "-" in part[1:]:
            i = part.index("-", 1)
            out.extend(range(int(part[:i]), int(part[i + 1:]) + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list: {text!r}")
    return out


def block_size(text: str) -> BlockSpec:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    return BlockSpec(w, h)


def _filters(choice: str) -> list[str]:
    return {"fc": ["fC"], "fg": ["fG"], "both": ["fC", "fG"]}[choice]


def _emit(obj, args, text=None):
    out = text if text is not None else json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)


def cmd_tables(args):
    parts = []
    for n in args.n:
        tables = tables_for(n)
        for f in _filters(args.filter):
            t = tables.get(f)
            if args.format == "csv":
                parts.append(f"# {t.id} n={n}\n" + t.to_csv())
            else:
                parts.append(json.dumps({"filter": t.id, "n": n, "rows": t.rows}))
    _emit(None, args, "\n".join(parts) + ("" if args.format == "csv" else "\n"))


def cmd_demands(args):
    out = []
    for n in args.n:
        for d in tap_demands(tables_for(n)):
            out.append({"n": n, **asdict(d)})
    _emit(out, args)


def cmd_mcm(args):
    if args.coefficients:
        sets = [("custom", args.coefficients)]
    else:
        sets = [(f"n={n}/tap{d.tap}", d.coefficients) for n in args.n for d in tap_demands(tables_for(n))]
    out = []
    for label, coeffs in sets:
        norm = normalize(coeffs)
        g = synthesize(norm.fundamentals, args.heuristic)
        g.validate()
        c = cost(g, args.bit_depth, args.kappa)
        rec = {"demand": label, "coefficients": list(coeffs),
               "fundamentals": list(norm.fundamentals), "adders": c.adder_count,
               "depth": c.depth, "gate_estimate": c.gate_estimate}
        if args.dump:
            rec["graph"] = g.dump().splitlines()
        out.append(rec)
    _emit(out, args)


def cmd_emit(args):
    impls = args.impl or [("mcm_precise" if n == 1 else f"mcm_n{n}") for n in args.n]
    outdir = Path(args.out or "hdl_out")
    manifests = []
    for impl in impls:
        # parallel units exist for the MCM architectures only
        parallel = args.parallel[0] if args.parallel and impl != "mult" else 1
        cfg = EmitConfig.for_implementation(impl, input_width=args.bit_depth,
                                            prefix=f"{args.prefix}_{impl}", parallel_samples=parallel)
        manifests.append(write_hdl(outdir / impl, cfg))
    print(json.dumps([{"implementation": m["implementation"], "files": m["files"],
                       "config_hash": m["config_hash"]} for m in manifests], indent=2))


def _corpus(args):
    if args.image:
        image = read_pgm(args.image, args.bit_depth)
    else:
        image = synthetic_image(args.synthetic[0], args.synthetic[1], args.bit_depth, args.seed)
    return sample_blocks(image, args.block, args.blocks, args.seed)


def cmd_eval(args):
    blocks = _corpus(args)
    report = EvalReport(seed=args.seed, config={
        "bit_depth": args.bit_depth, "block": f"{args.block.width}x{args.block.height}",
        "blocks": len(blocks), "modes": args.modes, "n": args.n,
        "source": str(args.image) if args.image else f"synthetic {args.synthetic[0]}x{args.synthetic[1]}",
    })
    for f in _filters(args.filter):
        cfg = PredictionConfig(bit_depth=args.bit_depth, filter_choice=f)
        report.error_stats += error_eval(blocks, args.modes, args.n, cfg)
        if len(args.modes) >= 2:
            precise = mode_decisions(blocks, args.modes, cfg)
            for n in args.n:
                report.divergence.append(mode_decision_divergence(blocks, args.modes, n, cfg, precise))
    _write_report(report, args)


def cmd_throughput(args):
    q = ThroughputQuery(args.width, args.height, args.fps, args.parallel)
    _emit(throughput_model(q).as_dict(), args)


def cmd_sweep(args):
    sweep = cost_sweep(args.n, args.parallel or (), args.kappa, args.bit_depth)
    report = EvalReport(seed=None, config={"n": args.n, "parallel": args.parallel or [],
                                           "kappa": args.kappa, "input_width": args.bit_depth},
                        cost_sweep=sweep["implementations"], parallel_sweep=sweep["parallel"])
    _write_report(report, args)


def _write_report(report, args):
    if args.out:
        report_write(report, args.out, args.format)
    else:
        sys.stdout.write(report_text(report, args.format))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vvc-mcm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_default=(16,)):
        sp.add_argument("--n", type=int_list, default=list(n_default),
                        help=f"grouping factors from {GROUP_SIZES} (comma list)")
        sp.add_argument("--out", help="output file (directory for 'emit'); stdout if omitted")

    sp = sub.add_parser("tables", help="dump precise or approximated filter tables")
    common(sp, (1,))
    sp.add_argument("--filter", choices=("fc", "fg", "both"), default="both")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_tables)

    sp = sub.add_parser("demands", help="per-tap MCM coefficient demands")
    common(sp)
    sp.set_defaults(func=cmd_demands)

    sp = sub.add_parser("mcm", help="synthesize MCM adder graphs and report costs")
    common(sp)
    sp.add_argument("--coefficients", type=int_list, help="explicit coefficient set instead of tap demands")
    sp.add_argument("--heuristic", choices=("hcub", "csd"), default="hcub")
    sp.add_argument("--bit-depth", type=int, default=10, help="input sample width")
    sp.add_argument("--kappa", type=float, default=6.0, help="gates per adder bit")
    sp.add_argument("--dump", action="store_true", help="include the adjacency listing")
    sp.set_defaults(func=cmd_mcm)

    sp = sub.add_parser("emit", help="write Verilog for one or more implementations")
    common(sp)
    sp.add_argument("--impl", action="append", choices=IMPLEMENTATIONS)
    sp.add_argument("--parallel", type=int_list, help="lane count of the parallel unit")
    sp.add_argument("--bit-depth", type=int, default=10)
    sp.add_argument("--prefix", default="vvc")
    sp.set_defaults(func=cmd_emit)

    sp = sub.add_parser("eval", help="approximation error and mode-decision divergence")
    common(sp, (2, 4, 8, 16, 32))
    sp.add_argument("--image", help="P5 PGM source picture (default: synthetic)")
    sp.add_argument("--synthetic", type=lambda s: tuple(int(v) for v in s.split("x")),
                    default=(128, 128), help="synthetic picture size WxH")
    sp.add_argument("--block", type=block_size, default=BlockSpec(8, 8))
    sp.add_argument("--blocks", type=int, default=100)
    sp.add_argument("--modes", type=int_list, default=list(ANGULAR_MODES))
    sp.add_argument("--filter", choices=("fc", "fg", "both"), default="both")
    sp.add_argument("--bit-depth", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("throughput", help="cycles per frame and required clock")
    sp.add_argument("--width", type=int, default=1920)
    sp.add_argument("--height", type=int, default=1080)
    sp.add_argument("--fps", type=float, default=30)
    sp.add_argument("--parallel", type=int, default=512)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_throughput)

    sp = sub.add_parser("sweep", help="adder / gate-proxy sweep over all implementations")
    common(sp, (32, 16, 8, 4, 2, 1))
    sp.add_argument("--parallel", type=int_list)
    sp.add_argument("--kappa", type=float, default=6.0)
    sp.add_argument("--bit-depth", type=int, default=10)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code else 0
    try:
        args.func(args)
    except InvariantViolation as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 2
    except (InputError, ConfigError, InvalidModeError, CoverageError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
