"""Approximation error and SAD mode-decision divergence.

SAD against the original block stands in for the encoder's RD cost; the
divergence rate is a desk-scale proxy for coding-efficiency loss, not a
BD-rate.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Iterable, Sequence

from ..geometry import check_mode
from ..predictor import PredictionConfig, SampleBlock, predict_block
from ..tables import tables_for
from .sources import BlockContext


def _predict(ctx: BlockContext, mode: int, config: PredictionConfig) -> SampleBlock:
    return predict_block(ctx.main_reference(mode), mode, ctx.block, config)


def _filters(config: PredictionConfig, filters) -> tuple[str, ...]:
    if filters is None or filters == "config":
        return (config.filter_choice,)
    if filters == "both":
        return ("fC", "fG")
    return tuple(filters)


def psnr(sse: int, count: int, bit_depth: int) -> float:
    if sse == 0:
        return math.inf
    peak = (1 << bit_depth) - 1
    return 10 * math.log10(peak * peak * count / sse)


def error_eval(blocks: Sequence[BlockContext], modes: Iterable[int], n_values: Iterable[int],
               config: PredictionConfig | None = None, filters=None) -> list[dict]:
    """Compare approximated against precise prediction over every
    (block, mode) pair; one record per (filter, n)."""
    config = config or PredictionConfig()
    modes = [check_mode(m) for m in modes]
    n_values = list(n_values)
    precise_tables = tables_for(1)
    records = []
    for f in _filters(config, filters):
        precise_cfg = replace(config, tables=precise_tables, filter_choice=f)
        reference = [[_predict(ctx, m, precise_cfg).samples for m in modes] for ctx in blocks]
        for n in n_values:
            approx_cfg = replace(config, tables=tables_for(n), filter_choice=f)
            max_abs = 0
            sum_abs = 0
            sse = 0
            count = 0
            changed = 0
            for ctx, ref_preds in zip(blocks, reference):
                for m, ref in zip(modes, ref_preds):
                    pred = _predict(ctx, m, approx_cfg).samples
                    diffs = [a - b for a, b in zip(pred, ref)]
                    block_max = max((abs(d) for d in diffs), default=0)
                    if block_max:
                        changed += 1
                    max_abs = max(max_abs, block_max)
                    sum_abs += sum(abs(d) for d in diffs)
                    sse += sum(d * d for d in diffs)
                    count += len(diffs)
            p = psnr(sse, count, config.bit_depth)
            records.append({
                "filter": f,
                "n": n,
                "blocks": len(blocks),
                "modes": len(modes),
                "samples": count,
                "max_abs_error": max_abs,
                "mean_abs_error": sum_abs / count if count else 0.0,
                "psnr_db": None if math.isinf(p) else p,
                "psnr_infinite": math.isinf(p),
                "changed_predictions": changed,
            })
    return records


def sad(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(abs(x - y) for x, y in zip(a, b))


def best_mode(ctx: BlockContext, modes: Sequence[int], config: PredictionConfig) -> tuple[int, int]:
    """(mode, SAD) minimising SAD; ties go to the lower mode index."""
    best = None
    for m in sorted(modes):
        cost = sad(_predict(ctx, m, config).samples, ctx.original.samples)
        if best is None or cost < best[1]:
            best = (m, cost)
    return best


def mode_decisions(blocks: Sequence[BlockContext], modes: Sequence[int],
                   config: PredictionConfig) -> list[int]:
    return [best_mode(ctx, modes, config)[0] for ctx in blocks]


def mode_decision_divergence(blocks: Sequence[BlockContext], modes: Sequence[int], n: int,
                             config: PredictionConfig | None = None,
                             precise_decisions: Sequence[int] | None = None) -> dict:
    """Fraction of blocks whose SAD-best mode changes under approximation."""
    config = config or PredictionConfig()
    modes = [check_mode(m) for m in modes]
    if len(modes) < 2:
        raise ValueError("mode decision needs at least two candidate modes")
    if precise_decisions is None:
        precise_decisions = mode_decisions(blocks, modes, replace(config, tables=tables_for(1)))
    approx = mode_decisions(blocks, modes, replace(config, tables=tables_for(n)))
    diverged = sum(1 for a, b in zip(precise_decisions, approx) if a != b)
    return {
        "filter": config.filter_choice,
        "n": n,
        "blocks": len(blocks),
        "candidate_modes": len(modes),
        "diverged": diverged,
        "rate": diverged / len(blocks) if blocks else 0.0,
    }
