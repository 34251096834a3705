"""Adder-count and gate-proxy sweep over the architecture implementations."""

from __future__ import annotations

from typing import Iterable

from ..hdl.emit import COEF_WIDTH, IMPLEMENTATIONS, EmitConfig, LaneWindow, parallel_ref_demands
from ..mcm import cost, normalize, synthesize
from ..tables import distinct_value_count, tables_for, tap_demands

# average BD-rate increase (%) reported for each approximated implementation;
# carried as metadata, never measured here
BD_RATE_AVERAGE = {"mcm_n32": 2.678, "mcm_n16": 1.332, "mcm_n8": 1.074,
                   "mcm_n4": 0.556, "mcm_n2": 0.373}


def implementation_name(n: int) -> str:
    return "mcm_precise" if n == 1 else f"mcm_n{n}"


def mcm_cost(n: int, input_width: int = 10, kappa: float = 6, heuristic: str = "hcub") -> dict:
    tables = tables_for(n)
    taps = []
    for d in tap_demands(tables):
        norm = normalize(d.coefficients)
        g = synthesize(norm.fundamentals, heuristic)
        c = cost(g, input_width, kappa)
        taps.append({"tap": d.tap, "coefficients": len(d.coefficients),
                     "fundamentals": len(norm.fundamentals), "adders": c.adder_count,
                     "depth": c.depth, "gate_estimate": c.gate_estimate})
    return {
        "implementation": implementation_name(n),
        "n": n,
        "distinct_coefficients": distinct_value_count(tables),
        "adders": sum(t["adders"] for t in taps),
        "multipliers": 0,
        "depth": max(t["depth"] for t in taps),
        "gate_estimate": sum(t["gate_estimate"] for t in taps),
        "bd_rate_avg_pct": BD_RATE_AVERAGE.get(implementation_name(n)),
        "taps": taps,
    }


def multiplier_cost(input_width: int = 10, kappa: float = 6) -> dict:
    """Four array multipliers, modelled as kappa * W_in * W_coef gates each."""
    return {
        "implementation": "mult",
        "n": 1,
        "distinct_coefficients": distinct_value_count(tables_for(1)),
        "adders": 0,
        "multipliers": 4,
        "depth": 0,
        "gate_estimate": 4 * kappa * input_width * COEF_WIDTH,
        "bd_rate_avg_pct": None,
        "taps": [],
    }


def parallel_cost(n: int, lanes: int, input_width: int = 10, kappa: float = 6,
                  heuristic: str = "hcub") -> dict:
    """Adders of a ``lanes``-wide unit with one fused MCM block per reference."""
    total = 0
    gates = 0.0
    window = LaneWindow.row(lanes)
    for _taps, demand in parallel_ref_demands(tables_for(n), window):
        if demand is None:
            continue
        g = synthesize(normalize(demand.coefficients).fundamentals, heuristic)
        c = cost(g, input_width, kappa)
        total += c.adder_count
        gates += c.gate_estimate
    return {"implementation": implementation_name(n), "n": n, "lanes": lanes,
            "references": window.ref_count, "adders": total, "adders_per_lane": total / lanes,
            "gate_estimate": gates, "gate_estimate_per_lane": gates / lanes}


def cost_sweep(n_values: Iterable[int] = (32, 16, 8, 4, 2, 1), parallel: Iterable[int] = (),
               kappa: float = 6, input_width: int = 10, include_mult: bool = True) -> dict:
    rows = [mcm_cost(n, input_width, kappa) for n in n_values]
    if include_mult:
        rows.append(multiplier_cost(input_width, kappa))
    par = [parallel_cost(n, m, input_width, kappa) for n in n_values for m in parallel]
    return {"implementations": rows, "parallel": par}


__all__ = ["BD_RATE_AVERAGE", "IMPLEMENTATIONS", "EmitConfig", "cost_sweep", "mcm_cost",
           "multiplier_cost", "parallel_cost", "implementation_name"]
