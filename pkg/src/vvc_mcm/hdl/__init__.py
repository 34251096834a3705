from .emit import (IMPLEMENTATIONS, EmitConfig, LaneWindow, SelectionTable, Source,
                   build_selection_table, count_adders, emit_mcm_module, emit_parallel_unit,
                   emit_predictor_unit, mcm_module_coefficients, parse_mcm_module,
                   write_hdl)
from .verilog import Simulator, WidthOverflow, compile_design, parse_verilog

__all__ = [
    "IMPLEMENTATIONS", "EmitConfig", "LaneWindow", "SelectionTable", "Source",
    "build_selection_table", "count_adders", "emit_mcm_module", "emit_parallel_unit",
    "emit_predictor_unit", "mcm_module_coefficients", "parse_mcm_module", "write_hdl",
    "Simulator", "WidthOverflow", "compile_design", "parse_verilog",
]
