from .evaluate import error_eval, mode_decision_divergence, mode_decisions
from .report import REPORT_SCHEMA, EvalReport, report_read, report_text, report_write
from .sources import block_context, read_pgm, sample_blocks, synthetic_image, write_pgm
from .sweep import BD_RATE_AVERAGE, cost_sweep, mcm_cost, multiplier_cost, parallel_cost
from .throughput import ThroughputQuery, ThroughputResult, throughput_model

__all__ = [
    "error_eval", "mode_decision_divergence", "mode_decisions",
    "REPORT_SCHEMA", "EvalReport", "report_read", "report_text", "report_write",
    "block_context", "read_pgm", "sample_blocks", "synthetic_image", "write_pgm",
    "BD_RATE_AVERAGE", "cost_sweep", "mcm_cost", "multiplier_cost", "parallel_cost",
    "ThroughputQuery", "ThroughputResult", "throughput_model",
]
