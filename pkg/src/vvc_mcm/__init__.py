"""Approximate VVC intra angular prediction: coefficient tables, multiplierless
constant-multiplication synthesis, Verilog emission and evaluation."""

from .geometry import (BlockSpec, Reference, SamplePlan, extend_reference, mode_angle,
                       required_ref_range, sample_plan)
from .mcm import (AdderGraph, CostReport, NormalizedCoefficient, cost, evaluate, fuse_parallel,
                  normalize, synthesize)
from .predictor import PredictionConfig, SampleBlock, clip, predict_block, predict_sample
from .tables import (CoefficientTable, TableSet, TapDemand, approximate_table, approximate_tables,
                     distinct_value_count, load_builtin_tables, tables_for, tap_demands)

__version__ = "0.1.0"
