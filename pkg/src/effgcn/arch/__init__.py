"""Compound scaling and complexity accounting."""

from .profiler import (
    SweepCell,
    attention_cost,
    block_cost,
    count_flops,
    count_params,
    profile_plan,
    read_report_csv,
    receptive_sweep,
    sgc_cost,
    tc_layer_cost,
    write_report_csv,
    write_sweep_csv,
)
from .scaling import (
    ScalingCheck,
    check_scaling_constraint,
    make_arch,
    scale_channels,
    scale_depth,
    step_round,
)

__all__ = [
    "ScalingCheck",
    "SweepCell",
    "attention_cost",
    "block_cost",
    "check_scaling_constraint",
    "count_flops",
    "count_params",
    "make_arch",
    "profile_plan",
    "read_report_csv",
    "receptive_sweep",
    "scale_channels",
    "scale_depth",
    "sgc_cost",
    "step_round",
    "tc_layer_cost",
    "write_report_csv",
    "write_sweep_csv",
]
