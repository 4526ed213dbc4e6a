"""Config loading, parameter sweeps and result files"""
from harness.config_loader import load_config, parse_config
from harness.models import GridPoint, ModeRow, ResultRow, SweepConfig
from harness.storage import ResultStorage, read_table, results_frame, to_json, write_table
from harness.sweep import (
    PointAnalysis,
    SweepOutcome,
    analyze,
    analyze_point,
    emit_figure_data,
    figure_frame,
    resolve_workers,
    run_convergence,
    run_sweep,
)

__all__ = [
    'load_config',
    'parse_config',
    'GridPoint',
    'ModeRow',
    'ResultRow',
    'SweepConfig',
    'ResultStorage',
    'read_table',
    'results_frame',
    'to_json',
    'write_table',
    'PointAnalysis',
    'SweepOutcome',
    'analyze',
    'analyze_point',
    'emit_figure_data',
    'figure_frame',
    'resolve_workers',
    'run_convergence',
    'run_sweep',
]
