"""Differential analog network coding with relay selection over two-way relay channels."""

from .engine import SerCurvePoint, SimConfig, emit_csv, parse_csv, run_sweep, run_trial

__all__ = ["SimConfig", "SerCurvePoint", "run_sweep", "run_trial", "emit_csv", "parse_csv"]
__version__ = "0.1.0"
