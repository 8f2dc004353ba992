"""Safety Hennessy-Milner logic with recursion: normalization, detection
monitors and suppression enforcers over regular CCS processes."""

from .parser import (
    ParseError, parse_enforcer, parse_formula, parse_monitor, parse_process, parse_trace,
)

__version__ = "0.1.0"

__all__ = [
    "ParseError", "parse_enforcer", "parse_formula", "parse_monitor", "parse_process",
    "parse_trace", "__version__",
]
