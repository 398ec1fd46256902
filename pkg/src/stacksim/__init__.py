"""Trace-driven simulator of die-stacked + off-chip DRAM organizations."""

from stacksim.errors import (
    AccountingError,
    CapacityError,
    ConfigError,
    DomainError,
    TraceFormatError,
    TraceValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "AccountingError",
    "CapacityError",
    "ConfigError",
    "DomainError",
    "TraceFormatError",
    "TraceValidationError",
]
