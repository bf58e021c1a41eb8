"""
hyperwitness - Utilities Module

Logging, the error hierarchy, the Jacobi eigenvalue solver and tabular data
checks shared by the simulation and analysis packages.
"""

from .eigen import jacobi_eigvalsh
from .error_handling import HyperwitnessError, handle_error, safe_json_load
from .logger import get_logger, setup_logger
from .verification import verify_data_integrity

__all__ = [
    "setup_logger",
    "get_logger",
    "HyperwitnessError",
    "handle_error",
    "safe_json_load",
    "jacobi_eigvalsh",
    "verify_data_integrity",
]
