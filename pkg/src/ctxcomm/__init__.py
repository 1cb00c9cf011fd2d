"""Contextuality witnesses, one-way communication tasks and semi-device-independent QKD figures."""

from .errors import CtxCommError, InvariantBreach, ResourceCapExceeded, ValidationError
from .report import run_report
from .task import build_task, extend_preset
from .witnesses import get_witness, witness_names

__version__ = "0.1.0"

__all__ = ["CtxCommError", "InvariantBreach", "ResourceCapExceeded", "ValidationError", "build_task",
           "extend_preset", "get_witness", "run_report", "witness_names", "__version__"]
