"""Exception types shared across the package.

Each class maps onto one CLI exit code (see ``ctxcomm.cli``).
"""


class CtxCommError(Exception):
    """Base class for all package errors."""

    exit_code = 4


class ValidationError(CtxCommError, ValueError):
    """Malformed input: bad graph, mismatched dimensions, out-of-range parameter."""

    exit_code = 2


class ResourceCapExceeded(CtxCommError):
    """A configured enumeration/size cap would be exceeded."""

    exit_code = 3


class InvariantBreach(CtxCommError):
    """An internal consistency check failed."""

    exit_code = 4
