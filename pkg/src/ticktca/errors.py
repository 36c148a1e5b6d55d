"""Exception types shared across the package."""


class TickTcaError(Exception):
    """Base class for package errors."""


class ValidationError(TickTcaError, ValueError):
    """Invalid configuration or arguments."""


class DataError(TickTcaError, ValueError):
    """Input data that violates a file schema or a record invariant."""


class InsufficientDataError(DataError):
    """Not enough observations for the requested computation."""
