class NafsError(Exception):
    """Base class for all errors raised by this package."""


class DataError(NafsError):
    """Malformed or inconsistent input data (files, edge lists, matrices)."""


class ParameterError(NafsError, ValueError):
    """An argument is outside its valid range."""
