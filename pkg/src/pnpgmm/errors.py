"""Exception hierarchy shared by the library and the CLI exit-code map."""


class PnpGmmError(Exception):
    """Base class for all library errors."""


class ArgumentError(PnpGmmError, ValueError):
    """Invalid argument values or incompatible dimensions. CLI exit code 2."""


class DataError(PnpGmmError, ValueError):
    """Unreadable or non-finite input data. CLI exit code 3."""


class DivergenceError(PnpGmmError, ArithmeticError):
    """Non-finite state encountered during iteration. CLI exit code 4."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration
