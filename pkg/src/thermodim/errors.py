"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Raised when a catalog/config parameter is outside its valid range."""


class NumericalError(RuntimeError):
    """Raised when an iterative numerical procedure cannot produce a result.

    Carries the name of the failing operation so callers (in particular the
    CLI, which maps this to exit code 3) can report it.
    """

    def __init__(self, operation, message):
        super().__init__(f"{operation}: {message}")
        self.operation = operation
