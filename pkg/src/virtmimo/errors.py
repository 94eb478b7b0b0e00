"""Exception hierarchy shared across the package."""


class VirtMimoError(Exception):
    """Base class for all package errors."""


class DimensionError(VirtMimoError, ValueError):
    pass


class NotHermitianError(VirtMimoError, ValueError):
    pass


class NotPositiveDefiniteError(VirtMimoError, ArithmeticError):
    def __init__(self, message, smallest_pivot=None):
        super().__init__(message)
        self.smallest_pivot = smallest_pivot


class IllConditionedError(VirtMimoError, ArithmeticError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SolverError(VirtMimoError, RuntimeError):
    """Raised when a per-cell solve cannot produce a valid precoder."""

    def __init__(self, message, cell=None, context=None):
        super().__init__(message)
        self.cell = cell
        self.context = dict(context or {})


class OracleError(VirtMimoError, RuntimeError):
    def __init__(self, message, trace_tail=()):
        super().__init__(message)
        self.trace_tail = list(trace_tail)


class ConfigError(VirtMimoError, ValueError):
    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
