"""Exception and warning types shared across the package."""


class GridError(Exception):
    """Base class for all errors raised by hvgrid."""


class ParseError(GridError):
    """A CSV row could not be split into the expected columns."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(GridError, ValueError):
    """Input violates a documented precondition."""


class EmptyVariantError(GridError):
    """Voltage filtering left no edges, so the variant does not exist."""


class UndefinedMetricError(GridError, ValueError):
    """The metric has no meaning for this graph (too few nodes, edges, ...)."""


class FitError(GridError):
    """Base class for degree-distribution fit failures."""


class InsufficientSupportError(FitError):
    pass


class NonDecayingDistributionError(FitError):
    pass


class DegenerateMetricWarning(UserWarning):
    """A metric fell back to its degenerate value (e.g. zero clustering)."""
