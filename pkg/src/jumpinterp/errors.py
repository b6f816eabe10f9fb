class DomainError(ValueError):
    """An argument lies outside the range where a quantity is defined."""


class InputError(ValueError):
    """Input data violates a stated precondition (carries the offending item)."""

    def __init__(self, message, item=None):
        super().__init__(message)
        self.item = item


class ConvergenceError(RuntimeError):
    """An iterative procedure failed to reach its tolerance."""


class ToleranceError(RuntimeError):
    """A certified numerical error bound could not be met."""
