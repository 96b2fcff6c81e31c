"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """Raised when inputs violate a documented precondition."""


class NumericFailureError(ArithmeticError):
    """Raised when an iterative solver diverges or exceeds its pivot budget."""


class GenerationFailureError(RuntimeError):
    """Raised when rejection sampling exhausts its budget.

    The observed acceptance rate is kept on the instance so callers can decide
    whether to retry with a smaller noise scale.
    """

    def __init__(self, message, acceptance_rate):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate
