"""Exception types shared across the package."""


class RegimeError(ValueError):
    """Raised when parameters fall outside an operation's admissible regime."""


class NumericalError(RuntimeError):
    """Raised when an iterative numerical procedure fails to produce a result.

    Carries the partial result (when one exists) in ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
