"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid argument, shape or configuration."""


class NumericalFailure(RuntimeError):
    """An iterative solver did not reach its certificate.

    ``info`` carries whatever diagnostic the solver had at the point of
    failure (final residual, iteration count, residual trace).
    """

    def __init__(self, message, **info):
        super().__init__(message)
        self.info = info


class InfeasibleDualError(NumericalFailure):
    """The dual objective is unbounded: the target is not in the span of the
    constraint directions."""
