"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter is outside the mathematical domain of an operation."""


class PointSwallowedError(RuntimeError):
    """A slit-map update captured the marked point (it landed on the hull)."""


class StepSizeError(RuntimeError):
    """The time step is too coarse for the state being evolved."""


class BranchError(RuntimeError):
    """A square-root branch could not be resolved during trace reconstruction."""

    def __init__(self, step_index, message=None):
        self.step_index = step_index
        super().__init__(message or f"branch failure at step {step_index}")


class HorizonWarning(UserWarning):
    """Estimates are still drifting between two simulation horizons."""


class RareEventWarning(UserWarning):
    """Too few successes for a reliable confidence interval."""
