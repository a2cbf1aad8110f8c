"""Exception types shared across the package."""


class StepFailure(RuntimeError):
    """A time step could not be completed (solver breakdown, subflow pole)."""


class ConvergenceFailure(RuntimeError):
    """An iterative refinement (reference solve, quadrature) did not converge."""
