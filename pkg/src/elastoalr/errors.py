"""Exception types shared across the package."""


class ConvexityError(ValueError):
    """Lamé pair violates strong convexity (mu > 0, N*lambda + 2*mu > 0)."""


class DivergentIntegralError(ValueError):
    """An energy integral does not converge (non-decaying or singular term)."""


class NearSingularError(ArithmeticError):
    """The interface matching system is numerically singular.

    Raised instead of returning a garbage solution, e.g. at delta = 0 for a
    block that carries a perfect plasmon wave.
    """

    def __init__(self, message, *, block=None, rcond=None, delta=None):
        super().__init__(message)
        self.block = block
        self.rcond = rcond
        self.delta = delta

    def with_delta(self, delta):
        return NearSingularError(
            f"{self.args[0]} (delta={delta:g})", block=self.block, rcond=self.rcond, delta=delta
        )


class BoundViolationError(ArithmeticError):
    """A primal/dual bound does not bracket the solver energy."""

    def __init__(self, message, *, energy=None, upper=None, lower=None):
        super().__init__(message)
        self.energy = energy
        self.upper = upper
        self.lower = lower
