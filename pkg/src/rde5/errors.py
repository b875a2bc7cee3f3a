"""Exception hierarchy shared by the rde5 modules."""


class Rde5Error(Exception):
    """Base class for every error raised by this package."""


class NonPositiveError(Rde5Error, ValueError):
    """A quantity that must be strictly positive was not."""

    def __init__(self, name, value):
        super().__init__(f"{name} must be positive, got {value!r}")
        self.name = name
        self.value = value


class TooShortError(Rde5Error, ValueError):
    pass


class DegenerateRootsError(Rde5Error, ArithmeticError):
    pass


class ZeroDenominatorError(Rde5Error, ZeroDivisionError):
    pass


class NonConvergenceError(Rde5Error, ArithmeticError):
    pass


class ConsistencyError(Rde5Error, AssertionError):
    """An internal identity that must hold along a computed sequence failed."""


class SimulationAborted(Rde5Error, ArithmeticError):
    """A simulation stopped early.

    ``index`` is the first index that could not be produced and ``partial``
    holds the trajectory computed up to that point.
    """

    reason = "aborted"

    def __init__(self, index, partial, detail=""):
        msg = f"{self.reason} at n={index}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.index = index
        self.partial = partial


class OverflowAbort(SimulationAborted):
    reason = "overflow"


class UnderflowAbort(SimulationAborted):
    reason = "underflow"


class ExactGrowthError(SimulationAborted):
    reason = "exact-growth"
