"""Exception types raised by robinflow."""


class RobinFlowError(Exception):
    """Base class for computational errors (CLI exit code 1)."""


class UnknownNonlinearity(RobinFlowError, ValueError):
    pass


class GridTooCoarse(RobinFlowError, ValueError):
    pass


class BracketingError(RobinFlowError):
    """A root bracket did not contain a sign change."""

    def __init__(self, message: str, interval: tuple[float, float]):
        super().__init__(f"{message} on interval [{interval[0]!r}, {interval[1]!r}]")
        self.interval = interval


class AsymmetricRobin(RobinFlowError, ValueError):
    pass


class NonHyperbolic(RobinFlowError, ValueError):
    pass


class NumericalOverflow(RobinFlowError, FloatingPointError):
    pass


class NotInGrowthRegime(RobinFlowError, ValueError):
    pass


class UnclassifiedBlowup(RobinFlowError):
    def __init__(self, distances: dict):
        detail = ", ".join(f"N={n}: {d:.3e}" for n, d in sorted(distances.items()))
        super().__init__(f"unclassified blow-up direction ({detail})")
        self.distances = distances


class OutsideChart(RobinFlowError, ValueError):
    pass


class PointAtInfinity(RobinFlowError, ValueError):
    pass


class TransientNotObserved(RobinFlowError):
    pass
