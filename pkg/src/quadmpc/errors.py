"""Exception types shared across the package."""


class QuadmpcError(Exception):
    """Base class for every error raised by this package."""


class GimbalLock(QuadmpcError):
    """Pitch too close to +-pi/2 for the ZYX Euler-rate transform."""


class InvalidTimestep(QuadmpcError):
    pass


class SingularInertia(QuadmpcError):
    pass


class DimensionMismatch(QuadmpcError):
    pass


class RankDeficient(QuadmpcError):
    """Weighted normal equations of the instantaneous estimate are not solvable."""


class NonMonotonicTime(QuadmpcError):
    pass


class EmptyWindow(QuadmpcError):
    pass


class InsufficientWindow(QuadmpcError):
    """Residual window too short to resolve the slowest candidate frequency."""


class InfeasibleBounds(QuadmpcError):
    """A constraint row has lower bound above its upper bound."""


class NumericalBlowup(QuadmpcError):
    """Simulation state left the sane range; the episode cannot continue."""


class TimeOutOfRange(QuadmpcError):
    pass


class EmptyLog(QuadmpcError):
    pass


class ConfigParseError(QuadmpcError):
    pass
