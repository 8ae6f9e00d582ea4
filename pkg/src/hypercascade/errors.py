"""Exception hierarchy shared by the simulator and the statistics code."""


class HypercascadeError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(HypercascadeError, ValueError):
    """Bad user-supplied parameters (maps to CLI exit status 2)."""


# state core
class DuplicateOccupancy(HypercascadeError):
    pass


class AmplitudeOverflow(HypercascadeError):
    """An exact sum left the set of values ``±(1/√2)^k`` with ``k >= 0``."""


class PatternArity(InvalidInput):
    pass


# optical elements
class UnsupportedAngle(InvalidInput):
    pass


class UnwiredMode(HypercascadeError):
    pass


class DepthExceeded(HypercascadeError):
    pass


class DoubleTagging(HypercascadeError):
    pass


class CircuitOrderError(HypercascadeError):
    """An element consumes a mode that no earlier element produced."""


# cascades and statistics
class InvalidSpec(InvalidInput):
    pass


class InvalidQuery(InvalidInput):
    pass


class OracleBound(InvalidInput):
    pass
