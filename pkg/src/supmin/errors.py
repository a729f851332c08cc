"""Exception types shared across the package."""


class SupminError(Exception):
    """Base class for all supmin errors."""


class NegativeLagrangian(SupminError):
    """A Lagrangian evaluation returned a negative value."""


class NonFinite(SupminError):
    """A computation produced NaN or infinity where a finite value is required."""


class OutOfDomain(SupminError):
    """A coordinate lies outside the interval it must belong to."""


class ZeroStep(SupminError):
    """A difference quotient was requested with step t = 0."""


class EmptyInterval(SupminError):
    """A subinterval (alpha, beta) with alpha >= beta was supplied."""


class BadWeights(SupminError):
    """Averaging weights are negative or do not sum to one."""


class NonUniformGrid(SupminError):
    """An operation requiring a uniform grid received a non-uniform one."""


class BadDelta(SupminError):
    """A boundary-layer width is outside its admissible range."""


class GridTooCoarse(SupminError):
    """No grid node is available inside a requested boundary layer."""


class TooFewEntries(SupminError):
    """A sequence-based check received fewer entries than it needs."""


class ConfigError(SupminError):
    """Invalid run configuration; message is anchored to the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)
