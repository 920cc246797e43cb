"""Exception types raised by the localization pipeline."""


class IldarsError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateInput(IldarsError):
    """An input vector is too close to zero (or otherwise unusable)."""


class ParallelLines(IldarsError):
    """Two lines are parallel; no unique closest point exists."""


class DegenerateConfiguration(IldarsError):
    """A line system is singular (e.g. all directions parallel)."""


class DegenerateMeasurement(IldarsError):
    """Direct and reflected directions coincide; no segment can be built."""


class OutsideHemisphere(IldarsError):
    """A point lies outside the open hemisphere of a projection center."""


class CoplanarPair(IldarsError):
    """Two measurements are coplanar; the nested cross product vanishes."""


class InsufficientMeasurements(IldarsError):
    """A cluster is too small for the requested computation."""


class AllPairsDegenerate(IldarsError):
    """Every measurement pair of a cluster failed the direction solve."""


class AllMeasurementsDegenerate(IldarsError):
    """Every measurement of a cluster failed the distance solve."""


class DegenerateGeometry(IldarsError):
    """A localization denominator vanished for this measurement/wall."""


class NonPositiveDistance(IldarsError):
    """A localization produced a sender distance p <= 0."""


class NoWalls(IldarsError):
    """Wall selection was asked to choose from an empty estimate list."""


class UnknownComboToken(IldarsError):
    """A combination filter contains an unrecognized algorithm token."""
