"""Exception types raised across the package."""


class PatrolSenseError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(PatrolSenseError, ValueError):
    pass


class ShapeError(PatrolSenseError, ValueError):
    pass


class MapParseError(PatrolSenseError, ValueError):
    """A map file or its metadata could not be parsed."""


class MapIntegrityError(PatrolSenseError, ValueError):
    """Header and payload of a map file disagree."""


class EmptyWindowError(PatrolSenseError):
    """The crop window does not overlap the global grid at all.

    Raised when a robot's local view lies entirely off the prior map, which in
    practice means its pose estimate is wrong.
    """


class OffMapError(PatrolSenseError, ValueError):
    pass


class NoPathError(PatrolSenseError):
    pass


class ExhaustionError(PatrolSenseError):
    """Rejection sampling gave up even after relaxing its constraints."""
