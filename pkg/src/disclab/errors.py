"""Exception hierarchy shared by all disclab modules."""


class DiscLabError(Exception):
    """Base class for every error raised by disclab."""


class InvalidParameterError(DiscLabError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class RangeError(InvalidParameterError):
    """A real parameter (``a``, ``chi``, an interval) is outside its admissible range."""


class IngestionError(DiscLabError):
    """A point file could not be read or contains an invalid record."""


class ConstructionError(DiscLabError):
    """A piecewise-linear construction is infeasible for the requested parameters."""
