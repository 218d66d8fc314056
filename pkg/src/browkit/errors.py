"""Exception hierarchy. Everything raised on purpose derives from BrowkitError."""


class BrowkitError(Exception):
    """Base class for all browkit errors."""


class SchemaError(BrowkitError):
    """A landmark-role schema is invalid or cannot be satisfied by the input."""


class ParseError(BrowkitError):
    """An input file is malformed."""


class VersionError(ParseError):
    """An interchange file declares an unsupported format version."""


class DegenerateGeometryError(BrowkitError):
    """A geometric computation has no answer (coincident line points, collinear rigid set)."""


class ScalingError(BrowkitError):
    """A unit-scaling group is degenerate (no usable value range)."""


class FitError(BrowkitError):
    """A least-squares fit cannot proceed (rank deficiency, too few rows)."""


class StatsError(BrowkitError):
    """A statistical test's preconditions are not met."""
