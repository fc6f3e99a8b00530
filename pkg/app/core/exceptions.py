"""Exception hierarchy shared by the numerical kernels and the services."""


class RisCellFreeError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(RisCellFreeError, ValueError):
    """Scenario or sweep description is invalid."""


class DegenerateGeometryError(RisCellFreeError, ValueError):
    """A link distance is zero or negative (coincident nodes)."""


class DimensionMismatchError(RisCellFreeError, ValueError):
    """Array shapes do not agree."""


class DegenerateChannelError(RisCellFreeError, ValueError):
    """Channel is zero or rank deficient for the requested construction."""


class SolverError(RisCellFreeError, RuntimeError):
    """A numerical solver could not produce a valid iterate."""


class InvariantViolationError(RisCellFreeError, RuntimeError):
    """An internal invariant of the algorithm was broken."""
