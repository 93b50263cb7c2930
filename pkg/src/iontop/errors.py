"""Exception hierarchy shared by all modules."""


class IontopError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(IontopError, ValueError):
    """Shapes do not match, or a dimension guard was exceeded."""


class NumericError(IontopError, ValueError):
    """Non-finite entries in an input."""


class RepresentationError(IontopError, ValueError):
    """Operation not available in the register's representation."""


class TruncationError(IontopError, ValueError):
    """A displacement would push the mode too close to the Fock cutoff."""


class StateError(IontopError, ValueError):
    """A state violates a normalization or compatibility requirement."""
