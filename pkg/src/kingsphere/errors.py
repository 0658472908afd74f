"""Exception types raised across the package."""


class KingSphereError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(KingSphereError, ValueError):
    pass


class InvalidArgument(KingSphereError, ValueError):
    pass


class RankDeficient(KingSphereError, ValueError):
    pass


class NotSymmetric(KingSphereError, ValueError):
    pass


class NotPSD(KingSphereError, ValueError):
    pass


class TooLarge(KingSphereError, ValueError):
    """Exhaustive enumeration refused because the tree is too deep."""


class NoSolution(KingSphereError, RuntimeError):
    """A search finished with no leaf inside the sphere and cannot restart."""
