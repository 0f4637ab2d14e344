"""Exception types shared across the package."""


class TorbitError(Exception):
    """Base class for all package-specific errors."""


class DegreeUnsupportedError(TorbitError):
    """Requested degree outside {2, 3}."""


class ReducibleInputError(TorbitError):
    """Defining polynomial is reducible over Q."""


class PrecisionError(TorbitError):
    """Certified root intervals too wide for the requested output precision."""


class UnitSearchExhaustedError(TorbitError):
    """Bounded unit search failed to reach full rank below the box cap."""


class InvalidDiscriminantError(TorbitError):
    """Not a positive non-square discriminant congruent to 0 or 1 mod 4."""


class NonMaximalOrderError(TorbitError):
    """Operation restricted to maximal orders."""


class InvalidLatticeError(TorbitError):
    """Degenerate lattice input (rank below the ambient dimension)."""


class DistanceUndefinedError(TorbitError):
    """Group element pair outside the matrix logarithm's normal neighborhood."""


class ClosingFailedError(TorbitError):
    """Anosov closing failed: the input point is not rho_c-returning."""


class InvalidModulusError(TorbitError):
    """Modulus not coprime to 6 (or seed not coprime to the modulus)."""


class InsufficientInputError(TorbitError):
    """Too few distinct inputs for a pairwise scan."""
