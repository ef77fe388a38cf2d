"""Exception types raised across the library."""


class ZfmmError(Exception):
    """Base class for all zfmm errors."""


class DegeneratePoint(ZfmmError):
    """Complexified radius vanishes relative to the point's size (isotropic point)."""


class LipschitzTooLarge(ZfmmError):
    """Geometry's Lipschitz constant exceeds the convergence thresholds."""


class DuplicateRealParts(ZfmmError):
    """Two points share a real location but have different imaginary parts."""


class SeparationViolated(ZfmmError):
    """Translation requested between centers that are not well separated."""


class Overflow(ZfmmError):
    """Special-function evaluation exhausted the double-precision exponent range."""


class MaxDepthExceeded(ZfmmError):
    """Tree refinement hit the maximum level count."""


class TermLimitExceeded(ZfmmError):
    """Requested tolerance needs more expansion terms than supported."""


class IllConditionedProjection(ZfmmError):
    """Radial projection denominator underflowed; a different radius is needed."""


class CoincidentPoints(ZfmmError):
    """Distinct source/target indices with zero complexified distance."""
