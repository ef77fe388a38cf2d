"""zfmm: fast multipole methods for complex-coordinate Laplace/Helmholtz sums.

Point clouds live in C^2 or C^3 with imaginary parts that are a Lipschitz
map of the real parts (complex-scaled boundary integral discretizations).
`zfmm.driver.evaluate` is the main entry point; `zfmm.oracle.direct_eval`
is the brute-force reference.
"""

from . import cgeom, fmm2d, fmm3d, oracle, pointio, specfun, tree
from .driver import FmmConfig, FmmReport, TermPlan, evaluate
from .errors import (
    CoincidentPoints,
    DegeneratePoint,
    DuplicateRealParts,
    IllConditionedProjection,
    LipschitzTooLarge,
    MaxDepthExceeded,
    Overflow,
    SeparationViolated,
    TermLimitExceeded,
    ZfmmError,
)
from .oracle import KernelSpec, direct_eval, gen_wobble2d, gen_wobble3d, rel_error

__version__ = "0.1.0"

__all__ = [
    "FmmConfig",
    "FmmReport",
    "TermPlan",
    "evaluate",
    "KernelSpec",
    "direct_eval",
    "rel_error",
    "gen_wobble2d",
    "gen_wobble3d",
    "cgeom",
    "specfun",
    "fmm2d",
    "fmm3d",
    "tree",
    "oracle",
    "pointio",
    "ZfmmError",
    "DegeneratePoint",
    "LipschitzTooLarge",
    "DuplicateRealParts",
    "SeparationViolated",
    "Overflow",
    "MaxDepthExceeded",
    "TermLimitExceeded",
    "IllConditionedProjection",
    "CoincidentPoints",
]
