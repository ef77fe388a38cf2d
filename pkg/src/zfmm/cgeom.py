"""Complex polar/spherical coordinates and geometric admissibility predicates.

Point clouds live in C^2 or C^3, with the imaginary parts tied to the real
parts by a Lipschitz map of constant L < 1.  Every square root below is the
principal branch (Re >= 0); with L < 1 the complexified radii stay off the
negative real axis, so no branch tracking is required.  Angles are never
stored directly: only cos/sin/e^{i phi}, which are single valued.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DegeneratePoint, DuplicateRealParts, LipschitzTooLarge

# Largest admissible Lipschitz constants for near-field widths k = 1, 2.
K_THRESHOLDS_2D = (0.3592, 0.5590)
K_THRESHOLDS_3D = (0.1270, 0.3671)

_DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class PolarC:
    """Complex polar view of points in C^2: radius and e^{+-i phi} factors.

    Satisfies r*eip = x1 + i x2 and r*eim = x1 - i x2, with eip*eim = 1.
    """

    r: np.ndarray
    eip: np.ndarray
    eim: np.ndarray


@dataclass(frozen=True)
class SphereC:
    """Complex spherical view of points in C^3.

    rho*cos_theta reconstructs x3, and rho*sin_theta*eip (resp. eim)
    reconstructs x1 + i x2 (resp. x1 - i x2).  On-axis points (x1 = x2 = 0)
    use the convention eip = eim = 1, sin_theta = 0.
    """

    rho: np.ndarray
    cos_theta: np.ndarray
    sin_theta: np.ndarray
    eip: np.ndarray
    eim: np.ndarray


@dataclass(frozen=True)
class ConstraintProfile:
    """Describes the Lipschitz graph constraint a point cloud satisfies."""

    dimension: int
    lipschitz: float
    psi: Optional[Callable] = None

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if not 0.0 <= self.lipschitz < 1.0:
            raise ValueError("lipschitz constant must satisfy 0 <= L < 1")


def to_polar(x) -> PolarC:
    """Complex polar coordinates of points in C^2 (last axis length 2).

    Raises DegeneratePoint for isotropic points, where the complexified
    radius nearly vanishes although the point itself does not.
    """
    x = np.asarray(x, dtype=np.complex128)
    x1, x2 = x[..., 0], x[..., 1]
    r = np.sqrt(x1 * x1 + x2 * x2)
    size = np.abs(x1) + np.abs(x2)
    if np.any(np.abs(r) < _DEGENERATE_RTOL * size):
        raise DegeneratePoint("complex radius vanishes for a nonzero point")
    return PolarC(r=r, eip=(x1 + 1j * x2) / r, eim=(x1 - 1j * x2) / r)


def to_spherical(x) -> SphereC:
    """Complex spherical coordinates of points in C^3 (last axis length 3)."""
    x = np.asarray(x, dtype=np.complex128)
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    rho = np.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
    size = np.abs(x1) + np.abs(x2) + np.abs(x3)
    if np.any(np.abs(rho) < _DEGENERATE_RTOL * size):
        raise DegeneratePoint("complex radius vanishes for a nonzero point")
    cos_theta = x3 / rho
    sin_theta = np.sqrt(1.0 - cos_theta * cos_theta)
    # e^{+-i phi} folded with the principal branch of sin theta so that
    # rho*sin_theta*eip = x1 + i x2 holds exactly; on-axis points get eip = 1.
    transverse = rho * sin_theta
    on_axis = (x1 == 0) & (x2 == 0)
    safe = np.where(on_axis, 1.0, transverse)
    eip = np.where(on_axis, 1.0 + 0j, (x1 + 1j * x2) / safe)
    eim = np.where(on_axis, 1.0 + 0j, (x1 - 1j * x2) / safe)
    sin_theta = np.where(on_axis, 0.0 + 0j, sin_theta)
    return SphereC(rho=rho, cos_theta=cos_theta, sin_theta=sin_theta, eip=eip, eim=eim)


def complex_distance(x, y):
    """Principal square root of sum (x_i - y_i)^2; zero is allowed."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    d = x - y
    return np.sqrt((d * d).sum(axis=-1))


def _pair_ratios(re_d2, im_d2):
    """Max Im/Re pair ratio, flagging exact duplicate real parts."""
    coincident = re_d2 == 0.0
    if np.any(coincident & (im_d2 > 0.0)):
        raise DuplicateRealParts(
            "points share a real location but differ in imaginary part"
        )
    ratio2 = np.where(coincident, 0.0, im_d2 / np.where(coincident, 1.0, re_d2))
    return float(np.sqrt(ratio2.max())) if ratio2.size else 0.0


def estimate_lipschitz(points) -> float:
    """Estimate the Lipschitz constant of the imaginary-vs-real map.

    Exact pairwise maximum of ||Im p_i - Im p_j|| / ||Re p_i - Re p_j|| for
    up to 4096 points.  For larger clouds the maximum is taken over
    nearest-neighbour pairs plus 64*N pseudo-random pairs, so the result is
    a lower bound on L.
    """
    pts = np.asarray(points, dtype=np.complex128)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two points")
    re, im = pts.real, pts.imag
    n = pts.shape[0]
    best = 0.0
    if n <= 4096:
        chunk = max(1, (1 << 22) // n)
        for lo in range(0, n, chunk):
            hi = min(n, lo + chunk)
            rd = re[lo:hi, None, :] - re[None, :, :]
            idd = im[lo:hi, None, :] - im[None, :, :]
            re_d2 = (rd * rd).sum(-1)
            im_d2 = (idd * idd).sum(-1)
            # mask the diagonal block's self pairs
            rows = np.arange(lo, hi)
            re_d2[rows - lo, rows] = 1.0
            im_d2[rows - lo, rows] = 0.0
            best = max(best, _pair_ratios(re_d2, im_d2))
        return best

    from scipy.spatial import cKDTree

    tree = cKDTree(re)
    _, nn = tree.query(re, k=2)
    pairs_i = np.arange(n)
    pairs_j = nn[:, 1]
    rng = np.random.default_rng(0x5EED)
    ri = rng.integers(0, n, size=64 * n)
    rj = rng.integers(0, n, size=64 * n)
    keep = ri != rj
    ii = np.concatenate([pairs_i, ri[keep]])
    jj = np.concatenate([pairs_j, rj[keep]])
    rd = re[ii] - re[jj]
    idd = im[ii] - im[jj]
    return _pair_ratios((rd * rd).sum(-1), (idd * idd).sum(-1))


def admissible_k(lipschitz: float, dimension: int) -> int:
    """Smallest near-field width k in {1, 2} valid for a Lipschitz constant."""
    if lipschitz < 0.0:
        raise ValueError("lipschitz constant must be nonnegative")
    t1, t2 = K_THRESHOLDS_2D if dimension == 2 else K_THRESHOLDS_3D
    if lipschitz < t1:
        return 1
    if lipschitz < t2:
        return 2
    raise LipschitzTooLarge(
        f"L={lipschitz:.4g} exceeds the k=2 threshold {t2} in {dimension}-D"
    )


def lipschitz_rate_constant(lipschitz: float, dimension: int) -> float:
    """Factor by which the Lipschitz constant slows geometric convergence.

    (1+L)/(1-L) in two dimensions; C_L = sqrt(L^2+10L+1)/(1-L) in three.
    """
    if dimension == 2:
        return (1.0 + lipschitz) / (1.0 - lipschitz)
    return np.sqrt(lipschitz * lipschitz + 10.0 * lipschitz + 1.0) / (1.0 - lipschitz)


def separation_threshold(c: float, dimension: int) -> float:
    """Largest admissible L at separation ratio c = R/r (strict bound)."""
    if c <= 1.0:
        raise ValueError("separation ratio must exceed 1")
    if dimension == 2:
        return (c - 1.0) / (c + 1.0)
    return (c * c + 5.0 - np.sqrt(12.0 * c * c + 24.0)) / (c * c - 1.0)


def separation_admissible(c: float, lipschitz: float, dimension: int) -> bool:
    """Whether expansions converge at separation ratio c for this L (strict)."""
    return lipschitz < separation_threshold(c, dimension)
