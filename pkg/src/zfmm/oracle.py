"""Brute-force complexified kernel sums, the error metric, and benchmark
point-cloud generators.

Kernel conventions follow the unscaled N-body sums the fast evaluator
targets (overall Green's-function constants dropped):

    lap2d   log r_xy
    helm2d  H_0^(1)(kappa r_xy)
    lap3d   1 / rho_xy
    helm3d  e^{i kappa rho_xy} / rho_xy

Downstream boundary-integral users must reapply -1/(2 pi), i/4, 1/(4 pi),
i/(4 pi) respectively.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import CoincidentPoints

_CHUNK = 1 << 22


@dataclass(frozen=True)
class KernelSpec:
    kind: str            # lap2d | helm2d | lap3d | helm3d
    kappa: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lap2d", "helm2d", "lap3d", "helm3d"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind.startswith("helm") and not self.kappa > 0:
            raise ValueError("Helmholtz kernels need kappa > 0")

    @property
    def dimension(self):
        return 2 if self.kind.endswith("2d") else 3


@dataclass(frozen=True)
class GeometryRecipe:
    family: str          # wobble2d | wobble3d
    a: float
    b: float
    t0: float
    n: int


def kernel_values(spec: KernelSpec, r):
    """Kernel applied to complexified distances (zeros must be pre-masked)."""
    if spec.kind == "lap2d":
        return np.log(r)
    if spec.kind == "helm2d":
        return _sp.hankel1(0, spec.kappa * r)
    if spec.kind == "lap3d":
        return 1.0 / r
    return np.exp(1j * spec.kappa * r) / r


def direct_eval(spec: KernelSpec, sources, charges, targets=None):
    """O(N M) complexified kernel sum; the ground truth for every FMM test.

    With targets omitted (or the same array object as sources), the self
    pair of each point is skipped; any other exactly-zero complexified
    distance raises CoincidentPoints.
    """
    src = np.asarray(sources, np.complex128)
    sig = np.asarray(charges, np.complex128)
    aliased = targets is None or targets is sources
    tgt = src if aliased else np.asarray(targets, np.complex128)
    n_t = tgt.shape[0]
    out = np.empty(n_t, np.complex128)
    rows = max(1, _CHUNK // max(src.shape[0], 1))
    for lo in range(0, n_t, rows):
        hi = min(n_t, lo + rows)
        d = tgt[lo:hi, None, :] - src[None, :, :]
        r = np.sqrt((d * d).sum(-1))
        zero = r == 0.0
        if np.any(zero):
            ti, si = np.nonzero(zero)
            if not aliased or np.any(ti + lo != si):
                raise CoincidentPoints("distinct points at zero complexified distance")
            r[zero] = 1.0
        vals = kernel_values(spec, r)
        if np.any(zero):
            vals[zero] = 0.0
        out[lo:hi] = vals @ sig
    return out


def rel_error(u, u0, sigma):
    """||u - u0||_2 / (||u0||_2 + ||sigma||_2)."""
    u = np.asarray(u)
    u0 = np.asarray(u0)
    if u.shape != u0.shape:
        raise ValueError("potential arrays must have matching shapes")
    return float(
        np.linalg.norm(u - u0) / (np.linalg.norm(u0) + np.linalg.norm(sigma))
    )


# ----------------------------------------------------------------------------
# Benchmark geometries
# ----------------------------------------------------------------------------

def ramp_xi(t):
    """Antiderivative of erfc(t)/2: smooth ramp that is ~t for t << 0, ~0 for t >> 0."""
    t = np.asarray(t, float)
    return 0.5 * (t * _sp.erfc(t) - np.exp(-t * t) / np.sqrt(np.pi))


def imag_profile(t, a, b, t0):
    """Odd, flat-near-zero deformation profile with tail slope a*b.

    Vanishes to machine precision on (-t0, t0) and grows linearly like
    a*b*(|t| - t0) outside, with erfc-smoothed corners.
    """
    t = np.asarray(t, float)
    return a * (ramp_xi(b * (t + t0)) - ramp_xi(-b * (t - t0)))


def _window(t):
    # smooth indicator of (-6, 6) built from erfc steps
    return 1.0 - 0.5 * (_sp.erfc(-2.0 * (t - 6.0)) + _sp.erfc(2.0 * (t + 6.0)))


def wobble2d_curve(t, a=0.05, b=3.0, t0=13.0):
    """Complexified wobbly interface over the real line; (len(t), 2) complex."""
    t = np.asarray(t, float)
    x2 = 2.0 * np.exp(-t * t / 16.0) * np.cos(8.0 * t) * _window(t)
    return np.stack([t + 1j * imag_profile(t, a, b, t0), x2 + 0j], axis=-1)


def gen_wobble2d(n, a=0.05, b=3.0, t0=13.0, t_span=16.0):
    """n uniform parameter samples of the complexified 2-D interface."""
    if n < 1:
        raise ValueError("need n >= 1")
    t = np.linspace(-t_span, t_span, n)
    return wobble2d_curve(t, a, b, t0)


def wobble3d_surface(t1, t2, a=0.2, b=0.75, t0=12.0):
    """Complexified pulled-grid surface; inputs broadcast, output (..., 3)."""
    t1 = np.asarray(t1, float)
    t2 = np.asarray(t2, float)
    damp = 0.5 * np.exp(-(t1 * t1 + t2 * t2) / 300.0)
    u = t1 * (1.0 - damp)
    v = t2 * (1.0 - damp)
    x3 = np.exp(-(u * u + v * v) / 8.0) * (
        np.cos(1.9 * u + 0.95 * v) + np.sin(u + 1.55 * v)
    )
    return np.stack(
        [
            u + 1j * imag_profile(u, a, b, t0),
            v + 1j * imag_profile(v, a, b, t0),
            x3 + 0j,
        ],
        axis=-1,
    )


def gen_wobble3d(n, a=0.2, b=0.75, t0=12.0, span=25.0):
    """n samples of the complexified 3-D surface from a tensor parameter grid.

    Uses the smallest m x m grid with m^2 >= n and keeps n evenly strided
    nodes, so coverage stays uniform for any requested count.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    m = int(np.ceil(np.sqrt(n)))
    g = np.linspace(-span, span, m)
    T1, T2 = np.meshgrid(g, g, indexing="ij")
    pts = wobble3d_surface(T1.ravel(), T2.ravel(), a, b, t0)
    keep = np.linspace(0, pts.shape[0] - 1, n).round().astype(int)
    return pts[keep]
