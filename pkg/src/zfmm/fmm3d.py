"""3-D expansion formation/evaluation, translations, and complex rotations.

Expansions store coefficients against the spherical harmonics of Def-style
convention Y_n^m = sqrt((n-|m|)!/(n+|m|)!) P_n^{|m|}(cos theta) e^{i m phi}
with Y_0^0 = 1.  Coefficient blocks are dense complex arrays of shape
(P+1, 2P+1) with column index m + P and zeros for |m| > n.

Angular factors are evaluated through the scaled polynomial tables
W_n^m(u) = sqrt((n-m)!/(n+m)!) P_n^m(u) / (1-u^2)^{m/2}, so that
Y_n^m = W_n^{|m|}(cos theta) * v^{|m|} with v = sin theta e^{+-i phi}
= (x1 +- i x2)/rho; this avoids all square-root branch choices in the
angular direction.

Laplace multipole coefficients are stored as M_n^m / scale^n and local
ones as L_n^m * scale^n.  Helmholtz coefficients are stored unscaled; the
scale field selects sampling radii for the coaxial projection operators.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from .errors import DegeneratePoint, IllConditionedProjection, Overflow
from .specfun import ynm_scaled_table, ynm_scaled_table_du

_DEG_RTOL = 1e-12


@dataclass
class Mpole3:
    center: np.ndarray
    order: int
    kernel: str  # "lap" or "helm"
    kappa: float
    scale: float
    coef: np.ndarray  # (P+1, 2P+1), column m+P


@dataclass
class Local3:
    center: np.ndarray
    order: int
    kernel: str
    kappa: float
    scale: float
    coef: np.ndarray


def _powers(t, order):
    t = np.asarray(t, dtype=np.complex128)
    out = np.empty(t.shape + (order + 1,), dtype=np.complex128)
    out[..., 0] = 1.0
    if order >= 1:
        out[..., 1:] = t[..., None]
        np.cumprod(out[..., 1:], axis=-1, out=out[..., 1:])
    return out


def sphere_frame(points, center):
    """(rho, u, vp, vm) of points relative to a center.

    u = cos theta; vp/vm = sin theta e^{+-i phi} = (x1 +- i x2)/rho.
    Points exactly at the center get rho = 0, u = 1, vp = vm = 0, which
    feeds only the (0, 0) term of any expansion.
    """
    d = np.asarray(points, np.complex128) - np.asarray(center, np.complex128)
    rho = np.sqrt((d * d).sum(-1))
    size = np.abs(d).sum(-1)
    exact_zero = size == 0.0
    if np.any((np.abs(rho) < _DEG_RTOL * size) & ~exact_zero):
        raise DegeneratePoint("isotropic point relative to expansion center")
    safe = np.where(exact_zero, 1.0, rho)
    u = np.where(exact_zero, 1.0, d[..., 2] / safe)
    vp = np.where(exact_zero, 0.0, (d[..., 0] + 1j * d[..., 1]) / safe)
    vm = np.where(exact_zero, 0.0, (d[..., 0] - 1j * d[..., 1]) / safe)
    return rho, u, vp, vm


def ynm_full(u, vp, vm, order):
    """Angular table Y_n^m for m = -P..P; shape (npts, P+1, 2P+1)."""
    P = order
    W = np.moveaxis(ynm_scaled_table(u, P), -1, 0)  # (npts, n, m>=0)
    pvp = _powers(vp, P)
    pvm = _powers(vm, P)
    npts = W.shape[0]
    out = np.zeros((npts, P + 1, 2 * P + 1), np.complex128)
    out[:, :, P:] = W * pvp[:, None, :]
    out[:, :, :P] = (W[:, :, :0:-1]) * pvm[:, None, :0:-1]
    return out


@lru_cache(maxsize=64)
def _log_anm(order):
    """log |A_n^m| = -0.5 (lgamma(n-m+1) + lgamma(n+m+1)) on (n, m+P) grid."""
    P = order
    n = np.arange(P + 1)[:, None]
    m = np.arange(-P, P + 1)[None, :]
    valid = np.abs(m) <= n
    la = np.where(
        valid,
        -0.5 * (_sp.gammaln(np.maximum(n - m, 0) + 1.0) + _sp.gammaln(np.maximum(n + m, 0) + 1.0)),
        -np.inf,
    )
    return la, valid


def anm_table(order):
    """A_n^m = (-1)^n / sqrt((n-m)! (n+m)!) on the (n, m+P) grid."""
    la, valid = _log_anm(order)
    signs = np.where(np.arange(order + 1)[:, None] % 2 == 0, 1.0, -1.0)
    return np.where(valid, signs * np.exp(la), 0.0)


# ----------------------------------------------------------------------------
# Formation and evaluation
# ----------------------------------------------------------------------------

def lap3_p2m_coef(points_frame, charges, order, scale):
    rho, u, vp, vm = points_frame
    Y = ynm_full(u, vp, vm, order)
    rp = _powers(rho / scale, order)
    sig = np.asarray(charges, np.complex128)
    return np.einsum("p,pn,pnm->nm", sig, rp, Y[:, :, ::-1])


def p2m_lap3(sources, charges, center, order, scale=1.0) -> Mpole3:
    """Multipole expansion of 1/rho sources about a complexified center."""
    frame = sphere_frame(sources, center)
    coef = lap3_p2m_coef(frame, charges, order, scale)
    return Mpole3(np.asarray(center, np.complex128), order, "lap", 0.0, scale, coef)


def lap3_m2p_eval(coef, scale, points_frame):
    rho, u, vp, vm = points_frame
    order = coef.shape[0] - 1
    Y = ynm_full(u, vp, vm, order)
    rad = _powers(scale / rho, order) / rho[:, None]
    return np.einsum("nm,pn,pnm->p", coef, rad, Y)


def m2p_lap3(e: Mpole3, targets):
    frame = sphere_frame(targets, e.center)
    if np.any(frame[0] == 0):
        raise DegeneratePoint("target coincides with the expansion center")
    return lap3_m2p_eval(e.coef, e.scale, frame)


def lap3_p2l_coef(points_frame, charges, order, scale):
    rho, u, vp, vm = points_frame
    if np.any(rho == 0):
        raise DegeneratePoint("source coincides with the local center")
    Y = ynm_full(u, vp, vm, order)
    rad = _powers(scale / rho, order) / rho[:, None]
    sig = np.asarray(charges, np.complex128)
    return np.einsum("p,pn,pnm->nm", sig, rad, Y[:, :, ::-1])


def p2l_lap3(sources, charges, center, order, scale=1.0) -> Local3:
    frame = sphere_frame(sources, center)
    coef = lap3_p2l_coef(frame, charges, order, scale)
    return Local3(np.asarray(center, np.complex128), order, "lap", 0.0, scale, coef)


def lap3_l2p_eval(coef, scale, points_frame):
    rho, u, vp, vm = points_frame
    order = coef.shape[0] - 1
    Y = ynm_full(u, vp, vm, order)
    rad = _powers(rho / scale, order)
    return np.einsum("nm,pn,pnm->p", coef, rad, Y)


def l2p_lap3(e: Local3, targets):
    return lap3_l2p_eval(e.coef, e.scale, sphere_frame(targets, e.center))


def sph_h1_seq_many(z, order):
    """h^(1)_0..P at complex arguments by stable upward recurrence; (P+1, *z)."""
    z = np.asarray(z, np.complex128)
    out = np.empty((order + 1,) + z.shape, np.complex128)
    ez = np.exp(1j * z)
    out[0] = -1j * ez / z
    if order >= 1:
        out[1] = out[0] * (1.0 / z - 1j)
    for n in range(1, order):
        out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    if not np.all(np.isfinite(out)):
        raise Overflow("spherical Hankel sequence overflowed")
    return out


def sph_j_seq_many(z, order):
    """j_0..P at complex arguments by downward (Miller) recurrence; (P+1, *z)."""
    z = np.asarray(z, np.complex128)
    zero = z == 0.0
    safe = np.where(zero, 1.0, z)
    nstart = order + 15 + int(np.ceil(1.5 * np.sqrt(order + 1.0)))
    out = np.zeros((order + 1,) + z.shape, np.complex128)
    f_up2 = np.zeros(z.shape, np.complex128)
    f_up1 = np.full(z.shape, 1e-280, np.complex128)
    written = order + 1
    for n in range(nstart, -1, -1):
        f = (2.0 * n + 3.0) / safe * f_up1 - f_up2
        if n <= order:
            out[n] = f
            written = n
        f_up2, f_up1 = f_up1, f
        big = np.abs(f_up1) > 1e250
        if np.any(big):
            rescale = np.where(big, 1e-250, 1.0)
            f_up1 = f_up1 * rescale
            f_up2 = f_up2 * rescale
            if written <= order:
                out[written:] *= rescale
    # normalize against j_0 = sin z / z, or j_1 where sin z nearly vanishes
    s, c = np.sin(safe), np.cos(safe)
    use_j1 = (np.abs(s) < 0.1) & (order >= 1)
    ref = np.where(use_j1, s / (safe * safe) - c / safe, s / safe)
    raw = np.where(use_j1, out[min(1, order)], out[0])
    out *= ref / raw
    if np.any(zero):
        out[:, zero] = 0.0
        out[0, zero] = 1.0
    if not np.all(np.isfinite(out)):
        raise Overflow("spherical Bessel sequence lost normalization")
    return out


def helm3_p2m_coef(points_frame, charges, kappa, order):
    rho, u, vp, vm = points_frame
    Y = ynm_full(u, vp, vm, order)
    J = np.moveaxis(sph_j_seq_many(kappa * rho, order), 0, -1)
    sig = np.asarray(charges, np.complex128)
    pref = 2.0 * np.arange(order + 1) + 1.0
    return np.einsum("n,p,pn,pnm->nm", pref, sig, J, Y[:, :, ::-1])


def p2m_helm3(sources, charges, center, kappa, order, scale=1.0) -> Mpole3:
    frame = sphere_frame(sources, center)
    coef = helm3_p2m_coef(frame, charges, kappa, order)
    return Mpole3(np.asarray(center, np.complex128), order, "helm", kappa, scale, coef)


def helm3_m2p_eval(coef, kappa, points_frame):
    rho, u, vp, vm = points_frame
    order = coef.shape[0] - 1
    Y = ynm_full(u, vp, vm, order)
    H = np.moveaxis(sph_h1_seq_many(kappa * rho, order), 0, -1)
    return np.einsum("nm,pn,pnm->p", coef, H, Y)


def m2p_helm3(e: Mpole3, targets):
    return helm3_m2p_eval(e.coef, e.kappa, sphere_frame(targets, e.center))


def helm3_p2l_coef(points_frame, charges, kappa, order):
    rho, u, vp, vm = points_frame
    if np.any(rho == 0):
        raise DegeneratePoint("source coincides with the local center")
    Y = ynm_full(u, vp, vm, order)
    H = np.moveaxis(sph_h1_seq_many(kappa * rho, order), 0, -1)
    sig = np.asarray(charges, np.complex128)
    # no (-1)^n factor: with this Y convention the Gegenbauer series for
    # h_0(kappa rho_xy) carries plain (2n+1) weights on both sides
    pref = 2.0 * np.arange(order + 1) + 1.0
    return np.einsum("n,p,pn,pnm->nm", pref, sig, H, Y[:, :, ::-1])


def p2l_helm3(sources, charges, center, kappa, order, scale=1.0) -> Local3:
    frame = sphere_frame(sources, center)
    coef = helm3_p2l_coef(frame, charges, kappa, order)
    return Local3(np.asarray(center, np.complex128), order, "helm", kappa, scale, coef)


def helm3_l2p_eval(coef, kappa, points_frame):
    rho, u, vp, vm = points_frame
    order = coef.shape[0] - 1
    Y = ynm_full(u, vp, vm, order)
    J = np.moveaxis(sph_j_seq_many(kappa * rho, order), 0, -1)
    return np.einsum("nm,pn,pnm->p", coef, J, Y)


def l2p_helm3(e: Local3, targets):
    return helm3_l2p_eval(e.coef, e.kappa, sphere_frame(targets, e.center))


# ----------------------------------------------------------------------------
# Rotations
# ----------------------------------------------------------------------------

def rot_z_coef(coef, eimb):
    """Multiply column m by e^{-i m beta}, given e^{-i beta} (batch-capable).

    coef has shape (..., P+1, 2P+1); eimb broadcasts over leading axes.
    """
    order = coef.shape[-2] - 1
    eimb = np.asarray(eimb, np.complex128)
    pos = _powers(eimb, order)
    neg = _powers(1.0 / eimb, order)
    row = np.concatenate([neg[..., :0:-1], pos], axis=-1)
    return coef * row[..., None, :]


def rot_z(e, cos_beta, sin_beta):
    """Rotate an expansion about the z-axis; coefficients pick up e^{-i m beta}."""
    if abs(cos_beta * cos_beta + sin_beta * sin_beta - 1.0) > 1e-12:
        raise ValueError("cos/sin pair does not satisfy cos^2 + sin^2 = 1")
    out = rot_z_coef(e.coef, cos_beta - 1j * sin_beta)
    cls = Mpole3 if isinstance(e, Mpole3) else Local3
    return cls(e.center, e.order, e.kernel, e.kappa, e.scale, out)


class RotationPlan:
    """Grid, scaled-Legendre equator tables, and DFT bookkeeping for order P."""

    def __init__(self, order):
        P = order
        self.order = P
        self.phi = 2.0 * np.pi * np.arange(2 * P + 1) / (2 * P + 1)
        self.cos_phi = np.cos(self.phi)
        self.sin_phi = np.sin(self.phi)
        w0, dw0 = ynm_scaled_table_du(np.array([0.0 + 0.0j]), P)
        self.w_eq = w0[:, :, 0].real.copy()       # W_n^m(0)
        self.dw_eq = dw0[:, :, 0].real.copy()     # dW_n^m/du (0)
        self.denom = self.w_eq**2 + self.dw_eq**2
        n = np.arange(P + 1)[:, None]
        m = np.arange(P + 1)[None, :]
        self.denom[m > n] = 1.0

    # columns of the (P+1, 2P+1) coefficient block split by sign of m
    def split(self, coef):
        P = self.order
        cpos = coef[..., P:]
        cneg = np.zeros_like(cpos)
        cneg[..., 1:] = coef[..., P - 1 :: -1][..., : P]
        return cpos, cneg


@lru_cache(maxsize=64)
def rotation_plan(order):
    return RotationPlan(order)


def rot_y_coef(coef, cos_a, sin_a):
    """Rotate coefficient stacks (B, P+1, 2P+1) about the y-axis.

    The rotation maps the vector (sin a, 0, cos a) onto the +z axis.  For
    each degree the rotated-frame function is sampled on the equator grid
    together with its theta-derivative, then inverted by FFT with the
    combined value/derivative projection, whose denominator never vanishes.
    The scaled-Legendre recurrence is fused with the accumulation, one
    (degree, azimuthal-order) row at a time, to keep the working set small.
    """
    coef = np.asarray(coef)
    squeeze = coef.ndim == 2
    if squeeze:
        coef = coef[None]
    B = coef.shape[0]
    P = coef.shape[1] - 1
    plan = rotation_plan(P)
    cos_a = np.atleast_1d(np.asarray(cos_a, np.complex128))
    sin_a = np.atleast_1d(np.asarray(sin_a, np.complex128))
    J = 2 * P + 1
    # old-frame coordinates of the rotated-frame equator grid points
    u = -sin_a[:, None] * plan.cos_phi[None, :]                 # (B, J)
    wp = cos_a[:, None] * plan.cos_phi[None, :] + 1j * plan.sin_phi[None, :]
    wm = cos_a[:, None] * plan.cos_phi[None, :] - 1j * plan.sin_phi[None, :]
    du = -cos_a[:, None]                                        # d u / d theta
    dw = -sin_a[:, None]                                        # d w+- / d theta
    cpos, cneg = plan.split(coef)                               # (B, n, m)
    f = np.zeros((B, P + 1, J), np.complex128)
    g = np.zeros((B, P + 1, J), np.complex128)
    # phase rows and their order-scaled variants, updated per m
    php = np.ones((B, J), np.complex128)
    phm = np.ones((B, J), np.complex128)
    php_prev = np.zeros((B, J), np.complex128)
    phm_prev = np.zeros((B, J), np.complex128)
    for m in range(P + 1):
        if m > 0:
            php_prev, phm_prev = php, phm
            php = php_prev * wp
            phm = phm_prev * wm
        # recurrence over degree for fixed order; rows are (B, J)
        w2 = np.zeros((B, J), np.complex128)
        dw2 = np.zeros((B, J), np.complex128)
        if m == 0:
            w1 = np.ones((B, J), np.complex128)
        else:
            w1 = _diag_w(m, u)
        dw1 = np.zeros((B, J), np.complex128)
        for n in range(m, P + 1):
            if n == m:
                wr, dwr = w1, dw1
            elif n == m + 1:
                a = np.sqrt(2 * m + 1.0)
                wr = a * u * w1
                dwr = a * w1
            else:
                a = (2.0 * n - 1.0) / np.sqrt((n - m) * (n + m))
                b = np.sqrt((n - 1.0 - m) * (n - 1.0 + m) / ((n - m) * (n + m)))
                wr = a * u * w1 - b * w2
                dwr = a * (w1 + u * dw1) - b * dw2
            cp = cpos[:, n, m][:, None]
            tp = php * cp
            f[:, n] += wr * tp
            g[:, n] += (du * dwr) * tp
            if m > 0:
                cn = cneg[:, n, m][:, None]
                tm = phm * cn
                f[:, n] += wr * tm
                g[:, n] += (du * dwr) * tm
                # d/dtheta of the transverse phases w+-^m contributes m w^{m-1} w'
                g[:, n] += (m * dw) * wr * (php_prev * cp + phm_prev * cn)
            if n > m:
                w2, dw2 = w1, dw1
                w1, dw1 = wr, dwr
            else:
                w1, dw1 = wr, dwr
    # invert: DFT in phi, combined value/derivative projection in (n, m)
    F = np.fft.fft(f, axis=-1) / J
    G = np.fft.fft(g, axis=-1) / J
    out = np.zeros_like(coef)
    for m in range(-P, P + 1):
        kbin = m % J
        am = abs(m)
        num = F[:, :, kbin] * plan.w_eq[None, :, am] - G[:, :, kbin] * plan.dw_eq[None, :, am]
        out[:, :, m + P] = num / plan.denom[None, :, am]
    n = np.arange(P + 1)[:, None]
    m = np.arange(-P, P + 1)[None, :]
    out[:, np.abs(m) > n] = 0.0
    return out[0] if squeeze else out


def _diag_w(m, u):
    """W_m^m(u): constant in u, from the diagonal recurrence."""
    v = 1.0
    for t in range(1, m + 1):
        v *= -np.sqrt((2 * t - 1.0) / (2.0 * t))
    return np.full(u.shape, v, np.complex128)


def rot_y_fft(e, cos_a, sin_a):
    """Rotate an expansion about the y-axis (FFT scheme, O(P^3))."""
    out = rot_y_coef(e.coef, cos_a, sin_a)
    cls = Mpole3 if isinstance(e, Mpole3) else Local3
    return cls(e.center, e.order, e.kernel, e.kappa, e.scale, out)


def rot_y_reference(coef, alpha):
    """Wigner-d reference rotation of a single coefficient block, O(P^4).

    Matches rot_y_coef(coef, cos(alpha), sin(alpha)).  The library's
    harmonic convention differs from the Wigner one by the diagonal phase
    S = diag((-1)^max(m, 0)), and the angle enters with opposite sense:
    the applied matrix is S d^n(-alpha) S.
    """
    from .specfun import wigner_d

    alpha = complex(alpha)
    P = coef.shape[0] - 1
    out = np.zeros_like(coef)
    for n in range(P + 1):
        d = wigner_d(n, -alpha)
        m = np.arange(-n, n + 1)
        s = np.where((m > 0) & (m % 2 == 1), -1.0, 1.0)
        out[n, P - n : P + n + 1] = s * (d @ (s * coef[n, P - n : P + n + 1]))
    return out


# ----------------------------------------------------------------------------
# Laplace z-axis translations (batched); signs pinned against the general
# operators and direct sums
# ----------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _zshift_m2m_factors(order):
    """G[j, n', k] = A_{j-n'}^0 A_{n'}^k / A_j^k for n' <= j, |k| <= n'."""
    P = order
    la, valid = _log_anm(P)
    j = np.arange(P + 1)[:, None, None]
    npr = np.arange(P + 1)[None, :, None]
    k = np.arange(-P, P + 1)[None, None, :]
    dm = j - npr
    ok = (dm >= 0) & (np.abs(k) <= npr)
    la0 = -0.5 * 2.0 * _sp.gammaln(np.maximum(dm, 0) + 1.0)
    lank = np.where(np.abs(k) <= npr, la[npr, k + P], -np.inf)
    lajk = np.where(np.abs(k) <= j, la[j, k + P], np.inf)
    with np.errstate(invalid="ignore"):
        G = np.where(ok & (np.abs(k) <= j), np.exp(la0 + lank - lajk), 0.0)
    return G


def lap3_m2m_z_batch(coef, delta, scale_src, scale_dst, sigma_z=1.0):
    """Shift multipole stacks along +-z by complex length delta = rho_0.

    delta is the spherical radius of the shift old - new; sigma_z = cos
    theta_0 in {+1, -1} selects the axis direction.
    """
    B, P1, _ = coef.shape
    P = P1 - 1
    G = _zshift_m2m_factors(P)
    t = sigma_z * np.asarray(delta) / np.asarray(scale_dst)
    rp = _powers(t, P)                                  # (B, j-n)
    sp = _powers(np.asarray(scale_src) / np.asarray(scale_dst), P)
    idx = np.maximum(np.arange(P + 1)[:, None] - np.arange(P + 1)[None, :], 0)
    out = np.einsum("jnk,bjn,bnk->bjk", G, rp[:, idx], sp[:, :, None] * coef)
    return out


@lru_cache(maxsize=64)
def _zshift_m2l_factors(order_out, order_in):
    """H[j, n, k] = A_j^k A_n^k / A_{j+n}^0 with |k| <= min(j, n)."""
    Po, Pi = order_out, order_in
    P = max(Po, Pi)
    la, _ = _log_anm(P)
    j = np.arange(Po + 1)[:, None, None]
    n = np.arange(Pi + 1)[None, :, None]
    k = np.arange(-P, P + 1)[None, None, :]
    ok = (np.abs(k) <= j) & (np.abs(k) <= n)
    lajk = np.where(np.abs(k) <= j, la[j, k + P], -np.inf)
    lank = np.where(np.abs(k) <= n, la[n, k + P], -np.inf)
    la0 = -_sp.gammaln(j + n + 1.0)
    with np.errstate(invalid="ignore"):
        H = np.where(ok, np.exp(lajk + lank - la0), 0.0)
    return H


def lap3_m2l_z_batch(coef, delta, scale_src, scale_dst, order_out, sigma_z=1.0):
    """Convert multipole stacks to local stacks across a z shift."""
    B, P1, _ = coef.shape
    Pi = P1 - 1
    Po = order_out
    P = max(Po, Pi)
    H = _zshift_m2l_factors(Po, Pi)
    delta = np.asarray(delta)
    pj = _powers(sigma_z * np.asarray(scale_dst) / delta, Po)
    qn = _powers(-sigma_z * np.asarray(scale_src) / delta, Pi)
    k = np.arange(-P, P + 1)
    ksign = np.where(k % 2 == 0, 1.0, -1.0)
    if Pi != P or Po != P:
        padded = np.zeros((B, Pi + 1, 2 * P + 1), np.complex128)
        padded[:, :, P - Pi : P + Pi + 1] = coef
        coef = padded
    out = np.einsum("jnk,bn,bnk->bjk", H, qn, coef)
    out *= ksign[None, None, :]
    out *= pj[:, :, None]
    out /= delta[:, None, None]
    if Po != P:
        out = out[:, :, P - Po : P + Po + 1]
    return out


@lru_cache(maxsize=64)
def _zshift_l2l_factors(order):
    """G[j, n, k] = A_{n-j}^0 A_j^k / A_n^k for n >= j, |k| <= j."""
    P = order
    la, _ = _log_anm(P)
    j = np.arange(P + 1)[:, None, None]
    n = np.arange(P + 1)[None, :, None]
    k = np.arange(-P, P + 1)[None, None, :]
    ok = (n >= j) & (np.abs(k) <= j) & (np.abs(k) <= n)
    la0 = -_sp.gammaln(np.maximum(n - j, 0) + 1.0)
    lajk = np.where(np.abs(k) <= j, la[j, k + P], -np.inf)
    lank = np.where(np.abs(k) <= n, la[n, k + P], np.inf)
    with np.errstate(invalid="ignore"):
        G = np.where(ok, np.exp(la0 + lajk - lank), 0.0)
    return G


def lap3_l2l_z_batch(coef, delta, scale_src, scale_dst, sigma_z=1.0):
    """Re-center local stacks along the z-axis; exact finite sums."""
    B, P1, _ = coef.shape
    P = P1 - 1
    G = _zshift_l2l_factors(P)
    t = -sigma_z * np.asarray(delta) / np.asarray(scale_src)
    rp = _powers(t, P)
    h = _powers(np.asarray(scale_dst) / np.asarray(scale_src), P)
    idx = np.maximum(np.arange(P + 1)[None, :] - np.arange(P + 1)[:, None], 0)
    out = np.einsum("jnk,bjn,bnk->bjk", G, rp[:, idx], coef)
    out *= h[:, :, None]
    return out


# ----------------------------------------------------------------------------
# General O(P^4) Laplace translations (reference path for point-and-shoot)
# ----------------------------------------------------------------------------

def _shift_sphere(old_center, new_center):
    d = np.asarray(old_center, np.complex128) - np.asarray(new_center, np.complex128)
    return d


def _unscaled(coef, scale, sign):
    """Undo the scale^n storage convention (sign=+1 multipole, -1 local)."""
    P = coef.shape[0] - 1
    f = np.asarray(scale, float) ** (sign * np.arange(P + 1))
    return coef * f[:, None]


def _eps_i(e):
    """Real value of i**e for even exponents e."""
    return float((1j ** e).real)


def _first_j(m, k):
    # i^{|k| - |m| - |k-m|}; -1 exactly when m, k share a sign and |m| > |k|
    return _eps_i(abs(k) - abs(m) - abs(k - m))


def _second_j(m, k):
    return _eps_i(abs(k - m) - abs(k) - abs(m))


def _third_j(n, m, k, j):
    return _eps_i(abs(m) - abs(m - k) - abs(k)) * (-1.0) ** (n + j)


def _anm(n, m):
    return (-1.0) ** n * np.exp(
        -0.5 * (_sp.gammaln(n - m + 1.0) + _sp.gammaln(n + m + 1.0))
    )


def m2m_lap3_general(e: Mpole3, new_center, scale=None) -> Mpole3:
    """Direct double-sum M2M; serves as the oracle for the rotation path."""
    scale = e.scale if scale is None else scale
    d = _shift_sphere(e.center, new_center)
    P = e.order
    rho, u, vp, vm = sphere_frame(d[None, :], np.zeros(3))
    Y = ynm_full(u, vp, vm, P)[0]
    rp = _powers(rho[0], P)
    M = _unscaled(e.coef, e.scale, 1)
    out = np.zeros_like(M)
    for j in range(P + 1):
        for k in range(-j, j + 1):
            acc = 0.0 + 0.0j
            for n in range(0, j + 1):
                for m in range(-n, n + 1):
                    if abs(k - m) > j - n:
                        continue
                    w = (
                        _first_j(m, k)
                        * _anm(n, m)
                        * _anm(j - n, k - m)
                        / _anm(j, k)
                    )
                    acc += w * rp[n] * Y[n, P - m] * M[j - n, P + (k - m)]
            out[j, P + k] = acc
    return Mpole3(
        np.asarray(new_center, np.complex128), P, "lap", 0.0, scale,
        _unscaled(out, 1.0 / scale, 1),
    )


def m2l_lap3_general(e: Mpole3, local_center, order_out=None, scale=None) -> Local3:
    order_out = e.order if order_out is None else order_out
    scale = e.scale if scale is None else scale
    d = _shift_sphere(e.center, local_center)
    Pi, Po = e.order, order_out
    PY = Pi + Po
    rho, u, vp, vm = sphere_frame(d[None, :], np.zeros(3))
    Y = ynm_full(u, vp, vm, PY)[0]
    rinv = _powers(1.0 / rho[0], PY + 1)
    M = _unscaled(e.coef, e.scale, 1)
    out = np.zeros((Po + 1, 2 * Po + 1), np.complex128)
    for j in range(Po + 1):
        for k in range(-j, j + 1):
            acc = 0.0 + 0.0j
            for n in range(0, Pi + 1):
                for m in range(-n, n + 1):
                    if abs(m - k) > j + n:
                        continue
                    w = (
                        _second_j(m, k)
                        * _anm(n, m)
                        * _anm(j, k)
                        / _anm(j + n, m - k)
                        * (-1.0) ** n
                    )
                    acc += w * Y[j + n, PY + (m - k)] * rinv[j + n + 1] * M[n, P_col(m, Pi)]
            out[j, Po + k] = acc
    return Local3(
        np.asarray(local_center, np.complex128), Po, "lap", 0.0, scale,
        _unscaled(out, scale, 1),
    )


def P_col(m, order):
    return order + m


def l2l_lap3_general(e: Local3, new_center, scale=None) -> Local3:
    scale = e.scale if scale is None else scale
    d = _shift_sphere(e.center, new_center)
    P = e.order
    rho, u, vp, vm = sphere_frame(d[None, :], np.zeros(3))
    Y = ynm_full(u, vp, vm, P)[0]
    rp = _powers(rho[0], P)
    L = _unscaled(e.coef, e.scale, -1)
    out = np.zeros_like(L)
    for j in range(P + 1):
        for k in range(-j, j + 1):
            acc = 0.0 + 0.0j
            for n in range(j, P + 1):
                for m in range(-n, n + 1):
                    if abs(m - k) > n - j:
                        continue
                    w = (
                        _third_j(n, m, k, j)
                        * _anm(n - j, m - k)
                        * _anm(j, k)
                        / _anm(n, m)
                    )
                    acc += w * Y[n - j, P + (m - k)] * rp[n - j] * L[n, P + m]
            out[j, P + k] = acc
    return Local3(
        np.asarray(new_center, np.complex128), P, "lap", 0.0, scale,
        _unscaled(out, 1.0 / scale, -1),
    )


# ----------------------------------------------------------------------------
# Point-and-shoot translation
# ----------------------------------------------------------------------------

def shift_angles(d):
    """(e^{-i beta}, cos theta, sin theta, rho0, sigma_z) of a shift vector."""
    d1, d2, d3 = (complex(v) for v in d)
    s2 = d1 * d1 + d2 * d2
    if s2 == 0.0:
        if d1 != 0.0 or d2 != 0.0:
            raise DegeneratePoint("isotropic transverse shift component")
        rho0 = np.sqrt(d3 * d3)
        if rho0 == 0.0:
            return 1.0 + 0.0j, 1.0 + 0.0j, 0.0 + 0.0j, 0.0 + 0.0j, 1.0
        sigma = d3 / rho0
        if abs(sigma - 1.0) > 1e-12 and abs(sigma + 1.0) > 1e-12:
            raise DegeneratePoint("degenerate axial shift vector")
        return 1.0 + 0.0j, 1.0 + 0.0j, 0.0 + 0.0j, rho0, float(np.real(sigma))
    s = np.sqrt(s2)
    if abs(s) < _DEG_RTOL * (abs(d1) + abs(d2)):
        raise DegeneratePoint("isotropic transverse shift component")
    rho0 = np.sqrt(s2 + d3 * d3)
    if abs(rho0) < _DEG_RTOL * (abs(d1) + abs(d2) + abs(d3)):
        raise DegeneratePoint("isotropic shift vector")
    eimb = (d1 - 1j * d2) / s
    return eimb, d3 / rho0, s / rho0, rho0, 1.0


def translate_pas(e, new_center, kind, order_out=None, scale=None, rho_eval=None):
    """Rotate, shift along z, rotate back: O(P^3) translation.

    kind is one of "m2m", "m2l", "l2l".  Works for both kernels; the
    Helmholtz z-shift uses the sampling projection with radius rho_eval
    (defaults chosen from the destination scale).
    """
    new_center = np.asarray(new_center, np.complex128)
    order_out = e.order if order_out is None else order_out
    scale = e.scale if scale is None else scale
    d = np.asarray(e.center, np.complex128) - new_center
    eimb, cos_a, sin_a, rho0, sigma = shift_angles(d)
    coef = rot_y_coef(rot_z_coef(e.coef, 1.0 / eimb), cos_a, sin_a)
    if e.kernel == "lap":
        if kind == "m2m":
            out = lap3_m2m_z_batch(
                coef[None], np.array([rho0]), np.array([e.scale]),
                np.array([scale]), sigma,
            )[0]
        elif kind == "m2l":
            out = lap3_m2l_z_batch(
                coef[None], np.array([rho0]), np.array([e.scale]),
                np.array([scale]), order_out, sigma,
            )[0]
        else:
            out = lap3_l2l_z_batch(
                coef[None], np.array([rho0]), np.array([e.scale]),
                np.array([scale]), sigma,
            )[0]
    else:
        if rho_eval is None:
            rho_eval = 2.0 * scale if kind == "m2m" else scale
        out = helm3_zshift_batch(
            coef[None], np.array([sigma * rho0]), e.kappa, order_out, rho_eval,
            "h" if kind in ("m2m", "m2l") else "j",
            "h" if kind == "m2m" else "j",
        )[0]
    out = rot_z_coef(rot_y_coef(out, cos_a, -sin_a), eimb)
    cls = Local3 if kind in ("m2l", "l2l") else Mpole3
    return cls(new_center, order_out, e.kernel, e.kappa, scale, out)


# ----------------------------------------------------------------------------
# Helmholtz z-axis translations by Gauss-Legendre projection
# ----------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _gl_projection_tables(order_out, n_quad):
    """Nodes, weights, and W_n^m(x_q) (1-x^2)^{m} weights for projection."""
    x, w = np.polynomial.legendre.leggauss(n_quad)
    W = ynm_scaled_table(x.astype(np.complex128), order_out).real  # (n, m, q)
    s2 = 1.0 - x * x
    return x, w, W, s2


def helm3_zshift_batch(coef, delta, kappa, order_out, rho_eval, src_kind, dst_kind):
    """Translate Helmholtz stacks along z by sampling and projecting.

    coef: (B, Pi+1, 2Pi+1) stacks whose radial basis is src_kind ('h' for
    multipole, 'j' for local); the output stack's radial basis is dst_kind.
    delta is the signed z-shift old - new.  Samples the field's azimuthal
    modes on a ring of radius rho_eval in the destination frame, then
    projects onto scaled associated Legendre rows with the value+derivative
    safeguard.
    """
    coef = np.asarray(coef)
    B, Pi1, _ = coef.shape
    Pi = Pi1 - 1
    Po = order_out
    n_quad = int(np.floor(2.5 * max(Pi, Po)))
    n_quad = max(n_quad, Po + 2)
    x, wq, Wq, s2 = _gl_projection_tables(Po, n_quad)
    delta = np.asarray(delta, np.complex128)
    rho = float(rho_eval)
    # destination-frame ring mapped into the source frame
    zloc = rho * x[None, :] - delta[:, None]                     # (B, Q)
    rho_x = np.sqrt(rho * rho - 2.0 * rho * x[None, :] * delta[:, None] + (delta * delta)[:, None])
    if np.any(np.abs(rho_x) < _DEG_RTOL * (rho + np.abs(delta))[..., None]):
        raise DegeneratePoint("sampling ring touches the source center")
    u_x = zloc / rho_x
    tr = rho / rho_x
    drho_x = (rho - x[None, :] * delta[:, None]) / rho_x
    du_x = (x[None, :] - u_x * drho_x) / rho_x
    dtr = (rho_x - rho * drho_x) / (rho_x * rho_x)
    F = sph_h1_seq_many(kappa * rho_x, Pi) if src_kind == "h" else sph_j_seq_many(kappa * rho_x, Pi)
    from .specfun import sph_dz_from_values

    dF = sph_dz_from_values(F, kappa * rho_x) * kappa            # (n, B, Q)
    W, dW = ynm_scaled_table_du(u_x, Pi)                         # (n, m, B, Q)
    mmax = min(Pi, Po)
    trp = _powers(tr, mmax)                                      # (B, Q, m)
    # f_hat[b, m, q], g_hat[b, m, q] for m = 0..mmax (negative m via columns)
    cpos = coef[:, :, Pi:]
    cneg = np.zeros_like(cpos)
    cneg[:, :, 1:] = coef[:, :, Pi - 1 :: -1][:, :, :Pi]
    Fb = np.moveaxis(F, 0, -1)                                   # (B, Q, n)
    dFb = np.moveaxis(dF, 0, -1)
    Wb = np.moveaxis(W, (0, 1), (-2, -1))                        # (B, Q, n, m)
    dWb = np.moveaxis(dW, (0, 1), (-2, -1))
    mm = np.arange(mmax + 1)
    trd = np.zeros_like(trp)
    trd[..., 1:] = mm[1:] * trp[..., :-1]
    # value samples
    def _samples(cside):
        c = cside[:, :, : mmax + 1]
        f = np.einsum("bnm,bqn,bqnm,bqm->bmq", c, Fb, Wb[..., : mmax + 1], trp)
        g = np.einsum("bnm,bqn,bqnm,bqm->bmq", c, dFb * drho_x[:, :, None], Wb[..., : mmax + 1], trp)
        g += np.einsum("bnm,bqn,bqnm,bqm->bmq", c, Fb, dWb[..., : mmax + 1] * du_x[:, :, None, None], trp)
        g += np.einsum("bnm,bqn,bqnm,bqm->bmq", c, Fb, Wb[..., : mmax + 1], trd * dtr[:, :, None])
        return f, g
    f_pos, g_pos = _samples(cpos)
    f_neg, g_neg = _samples(cneg)
    # destination radial factors at the ring
    if dst_kind == "j":
        R = sph_j_seq_many(np.array([kappa * rho]), Po)[:, 0]
    else:
        R = sph_h1_seq_many(np.array([kappa * rho]), Po)[:, 0]
    dR = np.empty_like(R)
    dR[0] = -R[1] if Po >= 1 else 0.0
    if Po >= 1:
        nn = np.arange(1, Po + 1)
        dR[1:] = R[:-1] - (nn + 1) / (kappa * rho) * R[1:]
    dR *= kappa
    denom = R * R + dR * dR
    if np.any(denom == 0.0) or not np.all(np.isfinite(denom)):
        raise IllConditionedProjection("radial projection denominator degenerate")
    out = np.zeros((B, Po + 1, 2 * Po + 1), np.complex128)
    n_arr = np.arange(Po + 1)
    pref = (2.0 * n_arr + 1.0) / 2.0
    s2p = _powers(s2.astype(np.complex128), mmax).real           # (Q, m)
    for m in range(0, mmax + 1):
        pw = wq * s2p[:, m]                                      # (Q,)
        base = Wq[:, m, :] * pw[None, :]                         # (n, Q)
        for sgn, f, g in ((1, f_pos, g_pos), (-1, f_neg, g_neg)):
            if m == 0 and sgn < 0:
                continue
            n1 = np.einsum("nq,bq->bn", base, f[:, m, :])
            n2 = np.einsum("nq,bq->bn", base, g[:, m, :])
            val = pref[None, :] * (R[None, :] * n1 + dR[None, :] * n2) / denom[None, :]
            val = np.where(n_arr[None, :] >= m, val, 0.0)
            out[:, :, Po + sgn * m] = val
    return out


def pas_batch(
    coef,
    dvec,
    kind,
    kernel,
    kappa,
    scale_src,
    scale_dst,
    order_out,
    rho_eval=None,
    chunk=None,
):
    """Batched point-and-shoot translation of coefficient stacks.

    coef: (B, Pi+1, 2Pi+1); dvec: (B, 3) shift vectors old - new center.
    Pure z shifts skip the rotations; everything else is rotated so the
    shift lands on +z, translated, and rotated back, in memory-bounded
    chunks.
    """
    coef = np.asarray(coef)
    dvec = np.asarray(dvec, np.complex128)
    B = coef.shape[0]
    out = np.zeros((B, order_out + 1, 2 * order_out + 1), np.complex128)
    d1, d2, d3 = dvec[:, 0], dvec[:, 1], dvec[:, 2]
    s2 = d1 * d1 + d2 * d2
    pure_z = (d1 == 0) & (d2 == 0)
    s = np.sqrt(np.where(pure_z, 1.0, s2))
    if np.any(~pure_z & (np.abs(s) < _DEG_RTOL * (np.abs(d1) + np.abs(d2)))):
        raise DegeneratePoint("isotropic transverse shift component")
    rho0 = np.sqrt(s2 + d3 * d3)
    if np.any(np.abs(rho0) < _DEG_RTOL * np.abs(dvec).sum(-1)):
        raise DegeneratePoint("isotropic shift vector")
    scale_src = np.broadcast_to(np.asarray(scale_src, float), (B,))
    scale_dst = np.broadcast_to(np.asarray(scale_dst, float), (B,))
    if chunk is None:
        per_item = (coef.shape[1] ** 2) * coef.shape[2] * 16 * 6
        chunk = int(min(1024, max(48, (2 << 28) // per_item)))

    def _zop(cc, delta, sigma, ss, sd):
        if kernel == "lap":
            if kind == "m2m":
                return lap3_m2m_z_batch(cc, delta, ss, sd, sigma)
            if kind == "m2l":
                return lap3_m2l_z_batch(cc, delta, ss, sd, order_out, sigma)
            return lap3_l2l_z_batch(cc, delta, ss, sd, sigma)
        rev = rho_eval
        if rev is None:
            rev = 2.0 * float(sd.max()) if kind == "m2m" else float(sd.max())
        return helm3_zshift_batch(
            cc, sigma * delta, kappa, order_out, rev,
            "h" if kind in ("m2m", "m2l") else "j",
            "h" if kind == "m2m" else "j",
        )

    idx_z = np.nonzero(pure_z)[0]
    if idx_z.size:
        rz = np.sqrt(d3[idx_z] * d3[idx_z])
        nonzero = rz != 0.0
        sigma = np.ones(idx_z.size)
        sigma[nonzero] = np.real(d3[idx_z][nonzero] / rz[nonzero])
        out[idx_z] = _zop(
            coef[idx_z], rz, sigma, scale_src[idx_z], scale_dst[idx_z]
        )
    idx_g = np.nonzero(~pure_z)[0]
    for lo in range(0, idx_g.size, chunk):
        ids = idx_g[lo : lo + chunk]
        eimb = (d1[ids] - 1j * d2[ids]) / s[ids]
        ca = d3[ids] / rho0[ids]
        sa = s[ids] / rho0[ids]
        cc = rot_y_coef(rot_z_coef(coef[ids], 1.0 / eimb), ca, sa)
        cc = _zop(cc, rho0[ids], 1.0, scale_src[ids], scale_dst[ids])
        out[ids] = rot_z_coef(rot_y_coef(cc, ca, -sa), eimb)
    return out


def m2l_helm3_z(e: Mpole3, rho0, rho_eval, order_out=None, scale=None) -> Local3:
    """Coaxial multipole-to-local by sampling; shift old - new = (0, 0, rho0)."""
    order_out = e.order if order_out is None else order_out
    scale = e.scale if scale is None else scale
    coef = helm3_zshift_batch(
        e.coef[None], np.array([rho0], np.complex128), e.kappa, order_out,
        rho_eval, "h", "j",
    )[0]
    new_center = e.center - np.array([0.0, 0.0, 1.0]) * np.complex128(rho0)
    return Local3(new_center, order_out, "helm", e.kappa, scale, coef)


def m2m_helm3_z(e: Mpole3, rho0, rho_eval, order_out=None, scale=None) -> Mpole3:
    order_out = e.order if order_out is None else order_out
    scale = e.scale if scale is None else scale
    coef = helm3_zshift_batch(
        e.coef[None], np.array([rho0], np.complex128), e.kappa, order_out,
        rho_eval, "h", "h",
    )[0]
    new_center = e.center - np.array([0.0, 0.0, 1.0]) * np.complex128(rho0)
    return Mpole3(new_center, order_out, "helm", e.kappa, scale, coef)


def l2l_helm3_z(e: Local3, rho0, rho_eval, order_out=None, scale=None) -> Local3:
    order_out = e.order if order_out is None else order_out
    scale = e.scale if scale is None else scale
    coef = helm3_zshift_batch(
        e.coef[None], np.array([rho0], np.complex128), e.kappa, order_out,
        rho_eval, "j", "j",
    )[0]
    new_center = e.center - np.array([0.0, 0.0, 1.0]) * np.complex128(rho0)
    return Local3(new_center, order_out, "helm", e.kappa, scale, coef)
