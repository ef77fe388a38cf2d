"""Expansion formation, evaluation, and translation for 2-D kernels.

Complexified polar coordinates factor through the pair z = x1 + i x2,
w = x1 - i x2 (independent complex variables here, unlike the real case):
r e^{i phi} = z, r e^{-i phi} = w, r^2 = z w.  The Laplace "+" coefficient
family is a Laurent/Taylor series in w, the "-" family one in z, so every
operator below reduces to binomial-weighted power sums in one variable.

Laplace multipole coefficients are stored scaled: mp[n] = M_n^+ / scale^n
and local lp[n] = L_n^+ * scale^n, which keeps dynamic range bounded for
deep trees.  Potentials are independent of the scale choice.

Helmholtz expansions carry coefficients for orders -P..P (offset by P in
storage) with J_n / H_n^(1) radial factors; translation kernels are
Toeplitz in the order difference.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import DegeneratePoint, Overflow

_DEG_RTOL = 1e-12


def _zw(points, center):
    d = np.asarray(points, dtype=np.complex128) - np.asarray(center, np.complex128)
    return d[..., 0] + 1j * d[..., 1], d[..., 0] - 1j * d[..., 1]


def _radius(z, w, size_hint):
    r = np.sqrt(z * w)
    if np.any(np.abs(r) < _DEG_RTOL * size_hint):
        raise DegeneratePoint("isotropic point relative to expansion center")
    return r


def _powers(t, order):
    """t^0 .. t^order along a new last axis."""
    t = np.asarray(t, dtype=np.complex128)
    out = np.empty(t.shape + (order + 1,), dtype=np.complex128)
    out[..., 0] = 1.0
    if order >= 1:
        out[..., 1:] = t[..., None]
        np.cumprod(out[..., 1:], axis=-1, out=out[..., 1:])
    return out


@dataclass
class MpoleLap2:
    center: np.ndarray
    order: int
    scale: float
    m0: complex
    mp: np.ndarray  # index n = 0..P, entry 0 unused; stores M_n^+ / scale^n
    mm: np.ndarray


@dataclass
class LocalLap2:
    center: np.ndarray
    order: int
    scale: float
    l0: complex
    lp: np.ndarray  # index n = 0..P, entry 0 unused; stores L_n^+ * scale^n
    lm: np.ndarray


@dataclass
class MpoleHelm2:
    center: np.ndarray
    order: int
    kappa: float
    scale: float
    coef: np.ndarray  # orders -P..P at offset P


@dataclass
class LocalHelm2:
    center: np.ndarray
    order: int
    kappa: float
    scale: float
    coef: np.ndarray


# ----------------------------------------------------------------------------
# Laplace: formation and evaluation
# ----------------------------------------------------------------------------

def lap2_p2m_coef(z, w, charges, order, scale):
    """Scaled multipole coefficient block (m0, mp, mm) for one center."""
    charges = np.asarray(charges, dtype=np.complex128)
    n = np.arange(1, order + 1)
    pw = _powers(w / scale, order)[..., 1:]
    pz = _powers(z / scale, order)[..., 1:]
    mp = np.zeros(order + 1, np.complex128)
    mm = np.zeros(order + 1, np.complex128)
    mp[1:] = -(charges @ pw) / (2.0 * n)
    mm[1:] = -(charges @ pz) / (2.0 * n)
    return charges.sum(), mp, mm


def p2m_lap2(sources, charges, center, order, scale=1.0) -> MpoleLap2:
    """Multipole expansion of log-kernel sources about a complexified center."""
    z, w = _zw(sources, center)
    m0, mp, mm = lap2_p2m_coef(z, w, charges, order, scale)
    return MpoleLap2(np.asarray(center, np.complex128), order, scale, m0, mp, mm)


def lap2_m2p_eval(m0, mp, mm, scale, z, w, size_hint):
    r = _radius(z, w, size_hint)
    pw = _powers(scale / w, mp.shape[-1] - 1)
    pz = _powers(scale / z, mp.shape[-1] - 1)
    u = m0 * np.log(r)
    u = u + pw[..., 1:] @ mp[1:] + pz[..., 1:] @ mm[1:]
    return u


def m2p_lap2(e: MpoleLap2, targets):
    """Evaluate a Laplace multipole expansion at well-separated targets."""
    z, w = _zw(targets, e.center)
    size = np.abs(z) + np.abs(w)
    return lap2_m2p_eval(e.m0, e.mp, e.mm, e.scale, z, w, size)


def lap2_p2l_coef(z, w, charges, order, scale):
    charges = np.asarray(charges, dtype=np.complex128)
    r = _radius(z, w, np.abs(z) + np.abs(w))
    n = np.arange(1, order + 1)
    pz = _powers(scale / z, order)[..., 1:]
    pw = _powers(scale / w, order)[..., 1:]
    lp = np.zeros(order + 1, np.complex128)
    lm = np.zeros(order + 1, np.complex128)
    lp[1:] = -(charges @ pz) / (2.0 * n)
    lm[1:] = -(charges @ pw) / (2.0 * n)
    return charges @ np.log(r), lp, lm


def p2l_lap2(sources, charges, center, order, scale=1.0) -> LocalLap2:
    """Local expansion at a center from well-separated log-kernel sources."""
    z, w = _zw(sources, center)
    l0, lp, lm = lap2_p2l_coef(z, w, charges, order, scale)
    return LocalLap2(np.asarray(center, np.complex128), order, scale, l0, lp, lm)


def lap2_l2p_eval(l0, lp, lm, scale, z, w):
    pz = _powers(z / scale, lp.shape[-1] - 1)
    pw = _powers(w / scale, lp.shape[-1] - 1)
    return l0 + pz[..., 1:] @ lp[1:] + pw[..., 1:] @ lm[1:]


def l2p_lap2(e: LocalLap2, targets):
    """Evaluate a Laplace local expansion at targets inside its disk."""
    z, w = _zw(targets, e.center)
    return lap2_l2p_eval(e.l0, e.lp, e.lm, e.scale, z, w)


# ----------------------------------------------------------------------------
# Laplace: translations (batched cores + single-expansion wrappers)
# ----------------------------------------------------------------------------

def _binom_m2m(order):
    # C(k-1, k-n) for 1 <= n <= k, laid out [k, n]
    k = np.arange(order + 1)
    C = np.zeros((order + 1, order + 1))
    for kk in range(1, order + 1):
        C[kk, 1 : kk + 1] = _sp.comb(kk - 1, kk - np.arange(1, kk + 1))
    return C, k


def _binom_m2l(order_out, order_in):
    # (-1)^n C(n+k-1, k) for k, n >= 1, laid out [k, n]
    C = np.zeros((order_out + 1, order_in + 1))
    for kk in range(1, order_out + 1):
        n = np.arange(1, order_in + 1)
        C[kk, 1:] = ((-1.0) ** n) * _sp.comb(n + kk - 1, kk)
    return C


def _binom_l2l(order):
    # C(n, k) for n >= k, laid out [k, n]
    C = np.zeros((order + 1, order + 1))
    for kk in range(order + 1):
        n = np.arange(kk, order + 1)
        C[kk, kk:] = _sp.comb(n, kk)
    return C


def lap2_m2m_batch(m0, mp, mm, shift_z, shift_w, scale_src, scale_dst):
    """Shift multipole stacks (B, P+1) by per-item vectors old - new center."""
    B, P1 = mp.shape
    order = P1 - 1
    C, _ = _binom_m2m(order)
    g = _powers(np.asarray(scale_src) / np.asarray(scale_dst), order)
    uw = _powers(shift_w / np.asarray(scale_dst), order)
    uz = _powers(shift_z / np.asarray(scale_dst), order)
    idx = np.maximum(np.arange(order + 1)[:, None] - np.arange(order + 1)[None, :], 0)
    k = np.arange(1, order + 1)
    out_p = np.einsum("kn,bkn,bn->bk", C, uw[:, idx], g * mp)
    out_m = np.einsum("kn,bkn,bn->bk", C, uz[:, idx], g * mm)
    out_p[:, 1:] -= m0[:, None] * uw[:, 1:] / (2.0 * k)
    out_m[:, 1:] -= m0[:, None] * uz[:, 1:] / (2.0 * k)
    out_p[:, 0] = 0.0
    out_m[:, 0] = 0.0
    return m0.copy(), out_p, out_m


def lap2_m2l_batch(m0, mp, mm, shift_z, shift_w, scale_src, scale_dst, order_out):
    """Convert multipole stacks to local stacks across per-item shifts."""
    order_in = mp.shape[1] - 1
    C = _binom_m2l(order_out, order_in)
    sd = np.asarray(scale_dst)
    ss = np.asarray(scale_src)
    pz = _powers(sd / shift_z, order_out)
    pw = _powers(sd / shift_w, order_out)
    qz = _powers(ss / shift_z, order_in)
    qw = _powers(ss / shift_w, order_in)
    r0 = np.sqrt(shift_z * shift_w)
    lp = pz * np.einsum("kn,bn->bk", C, qz * mm)
    lm = pw * np.einsum("kn,bn->bk", C, qw * mp)
    k = np.arange(1, order_out + 1)
    lp[:, 1:] -= m0[:, None] * pz[:, 1:] / (2.0 * k)
    lm[:, 1:] -= m0[:, None] * pw[:, 1:] / (2.0 * k)
    sgn = (-1.0) ** np.arange(order_in + 1)
    l0 = m0 * np.log(r0)
    l0 = l0 + (sgn * qw * mp).sum(axis=1) + (sgn * qz * mm).sum(axis=1)
    lp[:, 0] = 0.0
    lm[:, 0] = 0.0
    return l0, lp, lm


def lap2_l2l_batch(l0, lp, lm, shift_z, shift_w, scale_src, scale_dst):
    """Re-center local stacks; exact finite sums (no truncation error)."""
    order = lp.shape[1] - 1
    C = _binom_l2l(order)
    ss = np.asarray(scale_src)
    vz = _powers(-shift_z / ss, order)
    vw = _powers(-shift_w / ss, order)
    h = _powers(np.asarray(scale_dst) / ss, order)
    idx = np.maximum(np.arange(order + 1)[None, :] - np.arange(order + 1)[:, None], 0)
    out_p = h * np.einsum("kn,bkn,bn->bk", C, vz[:, idx], lp)
    out_m = h * np.einsum("kn,bkn,bn->bk", C, vw[:, idx], lm)
    out_l0 = l0 + out_p[:, 0] + out_m[:, 0]
    out_p[:, 0] = 0.0
    out_m[:, 0] = 0.0
    return out_l0, out_p, out_m


def m2m_lap2(e: MpoleLap2, new_center, scale=None) -> MpoleLap2:
    """Shift a multipole expansion to a new (complexified) center."""
    new_center = np.asarray(new_center, np.complex128)
    scale = e.scale if scale is None else scale
    d = e.center - new_center
    z0, w0 = d[0] + 1j * d[1], d[0] - 1j * d[1]
    m0, mp, mm = lap2_m2m_batch(
        np.array([e.m0]), e.mp[None], e.mm[None],
        np.array([z0]), np.array([w0]), np.array([e.scale]), np.array([scale]),
    )
    return MpoleLap2(new_center, e.order, scale, m0[0], mp[0], mm[0])


def m2l_lap2(e: MpoleLap2, local_center, order_out=None, scale=None) -> LocalLap2:
    """Convert a multipole expansion into a local one at a separated center."""
    local_center = np.asarray(local_center, np.complex128)
    order_out = e.order if order_out is None else order_out
    scale = e.scale if scale is None else scale
    d = e.center - local_center
    z0, w0 = d[0] + 1j * d[1], d[0] - 1j * d[1]
    l0, lp, lm = lap2_m2l_batch(
        np.array([e.m0]), e.mp[None], e.mm[None],
        np.array([z0]), np.array([w0]), np.array([e.scale]), np.array([scale]),
        order_out,
    )
    return LocalLap2(local_center, order_out, scale, l0[0], lp[0], lm[0])


def l2l_lap2(e: LocalLap2, new_center, scale=None) -> LocalLap2:
    """Shift a local expansion; exact for finite expansions."""
    new_center = np.asarray(new_center, np.complex128)
    scale = e.scale if scale is None else scale
    d = e.center - new_center
    z0, w0 = d[0] + 1j * d[1], d[0] - 1j * d[1]
    l0, lp, lm = lap2_l2l_batch(
        np.array([e.l0]), e.lp[None], e.lm[None],
        np.array([z0]), np.array([w0]), np.array([e.scale]), np.array([scale]),
    )
    return LocalLap2(new_center, e.order, scale, l0[0], lp[0], lm[0])


# ----------------------------------------------------------------------------
# Helmholtz: formation and evaluation
# ----------------------------------------------------------------------------

def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise Overflow(f"{what} overflowed the exponent range")
    return a


def bessel_j_table(z, order):
    """J_t(z_b) for t = 0..order over an argument array; shape (B, order+1)."""
    z = np.atleast_1d(np.asarray(z, np.complex128))
    t = np.arange(order + 1)
    vals = _sp.jv(t[None, :], z[:, None])
    out = np.asarray(vals, np.complex128)
    zero = z == 0
    if np.any(zero):
        out[zero] = 0.0
        out[zero, 0] = 1.0
    return _check_finite(out, "Bessel J table")


def hankel_h1_table(z, order):
    """H^(1)_t(z_b) for t = 0..order by stable upward recurrence; (B, order+1)."""
    z = np.atleast_1d(np.asarray(z, np.complex128))
    out = np.empty((z.shape[0], order + 1), np.complex128)
    out[:, 0] = _sp.hankel1(0, z)
    if order >= 1:
        out[:, 1] = _sp.hankel1(1, z)
    for t in range(1, order):
        out[:, t + 1] = (2.0 * t / z) * out[:, t] - out[:, t - 1]
    return _check_finite(out, "Hankel H1 table")


def helm2_p2m_coef(z, w, charges, kappa, order):
    """Coefficients M_n = sum_j J_n(kappa r_j) e^{-i n phi_j} sigma_j, n=-P..P."""
    charges = np.asarray(charges, np.complex128)
    r = np.sqrt(z * w)
    J = bessel_j_table(kappa * r, order)
    # e^{-i n phi} = (w/r)^n for n >= 0; on r == 0 only n = 0 survives (J_n(0)=0)
    safe_r = np.where(r == 0, 1.0, r)
    em = _powers(w / safe_r, order)
    ep = _powers(z / safe_r, order)
    coef = np.zeros(2 * order + 1, np.complex128)
    coef[order:] = charges @ (J * em)
    sgn = (-1.0) ** np.arange(order, 0, -1)
    coef[:order] = charges @ (J[:, :0:-1] * ep[:, :0:-1]) * sgn
    return coef


def p2m_helm2(sources, charges, center, kappa, order, scale=1.0) -> MpoleHelm2:
    z, w = _zw(sources, center)
    coef = helm2_p2m_coef(z, w, charges, kappa, order)
    return MpoleHelm2(np.asarray(center, np.complex128), order, kappa, scale, coef)


def helm2_radial_angular(z, w, kappa, order, kind):
    """Radial table F_n(kappa r) e^{i n phi} for n = -P..P at given points."""
    r = _radius(z, w, np.abs(z) + np.abs(w))
    F = bessel_j_table(kappa * r, order) if kind == "j" else hankel_h1_table(kappa * r, order)
    ep = _powers(z / r, order)
    em = _powers(w / r, order)
    out = np.empty(z.shape + (2 * order + 1,), np.complex128)
    out[..., order:] = F * ep
    sgn = (-1.0) ** np.arange(order, 0, -1)
    out[..., :order] = F[:, :0:-1] * em[:, :0:-1] * sgn
    return out


def m2p_helm2(e: MpoleHelm2, targets):
    """Evaluate sum_n M_n H_n(kappa r) e^{i n phi} at separated targets."""
    z, w = _zw(targets, e.center)
    basis = helm2_radial_angular(z, w, e.kappa, e.order, "h")
    return basis @ e.coef


def p2l_helm2(sources, charges, center, kappa, order, scale=1.0) -> LocalHelm2:
    """Local expansion from separated sources: L_n = sum H_n(kr) e^{-in phi} sigma."""
    z, w = _zw(sources, center)
    charges = np.asarray(charges, np.complex128)
    r = _radius(z, w, np.abs(z) + np.abs(w))
    H = hankel_h1_table(kappa * r, order)
    em = _powers(w / r, order)
    ep = _powers(z / r, order)
    coef = np.zeros(2 * order + 1, np.complex128)
    coef[order:] = charges @ (H * em)
    sgn = (-1.0) ** np.arange(order, 0, -1)
    coef[:order] = charges @ (H[:, :0:-1] * ep[:, :0:-1]) * sgn
    return LocalHelm2(np.asarray(center, np.complex128), order, kappa, scale, coef)


def l2p_helm2(e: LocalHelm2, targets):
    """Evaluate sum_n L_n J_n(kappa r) e^{i n phi} at interior targets."""
    z, w = _zw(targets, e.center)
    basis = helm2_radial_angular(z, w, e.kappa, e.order, "j")
    return basis @ e.coef


# ----------------------------------------------------------------------------
# Helmholtz translations: Toeplitz kernels in the order difference
# ----------------------------------------------------------------------------

def helm2_shift_kernel(shift_z, shift_w, kappa, max_t, kind):
    """S_t = F_t(kappa r0) e^{-i t phi0} for t = -max_t..max_t; shape (B, 2T+1)."""
    z = np.atleast_1d(shift_z)
    w = np.atleast_1d(shift_w)
    r = np.sqrt(z * w)
    zero = (z == 0) & (w == 0)
    if np.any(np.abs(r) < _DEG_RTOL * (np.abs(z) + np.abs(w))):
        raise DegeneratePoint("isotropic shift vector in Helmholtz translation")
    if np.any(zero) and kind != "j":
        raise DegeneratePoint("Hankel shift kernel needs a nonzero shift")
    safe_r = np.where(zero, 1.0, r)
    F = (
        bessel_j_table(kappa * np.where(zero, 0.0, r), max_t)
        if kind == "j"
        else hankel_h1_table(kappa * r, max_t)
    )
    em = _powers(w / safe_r, max_t)
    ep = _powers(z / safe_r, max_t)
    out = np.empty((z.shape[0], 2 * max_t + 1), np.complex128)
    out[:, max_t:] = F * em
    sgn = (-1.0) ** np.arange(max_t, 0, -1)
    out[:, :max_t] = F[:, :0:-1] * ep[:, :0:-1] * sgn
    return out


def helm2_translate_batch(coef, shift_z, shift_w, kappa, order_out, kind):
    """Apply sum_n S_{n-m} c_n for stacks of coefficient rows (B, 2P_in+1)."""
    order_in = (coef.shape[1] - 1) // 2
    max_t = order_in + order_out
    S = helm2_shift_kernel(shift_z, shift_w, kappa, max_t, kind)
    m = np.arange(-order_out, order_out + 1)
    n = np.arange(-order_in, order_in + 1)
    idx = (m[:, None] - n[None, :]) + max_t
    # chunk the gather to bound memory at large batch sizes
    B = coef.shape[0]
    out = np.empty((B, 2 * order_out + 1), np.complex128)
    step = max(1, (1 << 22) // (idx.size or 1))
    for lo in range(0, B, step):
        hi = min(B, lo + step)
        out[lo:hi] = np.einsum("bmn,bn->bm", S[lo:hi][:, idx], coef[lo:hi])
    return out


def _helm2_shift_vec(old_center, new_center):
    d = np.asarray(old_center, np.complex128) - np.asarray(new_center, np.complex128)
    return np.array([d[0] + 1j * d[1]]), np.array([d[0] - 1j * d[1]])


def m2m_helm2(e: MpoleHelm2, new_center, order_out=None) -> MpoleHelm2:
    order_out = e.order if order_out is None else order_out
    z0, w0 = _helm2_shift_vec(e.center, new_center)
    coef = helm2_translate_batch(e.coef[None], z0, w0, e.kappa, order_out, "j")[0]
    return MpoleHelm2(np.asarray(new_center, np.complex128), order_out, e.kappa, e.scale, coef)


def m2l_helm2(e: MpoleHelm2, local_center, order_out=None) -> LocalHelm2:
    order_out = e.order if order_out is None else order_out
    z0, w0 = _helm2_shift_vec(e.center, local_center)
    coef = helm2_translate_batch(e.coef[None], z0, w0, e.kappa, order_out, "h")[0]
    return LocalHelm2(np.asarray(local_center, np.complex128), order_out, e.kappa, e.scale, coef)


def l2l_helm2(e: LocalHelm2, new_center, order_out=None) -> LocalHelm2:
    order_out = e.order if order_out is None else order_out
    z0, w0 = _helm2_shift_vec(e.center, new_center)
    coef = helm2_translate_batch(e.coef[None], z0, w0, e.kappa, order_out, "j")[0]
    return LocalHelm2(np.asarray(new_center, np.complex128), order_out, e.kappa, e.scale, coef)
