"""Special functions with complex arguments used by the expansion machinery.

Cylindrical and spherical Bessel/Hankel sequences are backed by scipy's
Amos routines, which accept complex arguments; this module adds sequence
containers with negative-order reflection, overflow guards, Legendre and
normalized associated Legendre recurrences valid for complex arguments,
spherical harmonics, and a reference Wigner-d evaluator.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .cgeom import SphereC
from .errors import Overflow

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class CylSeq:
    """Cylindrical Bessel/Hankel values J_0..J_P (or H_0..H_P) at one argument.

    Negative orders follow J_{-n} = (-1)^n J_n and H_{-n} = (-1)^n H_n.
    """

    order_max: int
    values: np.ndarray

    def __getitem__(self, n: int):
        if -self.order_max <= n < 0:
            return self.values[-n] if (-n) % 2 == 0 else -self.values[-n]
        return self.values[n]


@dataclass(frozen=True)
class SphSeq:
    """Spherical Bessel/Hankel values of orders 0..P at one argument."""

    order_max: int
    values: np.ndarray

    def __getitem__(self, n: int):
        return self.values[n]


def _check_finite(values, what):
    if not np.all(np.isfinite(values)):
        raise Overflow(f"{what} sequence exhausted the exponent range")
    return values


def bessel_j_seq(z: complex, order_max: int) -> CylSeq:
    """J_0(z) .. J_P(z) for complex z."""
    if z == 0:
        vals = np.zeros(order_max + 1, dtype=np.complex128)
        vals[0] = 1.0
        return CylSeq(order_max, vals)
    n = np.arange(order_max + 1)
    vals = np.asarray(_sp.jv(n, complex(z)), dtype=np.complex128)
    return CylSeq(order_max, _check_finite(vals, "Bessel J"))


def hankel_h1_seq(z: complex, order_max: int) -> CylSeq:
    """H^(1)_0(z) .. H^(1)_P(z) for complex z != 0."""
    if z == 0:
        raise Overflow("Hankel functions are singular at z = 0")
    n = np.arange(order_max + 1)
    vals = np.asarray(_sp.hankel1(n, complex(z)), dtype=np.complex128)
    return CylSeq(order_max, _check_finite(vals, "Hankel H1"))


def sph_seq(kind: str, z: complex, order_max: int) -> SphSeq:
    """Spherical Bessel j_n or Hankel h^(1)_n sequence, n = 0..P."""
    n = np.arange(order_max + 1)
    if kind == "j":
        if z == 0:
            vals = np.zeros(order_max + 1, dtype=np.complex128)
            vals[0] = 1.0
            return SphSeq(order_max, vals)
        vals = np.sqrt(np.pi / (2.0 * complex(z))) * _sp.jv(n + 0.5, complex(z))
    elif kind == "h":
        if z == 0:
            raise Overflow("spherical Hankel functions are singular at z = 0")
        vals = np.sqrt(np.pi / (2.0 * complex(z))) * _sp.hankel1(n + 0.5, complex(z))
    else:
        raise ValueError("kind must be 'j' or 'h'")
    return SphSeq(order_max, _check_finite(np.asarray(vals, np.complex128), kind))


def sph_jn_many(z, order_max: int):
    """j_n(z) for n = 0..P over an argument array; returns (P+1, *z.shape)."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    n = np.arange(order_max + 1).reshape((-1,) + (1,) * z.ndim)
    out = np.empty((order_max + 1,) + z.shape, dtype=np.complex128)
    nz = z != 0
    if np.any(nz):
        zz = z[nz]
        out[:, nz] = np.sqrt(np.pi / (2.0 * zz)) * _sp.jv(
            n + 0.5, zz[None, ...].repeat(order_max + 1, axis=0)
        )
    if np.any(~nz):
        out[:, ~nz] = 0.0
        out[0, ~nz] = 1.0
    return out


def sph_hn_many(z, order_max: int):
    """h^(1)_n(z) for n = 0..P over an argument array."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    n = np.arange(order_max + 1).reshape((-1,) + (1,) * z.ndim)
    vals = np.sqrt(np.pi / (2.0 * z)) * _sp.hankel1(
        n + 0.5, z[None, ...].repeat(order_max + 1, axis=0)
    )
    return _check_finite(vals, "spherical Hankel")


def sph_dz_from_values(values, z):
    """d/dz of a spherical Bessel/Hankel sequence given its values.

    Applies f_0' = -f_1 and f_n' = f_{n-1} - (n+1)/z f_n along axis 0.
    """
    values = np.asarray(values)
    z = np.asarray(z, dtype=np.complex128)
    P = values.shape[0] - 1
    out = np.empty_like(values)
    out[0] = -values[1] if P >= 1 else -values[0] * 0.0
    if P >= 1:
        n = np.arange(1, P + 1).reshape((-1,) + (1,) * z.ndim)
        out[1:] = values[:-1] - (n + 1) / z * values[1:]
    return out


def legendre_seq(z, order_max: int):
    """Legendre polynomials P_0(z)..P_P(z) by the three-term recurrence."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty((order_max + 1,) + z.shape, dtype=np.complex128)
    out[0] = 1.0
    if order_max >= 1:
        out[1] = z
    for n in range(2, order_max + 1):
        out[n] = ((2 * n - 1) * z * out[n - 1] - (n - 1) * out[n - 2]) / n
    return out


def assoc_legendre_norm(z, degree_max: int):
    """Orthonormalized associated Legendre table Pbar_n^m(z).

    Returns array of shape (P+1, P+1, *z.shape) with entry [n, m] holding
    Pbar_n^m(z) for 0 <= m <= n (zero above the diagonal), where
    Pbar_n^m = sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!) P_n^m and the P_n^m carry
    the Condon-Shortley phase.  Rows satisfy
    int_{-1}^{1} Pbar_n^m Pbar_{n'}^m dz = delta_{nn'} / (2 pi).
    """
    z = np.asarray(z, dtype=np.complex128)
    P = degree_max
    s = np.sqrt(1.0 - z * z)
    out = np.zeros((P + 1, P + 1) + z.shape, dtype=np.complex128)
    out[0, 0] = np.sqrt(1.0 / FOUR_PI)
    for m in range(1, P + 1):
        out[m, m] = -np.sqrt((2 * m + 1) / (2.0 * m)) * s * out[m - 1, m - 1]
    for m in range(P):
        out[m + 1, m] = np.sqrt(2 * m + 3) * z * out[m, m]
    for m in range(P + 1):
        for n in range(m + 2, P + 1):
            a = np.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            b = np.sqrt(
                (2.0 * n + 1.0)
                * ((n - 1.0) ** 2 - m * m)
                / ((2.0 * n - 3.0) * (n * n - m * m))
            )
            out[n, m] = a * z * out[n - 1, m] - b * out[n - 2, m]
    return out


def legendre_bar_equator(degree_max: int):
    """Pbar_n^m and d/dtheta Pbar_n^m(cos theta) at theta = pi/2.

    Exactly one of the two is nonzero for each (n, m), which is what makes
    the combined value/derivative projection in the rotation and coaxial
    translation schemes well posed.
    """
    P = degree_max
    val = np.zeros((P + 1, P + 1))
    dz = np.zeros((P + 1, P + 1))  # d/dz Pbar at z = 0
    val[0, 0] = np.sqrt(1.0 / FOUR_PI)
    for m in range(1, P + 1):
        # s = 1, s' = 0 at z = 0, so diagonals carry values only
        val[m, m] = -np.sqrt((2 * m + 1) / (2.0 * m)) * val[m - 1, m - 1]
    for m in range(P):
        dz[m + 1, m] = np.sqrt(2 * m + 3) * val[m, m]
    for m in range(P + 1):
        for n in range(m + 2, P + 1):
            a = np.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            b = np.sqrt(
                (2.0 * n + 1.0)
                * ((n - 1.0) ** 2 - m * m)
                / ((2.0 * n - 3.0) * (n * n - m * m))
            )
            val[n, m] = -b * val[n - 2, m]
            dz[n, m] = a * val[n - 1, m] - b * dz[n - 2, m]
    # d/dtheta at the equator is -dPbar/dz there
    return val, -dz


def spherical_harmonic(n: int, m: int, s: SphereC):
    """Y_n^m = sqrt((n-|m|)!/(n+|m|)!) P_n^{|m|}(cos theta) e^{i m phi}.

    Unnormalized convention with Y_0^0 = 1 (differs from the orthonormal
    Pbar basis by sqrt((2n+1)/4 pi)).
    """
    if abs(m) > n:
        raise ValueError("|m| must not exceed n")
    tab = ynm_scaled_table(s.cos_theta, n)
    v = s.sin_theta * (s.eip if m >= 0 else s.eim)
    return tab[n, abs(m)] * v ** abs(m)


def ynm_scaled_table(u, degree_max: int):
    """Scaled associated Legendre table W_n^m(u) with the Y_n^m prefactor.

    W_n^m = sqrt((n-m)!/(n+m)!) P_n^m(u) / (1-u^2)^{m/2} is a polynomial in
    u, so no branch choices enter; the spherical harmonic is recovered as
    Y_n^m = W_n^{|m|}(cos theta) * (sin theta e^{+-i phi})^{|m|}.
    Returns shape (P+1, P+1, *u.shape).
    """
    u = np.asarray(u, dtype=np.complex128)
    P = degree_max
    out = np.zeros((P + 1, P + 1) + u.shape, dtype=np.complex128)
    out[0, 0] = 1.0
    for m in range(1, P + 1):
        out[m, m] = -np.sqrt((2 * m - 1) / (2.0 * m)) * out[m - 1, m - 1]
    for m in range(P):
        out[m + 1, m] = np.sqrt(2 * m + 1) * u * out[m, m]
    for m in range(P + 1):
        for n in range(m + 2, P + 1):
            a = (2.0 * n - 1.0) / np.sqrt((n - m) * (n + m))
            b = np.sqrt((n - 1.0 - m) * (n - 1.0 + m) / ((n - m) * (n + m)))
            out[n, m] = a * u * out[n - 1, m] - b * out[n - 2, m]
    return out


def ynm_scaled_table_du(u, degree_max: int):
    """W_n^m(u) together with dW_n^m/du, both polynomial recurrences."""
    u = np.asarray(u, dtype=np.complex128)
    P = degree_max
    w = ynm_scaled_table(u, P)
    dw = np.zeros_like(w)
    for m in range(P):
        dw[m + 1, m] = np.sqrt(2 * m + 1) * w[m, m]
    for m in range(P + 1):
        for n in range(m + 2, P + 1):
            a = (2.0 * n - 1.0) / np.sqrt((n - m) * (n + m))
            b = np.sqrt((n - 1.0 - m) * (n - 1.0 + m) / ((n - m) * (n + m)))
            dw[n, m] = a * (w[n - 1, m] + u * dw[n - 1, m]) - b * dw[n - 2, m]
    return w, dw


def _log_factorials(n_max: int):
    return _sp.gammaln(np.arange(n_max + 1) + 1.0)


def wigner_d(n: int, alpha) -> np.ndarray:
    """Small Wigner-d matrix d^n_{m,m'}(alpha) for complex alpha, n <= 64.

    Explicit sum over s with factorials in log space; entries are entire in
    alpha, so the same formula serves complex rotation angles.  Reference
    path only: the production rotation is the FFT scheme in fmm3d.
    """
    if n > 64:
        raise ValueError("reference Wigner-d limited to n <= 64")
    alpha = complex(alpha)
    c, s = np.cos(alpha / 2.0), np.sin(alpha / 2.0)
    lf = _log_factorials(2 * n + 1)
    out = np.zeros((2 * n + 1, 2 * n + 1), dtype=np.complex128)
    # powers of c and s can vanish; guard 0^0 = 1 via explicit power lists
    cpow = np.array([c**k for k in range(2 * n + 1)], dtype=np.complex128)
    spow = np.array([s**k for k in range(2 * n + 1)], dtype=np.complex128)
    for m in range(-n, n + 1):
        for mp in range(-n, n + 1):
            pref = 0.5 * (lf[n + mp] + lf[n - mp] + lf[n + m] + lf[n - m])
            s_min = max(0, m - mp)
            s_max = min(n + m, n - mp)
            acc = 0.0 + 0.0j
            for ss in range(s_min, s_max + 1):
                lw = pref - (
                    lf[n + m - ss] + lf[ss] + lf[mp - m + ss] + lf[n - mp - ss]
                )
                term = np.exp(lw) * cpow[2 * n + m - mp - 2 * ss] * spow[mp - m + 2 * ss]
                acc += term if (mp - m + ss) % 2 == 0 else -term
            out[m + n, mp + n] = acc
    return out


def erfc_real(t):
    """Real complementary error function, absolute accuracy ~1e-16."""
    return _sp.erfc(t)
