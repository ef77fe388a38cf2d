import numpy as np
import pytest

from zfmm import specfun
from zfmm.errors import Overflow

# frozen 60-digit oracle values (mpmath, dps=60)
J_ORACLE = {
    0: -0.16722596191322106617 - 0.17951288464447692393j,
    5: 0.023348709747935467019 + 0.017430393883191595665j,
    10: 7.8296650195662309771e-7 + 5.1881861308010011965e-6j,
}
H_ORACLE = {
    0: -0.089019102159229209439 + 0.024848514040483494554j,
    7: 0.11374017567986419267 + 0.082801078383806305878j,
}
SPH_J_ORACLE = {
    0: -0.22054559311494041557 - 0.057584456435123204879j,
    3: 0.23948397717590202228 + 0.024604773137460563158j,
}
ERFC_1 = 0.15729920705028513066


class TestCylindrical:
    def test_j_at_zero(self):
        seq = specfun.bessel_j_seq(0.0, 3)
        assert np.allclose(seq.values, [1, 0, 0, 0])

    def test_j_reflection(self):
        seq = specfun.bessel_j_seq(1 + 0.3j, 6)
        for n in range(1, 7):
            assert seq[-n] == pytest.approx((-1.0) ** n * seq[n])

    def test_j_vs_series_oracle(self):
        seq = specfun.bessel_j_seq(2.7 + 0.4j, 10)
        for n, ref in J_ORACLE.items():
            assert abs(seq[n] - ref) <= 1e-13 * abs(ref)

    def test_h_vs_oracle(self):
        seq = specfun.hankel_h1_seq(10 + 1j, 7)
        for n, ref in H_ORACLE.items():
            assert abs(seq[n] - ref) <= 1e-12 * abs(ref)

    def test_wronskian(self):
        z = 3.1 + 0.2j
        J = specfun.bessel_j_seq(z, 21)
        H = specfun.hankel_h1_seq(z, 21)
        target = 2j / (np.pi * z)
        for n in range(20):
            lhs = J[n + 1] * H[n] - J[n] * H[n + 1]
            assert abs(lhs - target) <= 1e-10 * abs(target)

    def test_overflow_reported(self):
        with pytest.raises(Overflow):
            specfun.hankel_h1_seq(1e-8, 300)

    def test_real_reduction(self):
        import mpmath as mp

        mp.mp.dps = 30
        seq = specfun.bessel_j_seq(7.3, 12)
        for n in range(13):
            assert abs(seq[n] - complex(mp.besselj(n, 7.3))) < 1e-13


class TestSpherical:
    def test_closed_forms(self):
        z = 1.3 + 0.1j
        j = specfun.sph_seq("j", z, 2)
        assert j[0] == pytest.approx(np.sin(z) / z, rel=1e-13)
        h = specfun.sph_seq("h", 2.0, 2)
        assert h[0] == pytest.approx(-1j * np.exp(2j) / 2.0, rel=1e-13)

    def test_half_order_cross_check(self):
        z = 4 + 0.5j
        seq = specfun.sph_seq("j", z, 3)
        for n, ref in SPH_J_ORACLE.items():
            assert abs(seq[n] - ref) <= 1e-12 * abs(ref)

    def test_miller_path_matches_half_order(self):
        # downward-recurrence evaluator vs the half-order route, n <= 30
        from zfmm.fmm3d import sph_j_seq_many

        z = 4 + 0.5j
        a = sph_j_seq_many(np.array([z]), 30)[:, 0]
        b = specfun.sph_seq("j", z, 30).values
        assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max()

    def test_upward_h_matches_half_order(self):
        from zfmm.fmm3d import sph_h1_seq_many

        z = 3.5 + 0.8j
        a = sph_h1_seq_many(np.array([z]), 25)[:, 0]
        b = specfun.sph_seq("h", z, 25).values
        assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max()

    def test_derivative_relation(self):
        z = 2.2 + 0.3j
        vals = specfun.sph_seq("j", z, 11).values
        der = specfun.sph_dz_from_values(vals[:, None], np.array([z]))[:, 0]
        h = 1e-6
        for n in (0, 4, 10):
            fd = (
                specfun.sph_seq("j", z + h, n).values[n]
                - specfun.sph_seq("j", z - h, n).values[n]
            ) / (2 * h)
            assert abs(der[n] - fd) < 1e-8


class TestLegendre:
    def test_first_two(self, rng):
        z = rng.normal() + 0.2j
        seq = specfun.legendre_seq(np.array([z]), 5)
        assert seq[0][0] == 1.0
        assert seq[1][0] == z

    def test_at_one(self):
        seq = specfun.legendre_seq(np.array([1.0 + 0j]), 30)
        assert np.abs(seq[:, 0] - 1.0).max() < 1e-12

    def test_modulus_bound(self, rng):
        # |P_n(cos a)| <= max(|e^{ina}|, |e^{-ina}|), complex a
        for _ in range(100):
            alpha = rng.normal() + 1j * 0.3 * rng.normal()
            seq = specfun.legendre_seq(np.array([np.cos(alpha)]), 40)
            for n in range(41):
                bound = max(abs(np.exp(1j * n * alpha)), abs(np.exp(-1j * n * alpha)))
                assert np.abs(seq[n][0]) <= bound * (1 + 1e-12)


class TestAssocLegendre:
    def test_normalization(self):
        tab = specfun.assoc_legendre_norm(np.array([0.37 + 0j]), 0)
        assert tab[0, 0, 0] == pytest.approx(np.sqrt(1 / (4 * np.pi)))

    def test_orthogonality(self):
        P = 20
        x, w = np.polynomial.legendre.leggauss(2 * P + 2)
        tab = specfun.assoc_legendre_norm(x.astype(complex), P).real
        for m in (0, 1, 3, 11):
            gram = np.einsum("nq,kq,q->nk", tab[:, m], tab[:, m], w)
            expect = np.eye(P + 1) / (2 * np.pi)
            expect[:m] = gram[:m]
            expect[:, :m] = gram[:, :m]
            assert np.abs(gram - expect).max() < 1e-10

    def test_real_complex_continuity(self):
        zr = specfun.assoc_legendre_norm(np.array([0.4 + 0j]), 10)
        zc = specfun.assoc_legendre_norm(np.array([0.4 + 1e-300j]), 10)
        assert np.abs(zr - zc).max() < 1e-14

    def test_equator_tables(self):
        P = 12
        val, dth = specfun.legendre_bar_equator(P)
        ref = specfun.assoc_legendre_norm(np.array([0.0 + 0j]), P)[:, :, 0].real
        assert np.abs(val - ref).max() < 1e-13
        # finite-difference theta derivative at theta = pi/2
        h = 1e-6
        up = specfun.assoc_legendre_norm(np.array([np.cos(np.pi / 2 + h) + 0j]), P)[:, :, 0].real
        dn = specfun.assoc_legendre_norm(np.array([np.cos(np.pi / 2 - h) + 0j]), P)[:, :, 0].real
        fd = (up - dn) / (2 * h)
        assert np.abs(dth - fd).max() < 1e-8
        # exactly one of value/derivative vanishes for each (n, m)
        for n in range(P + 1):
            for m in range(n + 1):
                assert (abs(val[n, m]) < 1e-15) != (abs(dth[n, m]) < 1e-15)


class TestSphericalHarmonics:
    def test_monopole_is_one(self):
        from zfmm.cgeom import to_spherical

        s = to_spherical(np.array([0.3, -0.2, 0.5], complex))
        assert specfun.spherical_harmonic(0, 0, s) == pytest.approx(1.0)

    def test_north_pole_kills_nonzero_m(self):
        from zfmm.cgeom import to_spherical

        s = to_spherical(np.array([0.0, 0.0, 2.0], complex))
        assert specfun.spherical_harmonic(3, 2, s) == 0.0
        assert specfun.spherical_harmonic(3, 0, s) != 0.0

    def test_addition_formula_complex_angles(self, rng):
        from zfmm.cgeom import to_spherical

        for _ in range(25):
            a = rng.normal(size=(2, 3)) + 0.15j * rng.normal(size=(2, 3))
            s1, s2 = to_spherical(a[0]), to_spherical(a[1])
            cos_g = s1.cos_theta * s2.cos_theta + s1.sin_theta * s2.sin_theta * 0.5 * (
                s1.eip * s2.eim + s1.eim * s2.eip
            )
            for n in (1, 4, 7):
                lhs = specfun.legendre_seq(np.array([cos_g]), n)[n][0]
                rhs = sum(
                    specfun.spherical_harmonic(n, -m, s1)
                    * specfun.spherical_harmonic(n, m, s2)
                    for m in range(-n, n + 1)
                )
                assert abs(lhs - rhs) < 1e-11


class TestWignerD:
    def test_identity(self):
        for n in (0, 1, 5):
            d = specfun.wigner_d(n, 0.0)
            assert np.abs(d - np.eye(2 * n + 1)).max() < 1e-14

    def test_orthogonality_real_angle(self, rng):
        for n in (2, 6, 10):
            d = specfun.wigner_d(n, rng.normal())
            assert np.abs(d @ d.T - np.eye(2 * n + 1)).max() < 1e-10

    def test_composition(self, rng):
        for n in range(1, 11):
            a1, a2 = rng.normal(), rng.normal()
            lhs = specfun.wigner_d(n, a1) @ specfun.wigner_d(n, a2)
            rhs = specfun.wigner_d(n, a1 + a2)
            assert np.abs(lhs - rhs).max() < 1e-9


class TestErfc:
    def test_at_zero(self):
        assert specfun.erfc_real(0.0) == 1.0

    def test_reflection(self, rng):
        t = rng.normal(size=20)
        assert np.abs(specfun.erfc_real(-t) - (2 - specfun.erfc_real(t))).max() < 1e-14

    def test_oracle(self):
        assert abs(specfun.erfc_real(1.0) - ERFC_1) < 1e-13


def _graf_config(rng):
    """Random admissible (u, w, alpha) with |w e^{+-i alpha}| well below |u|."""
    u = (2.5 + rng.random()) * np.exp(0.15j * rng.normal())
    w = (0.3 + 0.3 * rng.random()) * np.exp(0.15j * rng.normal())
    alpha = rng.normal() + 0.15j * rng.normal()
    return u, w, alpha


class TestAdditionTruncation:
    def test_graf_hankel_bound(self, rng):
        for _ in range(100):
            u, w, alpha = _graf_config(rng)
            z = np.sqrt(u * u + w * w - 2 * u * w * np.cos(alpha))
            c = 1.0 / max(
                abs(w * np.exp(1j * alpha) / u), abs(w * np.exp(-1j * alpha) / u)
            )
            exact = specfun.hankel_h1_seq(z, 0)[0]
            for P in (10, 20, 40):
                H = specfun.hankel_h1_seq(u, P)
                J = specfun.bessel_j_seq(w, P)
                total = sum(
                    H[n] * J[n] * np.exp(1j * n * alpha)
                    + (H[-n] * J[-n] * np.exp(-1j * n * alpha) if n else 0.0)
                    for n in range(P + 1)
                )
                bound = 2.0 / (P * np.pi * (c - 1.0)) * c ** (-P)
                floor = 1e-13 * max(abs(exact), 1.0)  # measurement noise
                assert abs(exact - total) <= 10.0 * bound + floor

    def test_gegenbauer_spherical_bound(self, rng):
        for _ in range(100):
            u, w, alpha = _graf_config(rng)
            z = np.sqrt(u * u + w * w - 2 * u * w * np.cos(alpha))
            c = 1.0 / max(
                abs(w * np.exp(1j * alpha) / u), abs(w * np.exp(-1j * alpha) / u)
            )
            exact = -1j * np.exp(1j * z) / z
            for P in (10, 20, 40):
                h = specfun.sph_seq("h", u, P)
                j = specfun.sph_seq("j", w, P)
                pn = specfun.legendre_seq(np.array([np.cos(alpha)]), P)[:, 0]
                total = sum(
                    (2 * n + 1) * j[n] * h[n] * pn[n] for n in range(P + 1)
                )
                bound = 1.0 / (np.sqrt(2.0) * abs(u) * (c - 1.0)) * c ** (-P)
                floor = 1e-13 * max(abs(exact), 1.0)  # measurement noise
                assert abs(exact - total) <= 10.0 * bound + floor
