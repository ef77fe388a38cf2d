import numpy as np
import pytest

from zfmm import driver, oracle
from zfmm.driver import FmmConfig, choose_k, evaluate, plan_terms
from zfmm.errors import LipschitzTooLarge
from zfmm.oracle import KernelSpec, direct_eval, rel_error
from zfmm.tree import TreeConfig, build_tree

from conftest import lipschitz_cloud


def fmm_vs_direct(pts, q, cfg, spec):
    u, rep = evaluate(pts, q, pts, cfg)
    u0 = direct_eval(spec, pts, q)
    return rel_error(u, u0, q), rep


class TestPlanTerms:
    def _tree(self, rng, n=3000, depth_hint=40):
        pts = rng.random((n, 2)) + 0j
        return build_tree(pts, TreeConfig(max_pts_per_leaf=depth_hint))

    def test_laplace_crosscheck(self, rng):
        # smallest n with r^n / R^{n+1} <= eps at unit width, by direct scan
        tree = self._tree(rng)
        for dim, kernel in ((2, "lap2d"), (3, "lap3d")):
            for eps in (1e-3, 1e-6, 1e-9, 1e-12):
                cfg = FmmConfig(kernel=kernel, eps=eps)
                plan = plan_terms(cfg, tree, k=1)
                r, R = np.sqrt(dim) / 2.0, 1.5
                n = 1
                while r**n / R ** (n + 1) > eps:
                    n += 1
                assert plan.orders[2] == n
                assert np.all(plan.orders == n)  # constant across levels

    def test_laplace_monotone_in_eps(self, rng):
        tree = self._tree(rng)
        prev = 0
        for eps in (1e-2, 1e-4, 1e-8, 1e-12):
            p = plan_terms(FmmConfig(kernel="lap2d", eps=eps), tree, 1).orders[2]
            assert p >= prev
            prev = p

    def test_helmholtz_crosscheck(self, rng):
        from zfmm.specfun import bessel_j_seq, hankel_h1_seq

        tree = self._tree(rng)
        kappa = 6.0
        cfg = FmmConfig(kernel="helm2d", eps=1e-7, kappa=kappa)
        plan = plan_terms(cfg, tree, k=1)
        for lvl in range(2, tree.n_levels):
            w = tree.root_width / (1 << lvl)
            f = np.abs(hankel_h1_seq(kappa * 1.5 * w, 64).values)
            g = np.abs(bessel_j_seq(kappa * np.sqrt(2) / 2 * w, 64).values)
            ratio = f * g / (f[0] * g[0])
            n = 1
            while ratio[n] > 1e-7:
                n += 1
            assert plan.orders[lvl] == n

    def test_helmholtz_grows_with_frequency(self, rng):
        tree = self._tree(rng)
        p_lo = plan_terms(FmmConfig(kernel="helm2d", eps=1e-6, kappa=1.0), tree, 1)
        p_hi = plan_terms(FmmConfig(kernel="helm2d", eps=1e-6, kappa=40.0), tree, 1)
        assert p_hi.orders[2] > p_lo.orders[2]


class TestChooseK:
    def test_lipschitz_rules(self):
        assert choose_k(FmmConfig(kernel="lap3d", eps=1e-6), 0.05, 1.0) == 1
        assert choose_k(FmmConfig(kernel="lap3d", eps=1e-6), 0.2, 1.0) == 2
        with pytest.raises(LipschitzTooLarge):
            choose_k(FmmConfig(kernel="lap2d", eps=1e-6), 0.9, 1.0)

    def test_cancellation_rules(self):
        cfg = FmmConfig(kernel="helm3d", eps=1e-6, kappa=2 * np.pi)
        assert choose_k(cfg, 0.05, 30.0) == 2      # 30 wavelengths > 25
        assert choose_k(cfg, 0.05, 10.0) == 1
        cfg2 = FmmConfig(kernel="helm2d", eps=1e-6, kappa=2 * np.pi)
        assert choose_k(cfg2, 0.05, 200.0) == 2    # beyond 150 wavelengths
        # Lipschitz alone can force k=2 at low frequency
        assert choose_k(cfg, 0.2, 5.0) == 2

    def test_override(self):
        cfg = FmmConfig(kernel="lap2d", eps=1e-6, k_override=2)
        assert choose_k(cfg, 0.01, 1.0) == 2


class TestEvaluate:
    def test_single_pair_pure_direct(self):
        src = np.array([[0.1, 0.2]], complex)
        tgt = np.array([[3.0, -1.0]], complex)
        cfg = FmmConfig(kernel="lap2d", eps=1e-9)
        u, _ = evaluate(src, np.array([2.0 + 1j]), tgt, cfg)
        r = np.sqrt(((tgt - src) ** 2).sum())
        assert u[0] == pytest.approx((2.0 + 1j) * np.log(r), rel=1e-14)

    def test_real_cloud_lap2d(self, rng):
        pts = rng.random((2000, 2)).astype(complex)
        q = rng.normal(size=2000) + 1j * rng.normal(size=2000)
        err, rep = fmm_vs_direct(pts, q, FmmConfig(kernel="lap2d", eps=1e-9),
                                 KernelSpec("lap2d"))
        assert err <= 3e-9
        assert rep.k == 1

    def test_wobble_helm2d(self, rng):
        pts = oracle.gen_wobble2d(2500)
        q = rng.normal(size=2500) + 1j * rng.normal(size=2500)
        kappa = 2 * np.pi
        err, _ = fmm_vs_direct(pts, q, FmmConfig(kernel="helm2d", eps=1e-6, kappa=kappa),
                               KernelSpec("helm2d", kappa))
        assert err <= 3e-6

    @pytest.mark.parametrize("kernel,kappa", [("lap3d", 0.0), ("helm3d", 0.6)])
    def test_wobble_3d(self, rng, kernel, kappa):
        pts = oracle.gen_wobble3d(2500)
        q = rng.normal(size=2500) + 1j * rng.normal(size=2500)
        err, rep = fmm_vs_direct(
            pts, q, FmmConfig(kernel=kernel, eps=1e-6, kappa=kappa),
            KernelSpec(kernel, kappa),
        )
        assert err <= 3e-6
        assert rep.k == 2  # Lipschitz 0.15 needs the wider near field in 3-D

    def test_separate_targets(self, rng):
        # one shared deformation map: distinct source/target maps are a non-goal
        src = lipschitz_cloud(rng, 800, 2, [0, 0], 2.0, 0.1)
        tgt = lipschitz_cloud(rng, 300, 2, [0.5, 0.5], 2.0, 0.1)
        q = rng.normal(size=800) + 1j * rng.normal(size=800)
        cfg = FmmConfig(kernel="lap2d", eps=1e-8)
        u, _ = evaluate(src, q, tgt, cfg)
        u0 = direct_eval(KernelSpec("lap2d"), src, q, tgt)
        assert rel_error(u, u0, q) <= 3e-8

    def test_linearity(self, rng):
        pts = oracle.gen_wobble2d(1200)
        q1 = rng.normal(size=1200) + 1j * rng.normal(size=1200)
        q2 = rng.normal(size=1200) + 1j * rng.normal(size=1200)
        cfg = FmmConfig(kernel="lap2d", eps=1e-8)
        u1, _ = evaluate(pts, q1, pts, cfg)
        u2, _ = evaluate(pts, q2, pts, cfg)
        u12, _ = evaluate(pts, q1 + q2, pts, cfg)
        denom = np.abs(u12).max()
        assert np.abs(u12 - (u1 + u2)).max() <= 1e-12 * denom

    def test_determinism_bitwise(self, rng):
        pts = oracle.gen_wobble2d(1500)
        q = rng.normal(size=1500) + 1j * rng.normal(size=1500)
        cfg = FmmConfig(kernel="helm2d", eps=1e-6, kappa=3.0, deterministic=True)
        u1, _ = evaluate(pts, q, pts, cfg)
        u2, _ = evaluate(pts, q, pts, cfg)
        assert np.array_equal(u1.view(np.float64), u2.view(np.float64))

    @pytest.mark.parametrize(
        "kernel,kappa,L",
        [
            ("lap2d", 0.0, 0.0),
            ("lap2d", 0.0, 0.1),
            ("lap2d", 0.0, 0.3 * 0.3592),
            ("helm2d", 2.2, 0.1),
            ("lap3d", 0.0, 0.1),
            ("helm3d", 0.8, 0.03),
        ],
    )
    def test_superposition_random_geometries(self, rng, kernel, kappa, L):
        dim = 2 if kernel.endswith("2d") else 3
        n = 1500 if dim == 2 else 1200
        pts = lipschitz_cloud(rng, n, dim, [0] * dim, 3.0, L)
        q = rng.normal(size=n) + 1j * rng.normal(size=n)
        eps = 1e-6
        cfg = FmmConfig(kernel=kernel, eps=eps, kappa=kappa)
        err, _ = fmm_vs_direct(pts, q, cfg, KernelSpec(kernel, kappa))
        assert err <= 3 * eps

    def test_report_contents(self, rng):
        pts = oracle.gen_wobble2d(800)
        q = rng.normal(size=800).astype(complex)
        u, rep = evaluate(pts, q, pts, FmmConfig(kernel="lap2d", eps=1e-6))
        assert rep.n_boxes > 0 and rep.n_levels > 1
        assert all(t >= 0 for t in rep.step_seconds.values())
        assert len(rep.orders) == rep.n_levels
        assert rep.peak_coef > 0
        lines = rep.as_lines()
        assert any(line.startswith("k=") for line in lines)

    def test_eps_validation(self):
        with pytest.raises(ValueError):
            FmmConfig(kernel="lap2d", eps=1.0)
        with pytest.raises(ValueError):
            FmmConfig(kernel="helm2d", eps=1e-6)  # missing kappa
