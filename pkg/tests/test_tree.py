import numpy as np
import pytest

from zfmm import tree as T
from zfmm.errors import MaxDepthExceeded
from zfmm.oracle import gen_wobble2d, imag_profile


def make_tree(points, k=1, leaf=30):
    cfg = T.TreeConfig(max_pts_per_leaf=leaf, k=k)
    tr = T.build_tree(points, cfg)
    T.level_restrict(tr, cfg)
    T.complexify_centers(tr)
    return tr, cfg


def clustered_cloud(rng, n, dim, im_scale=0.08):
    pts = rng.normal(size=(n, dim))
    pts[: n // 3] = 0.04 * pts[: n // 3] + 0.9
    pts[n // 3 : n // 2] = 0.02 * pts[n // 3 : n // 2] - 0.7
    return pts + 1j * im_scale * np.sin(pts)


def coverage_counts(tr, lists):
    """Interaction-path count for every (leaf target box, source point)."""
    bad = 0
    for b in np.nonzero(tr.is_leaf & (tr.pt_count > 0))[0]:
        cov = np.zeros(tr.points.shape[0], np.int64)
        a = int(b)
        while a >= 0:
            for c in lists.list2[a]:
                cov[tr.pt_start[c] : tr.pt_start[c] + tr.pt_count[c]] += 1
            for c in lists.list4[a]:
                cov[tr.pt_start[c] : tr.pt_start[c] + tr.pt_count[c]] += 1
            a = int(tr.parent[a])
        for c in lists.list1[int(b)]:
            cov[tr.pt_start[c] : tr.pt_start[c] + tr.pt_count[c]] += 1
        for c in lists.list3[int(b)]:
            cov[tr.pt_start[c] : tr.pt_start[c] + tr.pt_count[c]] += 1
        bad += int(np.sum(cov != 1))
    return bad


class TestBuild:
    def test_single_leaf(self, rng):
        pts = rng.normal(size=(20, 2)) + 0j
        tr, _ = make_tree(pts, leaf=40)
        assert tr.n_boxes == 1
        assert tr.n_levels == 1
        assert tr.is_leaf[0]

    def test_forced_split(self):
        pts = np.array([[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]]) + 0j
        cfg = T.TreeConfig(max_pts_per_leaf=1)
        tr = T.build_tree(pts, cfg)
        assert tr.n_levels == 2
        assert (tr.level == 1).sum() == 4
        assert all(tr.pt_count[tr.level_ids(1)] == 1)

    def test_structural_audit(self, rng):
        pts = clustered_cloud(rng, 10_000, 2)
        tr, _ = make_tree(pts, leaf=40)
        # every leaf within capacity
        leaf_counts = tr.pt_count[tr.is_leaf & (tr.pt_count > 0)]
        assert leaf_counts.max() <= 40
        # parent counts equal the sum over children
        for b in np.nonzero(~tr.is_leaf)[0]:
            assert tr.pt_count[b] == tr.pt_count[tr.children[b]].sum()
        # membership in half-open boxes
        ctr = tr.center()
        for b in np.nonzero(tr.is_leaf & (tr.pt_count > 0))[0]:
            s, c = int(tr.pt_start[b]), int(tr.pt_count[b])
            w = tr.root_width / (1 << int(tr.level[b]))
            re = tr.points[s : s + c].real
            assert np.all(re >= ctr[b] - w / 2)
            assert np.all(re < ctr[b] + w / 2)

    def test_permutation_round_trip(self, rng):
        pts = clustered_cloud(rng, 3000, 3)
        tr, _ = make_tree(pts, leaf=50)
        inv = tr.inv_perm()
        assert np.array_equal(tr.perm[inv], np.arange(3000))
        assert np.abs(tr.points[inv] - pts).max() == 0.0

    def test_determinism(self, rng):
        pts = clustered_cloud(rng, 2000, 2)
        t1, cfg = make_tree(pts.copy())
        t2, _ = make_tree(pts.copy())
        assert np.array_equal(t1.perm, t2.perm)
        assert np.array_equal(t1.level, t2.level)
        l1 = T.build_lists(t1, cfg)
        l2 = T.build_lists(t2, cfg)
        for a, b in zip(l1.list2, l2.list2):
            assert np.array_equal(a, b)

    def test_duplicate_reals_error(self):
        pts = np.zeros((50, 2)) + 1j * np.linspace(0, 1, 100).reshape(50, 2)
        cfg = T.TreeConfig(max_pts_per_leaf=10, max_levels=12)
        with pytest.raises(MaxDepthExceeded):
            T.build_tree(pts, cfg)


class TestLevelRestriction:
    def test_already_restricted_unchanged(self, rng):
        pts = (rng.random((500, 2)) + 0j)
        cfg = T.TreeConfig(max_pts_per_leaf=40, k=1)
        tr = T.build_tree(pts, cfg)
        n_before = tr.n_boxes
        T.level_restrict(tr, cfg)
        assert tr.n_boxes == n_before  # near-uniform tree needs no work

    @pytest.mark.parametrize("k", [1, 2])
    def test_postcondition_audit(self, rng, k):
        # one tight cluster next to a coarse region forces subdivision
        pts = np.concatenate(
            [
                1e-4 * rng.random((600, 2)) + 0.5,
                rng.random((60, 2)),
            ]
        ) + 0j
        cfg = T.TreeConfig(max_pts_per_leaf=20, k=k)
        tr = T.build_tree(pts, cfg)
        T.level_restrict(tr, cfg)
        leaves = np.nonzero(tr.is_leaf)[0]
        unit = tr.n_levels
        for i, b in enumerate(leaves):
            others = leaves[i + 1 :]
            cand = others[np.abs(tr.level[others] - tr.level[b]) > 2]
            if cand.size:
                near = T._near_int(
                    tr, np.repeat(np.array([b]), cand.size), cand, k, unit
                )
                assert not near.any()


class TestComplexify:
    def test_all_real(self, rng):
        pts = rng.random((300, 2)) + 0j
        tr, _ = make_tree(pts)
        assert np.abs(tr.cplx_center.imag).max() == 0.0

    def test_linear_map_mean(self, rng):
        pts = rng.random((400, 2))
        pts = pts + 0.2j * pts
        tr, _ = make_tree(pts)
        for b in range(tr.n_boxes):
            s, c = int(tr.pt_start[b]), int(tr.pt_count[b])
            if c == 0:
                continue
            expect = 0.2 * tr.points[s : s + c].real.mean(axis=0)
            assert np.abs(tr.cplx_center[b].imag - expect).max() < 1e-14

    def test_wobble_centers_near_profile(self):
        pts = gen_wobble2d(4000)
        tr, _ = make_tree(pts, leaf=40)
        L = 0.16
        for b in range(tr.n_boxes):
            if tr.pt_count[b] == 0:
                continue
            w = tr.root_width / (1 << int(tr.level[b]))
            ctr = tr.cplx_center[b]
            psi_c = imag_profile(ctr.real[0], 0.05, 3.0, 13.0)
            assert abs(ctr.imag[0] - psi_c) <= L * w + 1e-12
            assert ctr.imag[1] == 0.0

    def test_empty_inherit_parent(self, rng):
        # clusters guarantee empty siblings appear somewhere
        pts = clustered_cloud(rng, 800, 2)
        tr, _ = make_tree(pts, leaf=10)
        empties = np.nonzero(tr.pt_count == 0)[0]
        assert empties.size > 0
        for b in empties[:50]:
            p = int(tr.parent[b])
            assert np.allclose(tr.cplx_center[b].imag, tr.cplx_center[p].imag)


class TestLists:
    def test_single_leaf_lists(self, rng):
        pts = rng.normal(size=(10, 2)) + 0j
        tr, cfg = make_tree(pts, leaf=40)
        lists = T.build_lists(tr, cfg)
        assert list(lists.list1[0]) == [0]
        assert lists.list2[0].size == 0
        assert lists.list3[0].size == 0
        assert lists.list4[0].size == 0

    def test_uniform_interior_list2_count(self):
        g = (np.arange(32) + 0.5) / 32
        X, Y = np.meshgrid(g, g)
        pts = np.stack([X.ravel(), Y.ravel()], -1) + 0j
        tr, cfg = make_tree(pts, k=1, leaf=40)
        lists = T.build_lists(tr, cfg)
        sizes = set()
        for b in tr.level_ids(3):
            p = int(tr.parent[b])
            if np.all((tr.icoord[p] >= 1) & (tr.icoord[p] <= 2)):
                sizes.add(int(lists.list2[b].size))
        assert sizes == {27}

    @pytest.mark.parametrize("k", [1, 2])
    def test_list2_well_separated(self, rng, k):
        pts = clustered_cloud(rng, 3000, 2)
        tr, cfg = make_tree(pts, k=k)
        lists = T.build_lists(tr, cfg)
        ctr = tr.center()
        for b in range(tr.n_boxes):
            w = tr.root_width / (1 << int(tr.level[b]))
            for c in lists.list2[b]:
                dist = np.abs(ctr[b] - ctr[int(c)]).max()
                assert dist >= (k + 1) * w - 1e-9 * w

    @pytest.mark.parametrize("dim,k", [(2, 1), (2, 2), (3, 1), (3, 2)])
    def test_coverage_audit(self, rng, dim, k):
        pts = clustered_cloud(rng, 4000 if dim == 2 else 3000, dim)
        tr, cfg = make_tree(pts, k=k, leaf=35)
        lists = T.build_lists(tr, cfg)
        assert coverage_counts(tr, lists) == 0

    def test_list4_transpose_of_list3(self, rng):
        pts = clustered_cloud(rng, 2500, 2)
        tr, cfg = make_tree(pts)
        lists = T.build_lists(tr, cfg)
        pairs3 = {(b, int(c)) for b in range(tr.n_boxes) for c in lists.list3[b]}
        pairs4 = {(int(c), b) for b in range(tr.n_boxes) for c in lists.list4[b]}
        assert pairs3 == pairs4


class TestDump:
    def test_format_round_trip_fields(self, rng):
        pts = clustered_cloud(rng, 200, 2)
        tr, _ = make_tree(pts)
        text = T.dump_tree(tr)
        lines = text.strip().split("\n")
        assert len(lines) == tr.n_boxes
        first = lines[0].split()
        assert int(first[0]) == 0
        assert int(first[1]) == 0  # root level
        assert first[-1] in ("0", "1")
