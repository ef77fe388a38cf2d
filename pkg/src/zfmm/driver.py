"""Orchestrates the fast evaluator: tree, term plan, and the eight passes.

The evaluation runs (1) leaf multipole formation, (2) upward merges,
(3) near-field direct sums over list 1, (4) same-level multipole-to-local
conversions over list 2, (5) direct multipole evaluation from list 3,
(6) source-to-local formation from list 4, (7) downward local pushes, and
(8) leaf local evaluation.  Far-field passes are batched per level; the
near field always uses the direct complexified kernel.

The 3-D Helmholtz kernel e^{i kappa rho}/rho equals i*kappa*h_0(kappa rho),
so its charges are premultiplied by i*kappa and the machinery works with
the spherical-Hankel kernel throughout.
"""

import os
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fmm2d, fmm3d
from .cgeom import admissible_k, estimate_lipschitz
from .errors import CoincidentPoints, TermLimitExceeded
from .oracle import KernelSpec
from .specfun import bessel_j_seq, hankel_h1_seq, sph_seq
from .tree import TreeConfig, build_lists, build_tree, complexify_centers, level_restrict

DEFAULT_LEAF_SIZE = {2: 40, 3: 120}
MAX_TERMS = 64
# root sizes (in wavelengths) beyond which the near field widens to k=2
CANCELLATION_WAVELENGTHS = {"helm2d": 150.0, "helm3d": 25.0}


@dataclass
class FmmConfig:
    kernel: str
    eps: float
    kappa: float = 0.0
    k_override: Optional[int] = None
    lipschitz_hint: Optional[float] = None
    deterministic: bool = True
    max_pts_per_leaf: Optional[int] = None

    def __post_init__(self):
        if self.kernel not in ("lap2d", "helm2d", "lap3d", "helm3d"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if not 1e-14 <= self.eps <= 1e-1:
            raise ValueError("eps must lie in [1e-14, 1e-1]")
        if self.kernel.startswith("helm") and not self.kappa > 0:
            raise ValueError("Helmholtz kernels need kappa > 0")

    @property
    def dimension(self):
        return 2 if self.kernel.endswith("2d") else 3


@dataclass
class TermPlan:
    orders: np.ndarray  # expansion order per level


@dataclass
class FmmReport:
    step_seconds: dict = field(default_factory=dict)
    n_boxes: int = 0
    n_levels: int = 0
    n_leaves: int = 0
    orders: tuple = ()
    k: int = 0
    lipschitz: float = 0.0
    peak_coef: float = 0.0

    def as_lines(self):
        out = [
            f"n_boxes={self.n_boxes}",
            f"n_levels={self.n_levels}",
            f"n_leaves={self.n_leaves}",
            f"k={self.k}",
            f"lipschitz={self.lipschitz:.6g}",
            f"orders={','.join(str(p) for p in self.orders)}",
            f"peak_coef={self.peak_coef:.6g}",
        ]
        out += [f"t_{name}={t:.6f}" for name, t in self.step_seconds.items()]
        return out


def worker_count() -> int:
    """Worker-count knob (ZFMM_NUM_THREADS); evaluation is vectorized, so
    this only caps any future thread pools and keeps the CLI contract."""
    try:
        return max(1, int(os.environ.get("ZFMM_NUM_THREADS", "1")))
    except ValueError:
        return 1


def plan_terms(cfg: FmmConfig, tree, k: int) -> TermPlan:
    """Expansion orders per level from the separation criterion.

    Laplace uses |f_n(R) g_n(r)| <= eps with f_n = z^{-(n+1)}, g_n = z^n
    at the unit-width geometry R = 0.5 + k, r = sqrt(d)/2, giving one
    order for every level.  Helmholtz replaces the bases with Hankel and
    Bessel factors at the physical level width, normalized by the n = 0
    term so the criterion stays scale free.
    """
    d = cfg.dimension
    r_unit = np.sqrt(d) / 2.0
    R_unit = 0.5 + k
    n_levels = tree.n_levels
    orders = np.ones(max(n_levels, 3), np.int64)
    if cfg.kernel.startswith("lap"):
        n = np.arange(1, MAX_TERMS + 1)
        vals = r_unit**n / R_unit ** (n + 1.0)
        hit = np.nonzero(vals <= cfg.eps)[0]
        if hit.size == 0:
            raise TermLimitExceeded(f"needs more than {MAX_TERMS} terms")
        orders[:] = int(n[hit[0]])
        return TermPlan(orders[:n_levels] if n_levels >= 3 else orders[:3])
    for lvl in range(2, n_levels):
        w = tree.root_width / (1 << lvl)
        zr = cfg.kappa * R_unit * w
        zs = cfg.kappa * r_unit * w
        if d == 2:
            f = np.abs(hankel_h1_seq(zr, MAX_TERMS).values)
            g = np.abs(bessel_j_seq(zs, MAX_TERMS).values)
        else:
            f = np.abs(sph_seq("h", zr, MAX_TERMS).values)
            g = np.abs(sph_seq("j", zs, MAX_TERMS).values)
        ratio = f * g / (f[0] * g[0])
        hit = np.nonzero(ratio[1:] <= cfg.eps)[0]
        if hit.size == 0:
            raise TermLimitExceeded(
                f"needs more than {MAX_TERMS} terms at level {lvl}"
            )
        orders[lvl] = int(hit[0] + 1)
    orders[0] = orders[1] = orders[2] if n_levels > 2 else 1
    return TermPlan(orders[:n_levels] if n_levels >= 3 else orders[:3])


def choose_k(cfg: FmmConfig, lipschitz: float, root_width: float) -> int:
    """Near-field width from the Lipschitz constant and the cancellation rule."""
    k = 2 if cfg.k_override == 2 else admissible_k(lipschitz, cfg.dimension)
    lam = CANCELLATION_WAVELENGTHS.get(cfg.kernel)
    if lam is not None and cfg.kappa * root_width / (2.0 * np.pi) > lam:
        k = 2
    if cfg.k_override is not None:
        k = cfg.k_override
    return k


# ----------------------------------------------------------------------------
# Kernel engines: per-kernel expansion storage + the batched pass bodies
# ----------------------------------------------------------------------------

class _Engine2D:
    def __init__(self, tree, plan, kappa, helm):
        self.tree = tree
        self.plan = plan
        self.kappa = kappa
        self.helm = helm
        n = tree.n_boxes
        self.mp = [None] * n
        self.loc = [None] * n
        self.scales = np.sqrt(2.0) / 2.0 * tree.root_width / (
            1 << tree.level.astype(np.int64)
        )

    def _blank(self, order):
        if self.helm:
            return np.zeros(2 * order + 1, np.complex128)
        return (0.0 + 0.0j, np.zeros(order + 1, np.complex128), np.zeros(order + 1, np.complex128))

    def p2m_leaf(self, b, pts, sig):
        order = int(self.plan.orders[self.tree.level[b]])
        ctr = self.tree.cplx_center[b]
        dz, dw = fmm2d._zw(pts, ctr)
        if self.helm:
            self.mp[b] = fmm2d.helm2_p2m_coef(dz, dw, sig, self.kappa, order)
        else:
            self.mp[b] = fmm2d.lap2_p2m_coef(dz, dw, sig, order, self.scales[b])

    def m2m_level(self, pairs):
        src = pairs[:, 0]
        dst = pairs[:, 1]
        d = self.tree.cplx_center[src] - self.tree.cplx_center[dst]
        z0, w0 = d[:, 0] + 1j * d[:, 1], d[:, 0] - 1j * d[:, 1]
        order_dst = int(self.plan.orders[self.tree.level[dst[0]]])
        if self.helm:
            coef = np.stack([self.mp[b] for b in src])
            out = fmm2d.helm2_translate_batch(coef, z0, w0, self.kappa, order_dst, "j")
        else:
            m0 = np.array([self.mp[b][0] for b in src])
            mp = np.stack([self.mp[b][1] for b in src])
            mm = np.stack([self.mp[b][2] for b in src])
            out = fmm2d.lap2_m2m_batch(
                m0, mp, mm, z0, w0, self.scales[src], self.scales[dst]
            )
        for i, b in enumerate(dst):
            cur = self.mp[b]
            if cur is None:
                cur = self._blank(order_dst)
            if self.helm:
                self.mp[b] = cur + out[i]
            else:
                self.mp[b] = (cur[0] + out[0][i], cur[1] + out[1][i], cur[2] + out[2][i])

    def m2l_level(self, pairs):
        src = pairs[:, 0]
        dst = pairs[:, 1]
        d = self.tree.cplx_center[src] - self.tree.cplx_center[dst]
        z0, w0 = d[:, 0] + 1j * d[:, 1], d[:, 0] - 1j * d[:, 1]
        order = int(self.plan.orders[self.tree.level[dst[0]]])
        if self.helm:
            coef = np.stack([self.mp[b] for b in src])
            out = fmm2d.helm2_translate_batch(coef, z0, w0, self.kappa, order, "h")
        else:
            m0 = np.array([self.mp[b][0] for b in src])
            mp = np.stack([self.mp[b][1] for b in src])
            mm = np.stack([self.mp[b][2] for b in src])
            out = fmm2d.lap2_m2l_batch(
                m0, mp, mm, z0, w0, self.scales[src], self.scales[dst], order
            )
        for i, b in enumerate(dst):
            cur = self.loc[b]
            if cur is None:
                cur = self._blank(order)
            if self.helm:
                self.loc[b] = cur + out[i]
            else:
                self.loc[b] = (cur[0] + out[0][i], cur[1] + out[1][i], cur[2] + out[2][i])

    def l2l_level(self, pairs):
        src = pairs[:, 0]
        dst = pairs[:, 1]
        d = self.tree.cplx_center[src] - self.tree.cplx_center[dst]
        z0, w0 = d[:, 0] + 1j * d[:, 1], d[:, 0] - 1j * d[:, 1]
        order = int(self.plan.orders[self.tree.level[dst[0]]])
        if self.helm:
            coef = np.stack([self.loc[b] for b in src])
            out = fmm2d.helm2_translate_batch(coef, z0, w0, self.kappa, order, "j")
        else:
            l0 = np.array([self.loc[b][0] for b in src])
            lp = np.stack([self.loc[b][1] for b in src])
            lm = np.stack([self.loc[b][2] for b in src])
            out = fmm2d.lap2_l2l_batch(
                l0, lp, lm, z0, w0, self.scales[src], self.scales[dst]
            )
        for i, b in enumerate(dst):
            cur = self.loc[b]
            if cur is None:
                cur = self._blank(order)
            if self.helm:
                self.loc[b] = cur + out[i]
            else:
                self.loc[b] = (cur[0] + out[0][i], cur[1] + out[1][i], cur[2] + out[2][i])

    def m2p(self, c, pts):
        ctr = self.tree.cplx_center[c]
        z, w = fmm2d._zw(pts, ctr)
        if self.helm:
            basis = fmm2d.helm2_radial_angular(z, w, self.kappa, (self.mp[c].size - 1) // 2, "h")
            return basis @ self.mp[c]
        m0, mp, mm = self.mp[c]
        return fmm2d.lap2_m2p_eval(m0, mp, mm, self.scales[c], z, w, np.abs(z) + np.abs(w))

    def p2l(self, b, pts, sig):
        order = int(self.plan.orders[self.tree.level[b]])
        ctr = self.tree.cplx_center[b]
        z, w = fmm2d._zw(pts, ctr)
        cur = self.loc[b] if self.loc[b] is not None else self._blank(order)
        if self.helm:
            r = np.sqrt(z * w)
            H = fmm2d.hankel_h1_table(self.kappa * r, order)
            em = fmm2d._powers(w / r, order)
            ep = fmm2d._powers(z / r, order)
            add = np.zeros(2 * order + 1, np.complex128)
            add[order:] = sig @ (H * em)
            sgn = (-1.0) ** np.arange(order, 0, -1)
            add[:order] = sig @ (H[:, :0:-1] * ep[:, :0:-1]) * sgn
            self.loc[b] = cur + add
        else:
            l0, lp, lm = fmm2d.lap2_p2l_coef(z, w, sig, order, self.scales[b])
            self.loc[b] = (cur[0] + l0, cur[1] + lp, cur[2] + lm)

    def l2p(self, b, pts):
        ctr = self.tree.cplx_center[b]
        z, w = fmm2d._zw(pts, ctr)
        if self.helm:
            order = (self.loc[b].size - 1) // 2
            basis = fmm2d.helm2_radial_angular(z, w, self.kappa, order, "j")
            return basis @ self.loc[b]
        l0, lp, lm = self.loc[b]
        return fmm2d.lap2_l2p_eval(l0, lp, lm, self.scales[b], z, w)

    def peak(self):
        peak = 0.0
        for v in self.mp:
            if v is None:
                continue
            arr = v if self.helm else np.concatenate([[v[0]], v[1], v[2]])
            peak = max(peak, float(np.abs(arr).max(initial=0.0)))
        return peak


class _Engine3D:
    def __init__(self, tree, plan, kappa, helm):
        self.tree = tree
        self.plan = plan
        self.kappa = kappa
        self.helm = helm
        self.kernel = "helm" if helm else "lap"
        n = tree.n_boxes
        self.mp = [None] * n
        self.loc = [None] * n
        self.scales = np.sqrt(3.0) / 2.0 * tree.root_width / (
            1 << tree.level.astype(np.int64)
        )

    def p2m_leaf(self, b, pts, sig):
        order = int(self.plan.orders[self.tree.level[b]])
        frame = fmm3d.sphere_frame(pts, self.tree.cplx_center[b])
        if self.helm:
            self.mp[b] = fmm3d.helm3_p2m_coef(frame, sig, self.kappa, order)
        else:
            self.mp[b] = fmm3d.lap3_p2m_coef(frame, sig, order, self.scales[b])

    def _translate(self, pairs, kind, store, get):
        order = int(self.plan.orders[self.tree.level[pairs[0, 1]]])
        blank = np.zeros((order + 1, 2 * order + 1), np.complex128)
        step = 4096
        for lo in range(0, pairs.shape[0], step):
            src = pairs[lo : lo + step, 0]
            dst = pairs[lo : lo + step, 1]
            coef = np.stack([get(b) for b in src])
            d = self.tree.cplx_center[src] - self.tree.cplx_center[dst]
            out = fmm3d.pas_batch(
                coef, d, kind, self.kernel, self.kappa,
                self.scales[src], self.scales[dst], order,
            )
            # pairs arrive grouped by destination: reduce runs, then store
            starts = np.concatenate([[0], np.nonzero(np.diff(dst))[0] + 1])
            sums = np.add.reduceat(out, starts, axis=0)
            for i, b in zip(starts, dst[starts]):
                cur = store[b] if store[b] is not None else blank
                store[b] = cur + sums[np.searchsorted(starts, i)]

    def m2m_level(self, pairs):
        self._translate(pairs, "m2m", self.mp, lambda b: self.mp[b])

    def m2l_level(self, pairs):
        self._translate(pairs, "m2l", self.loc, lambda b: self.mp[b])

    def l2l_level(self, pairs):
        self._translate(pairs, "l2l", self.loc, lambda b: self.loc[b])

    def m2p(self, c, pts):
        frame = fmm3d.sphere_frame(pts, self.tree.cplx_center[c])
        if self.helm:
            return fmm3d.helm3_m2p_eval(self.mp[c], self.kappa, frame)
        return fmm3d.lap3_m2p_eval(self.mp[c], self.scales[c], frame)

    def p2l(self, b, pts, sig):
        order = int(self.plan.orders[self.tree.level[b]])
        frame = fmm3d.sphere_frame(pts, self.tree.cplx_center[b])
        if self.helm:
            add = fmm3d.helm3_p2l_coef(frame, sig, self.kappa, order)
        else:
            add = fmm3d.lap3_p2l_coef(frame, sig, order, self.scales[b])
        self.loc[b] = add if self.loc[b] is None else self.loc[b] + add

    def l2p(self, b, pts):
        frame = fmm3d.sphere_frame(pts, self.tree.cplx_center[b])
        if self.helm:
            return fmm3d.helm3_l2p_eval(self.loc[b], self.kappa, frame)
        return fmm3d.lap3_l2p_eval(self.loc[b], self.scales[b], frame)

    def peak(self):
        peak = 0.0
        for v in self.mp:
            if v is not None:
                peak = max(peak, float(np.abs(v).max(initial=0.0)))
        return peak


def evaluate(sources, charges, targets, cfg: FmmConfig):
    """Fast evaluation of the kernel sum at targets; returns (u, FmmReport).

    Passing the same array object as sources and targets (or None) excludes
    each point's self-interaction, matching the direct oracle.
    """
    t_all = time.perf_counter()
    src = np.asarray(sources, np.complex128)
    sig_user = np.asarray(charges, np.complex128)
    aliased = targets is None or targets is sources
    tgt = src if aliased else np.asarray(targets, np.complex128)
    d = cfg.dimension
    if src.shape[1] != d or tgt.shape[1] != d:
        raise ValueError(f"points must have dimension {d}")
    spec = KernelSpec(cfg.kernel, cfg.kappa)
    # internal charge scaling: e^{ikr}/r = i k h_0(k r)
    sig = sig_user * (1j * cfg.kappa) if cfg.kernel == "helm3d" else sig_user

    report = FmmReport()
    union = src if aliased else np.concatenate([src, tgt], axis=0)
    lip = cfg.lipschitz_hint
    if lip is None:
        lip = estimate_lipschitz(union) if union.shape[0] >= 2 else 0.0
    report.lipschitz = lip
    root_w = float((union.real.max(0) - union.real.min(0)).max()) if union.size else 1.0
    k = choose_k(cfg, lip, root_w)
    report.k = k

    tcfg = TreeConfig(
        max_pts_per_leaf=cfg.max_pts_per_leaf or DEFAULT_LEAF_SIZE[d],
        k=k,
    )
    t0 = time.perf_counter()
    tree = build_tree(union, tcfg)
    level_restrict(tree, tcfg)
    complexify_centers(tree)
    lists = build_lists(tree, tcfg)
    report.step_seconds["tree"] = time.perf_counter() - t0
    report.n_boxes = tree.n_boxes
    report.n_levels = tree.n_levels
    report.n_leaves = int(tree.is_leaf.sum())

    plan = plan_terms(cfg, tree, k)
    report.orders = tuple(int(p) for p in plan.orders)

    # permuted-point roles
    n_src = src.shape[0]
    orig = tree.perm
    if aliased:
        is_src = np.ones(orig.size, bool)
        is_tgt = np.ones(orig.size, bool)
        src_idx = orig
        tgt_idx = orig
    else:
        is_src = orig < n_src
        is_tgt = ~is_src
        src_idx = orig
        tgt_idx = orig - n_src
    sig_perm = np.where(is_src, sig[np.minimum(src_idx, n_src - 1)], 0.0)

    # per-box counts of sources / targets (ranges cover whole subtrees)
    csum_src = np.concatenate([[0], np.cumsum(is_src)])
    csum_tgt = np.concatenate([[0], np.cumsum(is_tgt)])
    s0 = tree.pt_start
    s1 = tree.pt_start + tree.pt_count
    box_nsrc = csum_src[s1] - csum_src[s0]
    box_ntgt = csum_tgt[s1] - csum_tgt[s0]

    engine_cls = _Engine2D if d == 2 else _Engine3D
    engine = engine_cls(tree, plan, cfg.kappa, cfg.kernel.startswith("helm"))

    leaves = np.nonzero(tree.is_leaf)[0]
    u = np.zeros(tgt.shape[0], np.complex128)

    def _box_pts(b, mask):
        sl = slice(int(s0[b]), int(s1[b]))
        sel = mask[sl]
        return tree.points[sl][sel], sl, sel

    # (1) leaf multipoles
    t0 = time.perf_counter()
    for b in leaves:
        if box_nsrc[b] == 0 or tree.level[b] < 2:
            continue
        pts, sl, sel = _box_pts(b, is_src)
        engine.p2m_leaf(int(b), pts, sig_perm[sl][sel])
    report.step_seconds["p2m"] = time.perf_counter() - t0

    # (2) upward merge
    t0 = time.perf_counter()
    for lvl in range(tree.n_levels - 1, 2, -1):
        ids = tree.level_ids(lvl)
        ids = ids[(box_nsrc[ids] > 0) & (tree.parent[ids] >= 0)]
        ids = ids[[engine.mp[int(b)] is not None for b in ids]]
        if ids.size == 0:
            continue
        pairs = np.stack([ids, tree.parent[ids]], axis=1)
        engine.m2m_level(pairs)
    report.step_seconds["m2m"] = time.perf_counter() - t0

    # (3) near field
    t0 = time.perf_counter()
    for b in leaves:
        if box_ntgt[b] == 0:
            continue
        b = int(b)
        tpts, tsl, tselm = _box_pts(b, is_tgt)
        tids_global = tgt_idx[tsl][tselm] if aliased else np.array([], np.int64)
        srcs = [c for c in lists.list1[b] if box_nsrc[c] > 0]
        if not srcs:
            continue
        sl_idx = np.concatenate(
            [np.arange(s0[c], s1[c])[is_src[s0[c] : s1[c]]] for c in srcs]
        )
        spts = tree.points[sl_idx]
        svals = sig_perm[sl_idx]
        dd = tpts[:, None, :] - spts[None, :, :]
        r = np.sqrt((dd * dd).sum(-1))
        zero = r == 0.0
        if aliased:
            same = tids_global[:, None] == src_idx[sl_idx][None, :]
            if np.any(zero & ~same):
                raise CoincidentPoints("distinct points at zero complexified distance")
            r[same] = 1.0
            vals = _near_kernel(cfg, r)
            vals[same] = 0.0
        else:
            if np.any(zero):
                raise CoincidentPoints("target coincides with a source")
            vals = _near_kernel(cfg, r)
        uloc = vals @ svals
        out_ids = tgt_idx[tsl][tselm]
        u[out_ids] += uloc
    report.step_seconds["near"] = time.perf_counter() - t0

    # (4) multipole-to-local over list 2
    t0 = time.perf_counter()
    for lvl in range(2, tree.n_levels):
        ids = tree.level_ids(lvl)
        pairs = []
        for b in ids:
            if box_ntgt[b] == 0:
                continue
            for c in lists.list2[int(b)]:
                if box_nsrc[c] > 0 and engine.mp[int(c)] is not None:
                    pairs.append((int(c), int(b)))
        if pairs:
            engine.m2l_level(np.asarray(pairs, np.int64))
    report.step_seconds["m2l"] = time.perf_counter() - t0

    # (5) multipole evaluation from list 3
    t0 = time.perf_counter()
    for b in leaves:
        if box_ntgt[b] == 0:
            continue
        b = int(b)
        tpts, tsl, tselm = _box_pts(b, is_tgt)
        out_ids = tgt_idx[tsl][tselm]
        for c in lists.list3[b]:
            if box_nsrc[c] == 0 or engine.mp[int(c)] is None:
                continue
            u[out_ids] += engine.m2p(int(c), tpts)
    report.step_seconds["m2p"] = time.perf_counter() - t0

    # (6) local formation from list 4
    t0 = time.perf_counter()
    for b in range(tree.n_boxes):
        if box_ntgt[b] == 0 or not lists.list4[b].size:
            continue
        for c in lists.list4[b]:
            c = int(c)
            if box_nsrc[c] == 0:
                continue
            pts, sl, sel = _box_pts(c, is_src)
            engine.p2l(int(b), pts, sig_perm[sl][sel])
    report.step_seconds["p2l"] = time.perf_counter() - t0

    # (7) downward push
    t0 = time.perf_counter()
    for lvl in range(2, tree.n_levels - 1):
        ids = tree.level_ids(lvl)
        pairs = []
        for b in ids:
            if engine.loc[int(b)] is None:
                continue
            for c in tree.children[int(b)]:
                if c >= 0 and box_ntgt[c] > 0:
                    pairs.append((int(b), int(c)))
        if pairs:
            engine.l2l_level(np.asarray(pairs, np.int64))
    report.step_seconds["l2l"] = time.perf_counter() - t0

    # (8) leaf local evaluation
    t0 = time.perf_counter()
    for b in leaves:
        b = int(b)
        if box_ntgt[b] == 0 or engine.loc[b] is None:
            continue
        tpts, tsl, tselm = _box_pts(b, is_tgt)
        u[tgt_idx[tsl][tselm]] += engine.l2p(b, tpts)
    report.step_seconds["l2p"] = time.perf_counter() - t0

    report.peak_coef = engine.peak()
    report.step_seconds["total"] = time.perf_counter() - t_all
    if not np.all(np.isfinite(u)):
        raise CoincidentPoints("non-finite potentials; check input geometry")
    return u, report


def _near_kernel(cfg: FmmConfig, r):
    if cfg.kernel == "lap2d":
        return np.log(r)
    if cfg.kernel == "helm2d":
        from scipy import special as _sp

        return _sp.hankel1(0, cfg.kappa * r)
    if cfg.kernel == "lap3d":
        return 1.0 / r
    # helm3d with premultiplied charges: h_0(k r) = -i e^{ikr} / (k r)
    return -1j * np.exp(1j * cfg.kappa * r) / (cfg.kappa * r)
