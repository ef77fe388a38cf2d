"""Adaptive level-restricted quadtree/octree on the real parts of points.

The hierarchy is built purely from Re(points); box centers are then
complexified with the mean imaginary part of the contained points, so the
expansion machinery sees centers that approximately satisfy the same
Lipschitz graph constraint as the data.

Boxes are stored as flat arrays.  A parent always carries all 2^d
children (empty ones participate in list geometry but hold no points).
Geometric comparisons for nearness use exact integer arithmetic on the
dyadic grid, so list membership is immune to floating-point ties.
"""

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import MaxDepthExceeded


@dataclass
class TreeConfig:
    max_pts_per_leaf: int = 40
    k: int = 1
    max_levels: int = 40


@dataclass
class Tree:
    dimension: int
    root_lo: np.ndarray          # lower corner of the root box (real)
    root_width: float
    level: np.ndarray            # (nbox,)
    parent: np.ndarray           # (nbox,)
    children: np.ndarray         # (nbox, 2^d), -1 when childless
    icoord: np.ndarray           # (nbox, d) integer grid coords at own level
    pt_start: np.ndarray         # (nbox,)
    pt_count: np.ndarray         # (nbox,)
    perm: np.ndarray             # user order -> tree order
    points: np.ndarray           # permuted complex points, (N, d)
    cplx_center: Optional[np.ndarray] = None

    @property
    def n_boxes(self):
        return self.level.shape[0]

    @property
    def n_levels(self):
        return int(self.level.max()) + 1

    def width(self, lvl):
        return self.root_width / (1 << np.asarray(lvl))

    def center(self, ids=None):
        ids = np.arange(self.n_boxes) if ids is None else np.asarray(ids)
        w = self.root_width / (1 << self.level[ids].astype(np.int64))
        return self.root_lo[None, :] + (self.icoord[ids] + 0.5) * w[:, None]

    @property
    def is_leaf(self):
        return self.children[:, 0] < 0

    def level_ids(self, lvl):
        return np.nonzero(self.level == lvl)[0]

    def inv_perm(self):
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return inv


@dataclass
class InteractionLists:
    """CSR adjacency per box for the four adaptive-FMM lists."""

    list1: list = field(default_factory=list)
    list2: list = field(default_factory=list)
    list3: list = field(default_factory=list)
    list4: list = field(default_factory=list)
    colleagues: list = field(default_factory=list)


def build_tree(points, cfg: TreeConfig) -> Tree:
    """Subdivide until every leaf holds at most cfg.max_pts_per_leaf points."""
    pts = np.asarray(points, np.complex128)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("need at least one point of shape (N, d)")
    d = pts.shape[1]
    re = pts.real
    lo = re.min(axis=0)
    hi = re.max(axis=0)
    width = float(max((hi - lo).max(), np.finfo(float).tiny))
    width *= 1.001  # pad so boundary points stay inside the half-open box
    ctr = 0.5 * (lo + hi)
    root_lo = ctr - 0.5 * width

    perm = np.arange(pts.shape[0])
    level = [0]
    parent = [-1]
    children = [np.full(1 << d, -1, np.int64)]
    icoord = [np.zeros(d, np.int64)]
    pt_start = [0]
    pt_count = [pts.shape[0]]

    current = [0] if pts.shape[0] > cfg.max_pts_per_leaf else []
    lvl = 0
    while current:
        if lvl >= cfg.max_levels:
            for b in current:
                s, c = pt_start[b], pt_count[b]
                sub = re[perm[s : s + c]]
                if np.all(sub == sub[0]):
                    raise MaxDepthExceeded(
                        "more coincident real locations than fit in one leaf"
                    )
            break
        nxt = []
        for b in current:
            s, c = pt_start[b], pt_count[b]
            idx = perm[s : s + c]
            w = width / (1 << (level[b] + 1))
            base = root_lo + icoord[b] * 2 * w
            oct_ = np.zeros(c, np.int64)
            for ax in range(d):
                oct_ |= (re[idx, ax] >= base[ax] + w).astype(np.int64) << ax
            order = np.argsort(oct_, kind="stable")
            perm[s : s + c] = idx[order]
            counts = np.bincount(oct_, minlength=1 << d)
            offs = s + np.concatenate([[0], np.cumsum(counts)[:-1]])
            kid_ids = np.arange(len(level), len(level) + (1 << d))
            children[b][:] = kid_ids
            for o in range(1 << d):
                ic = icoord[b] * 2 + ((o >> np.arange(d)) & 1)
                level.append(level[b] + 1)
                parent.append(b)
                children.append(np.full(1 << d, -1, np.int64))
                icoord.append(ic)
                pt_start.append(int(offs[o]))
                pt_count.append(int(counts[o]))
                if counts[o] > cfg.max_pts_per_leaf:
                    nxt.append(int(kid_ids[o]))
        current = nxt
        lvl += 1

    return Tree(
        dimension=d,
        root_lo=root_lo,
        root_width=width,
        level=np.asarray(level, np.int64),
        parent=np.asarray(parent, np.int64),
        children=np.vstack(children),
        icoord=np.vstack(icoord),
        pt_start=np.asarray(pt_start, np.int64),
        pt_count=np.asarray(pt_count, np.int64),
        perm=perm,
        points=pts[perm],
    )


def _subdivide_leaf(tree: Tree, b: int):
    """Split a leaf in place, appending 2^d children (possibly empty)."""
    d = tree.dimension
    s, c = int(tree.pt_start[b]), int(tree.pt_count[b])
    idx = np.arange(s, s + c)
    w = tree.root_width / (1 << (int(tree.level[b]) + 1))
    base = tree.root_lo + tree.icoord[b] * 2 * w
    re = tree.points[idx].real if c else np.zeros((0, d))
    oct_ = np.zeros(c, np.int64)
    for ax in range(d):
        oct_ |= (re[:, ax] >= base[ax] + w).astype(np.int64) << ax
    order = np.argsort(oct_, kind="stable")
    tree.points[s : s + c] = tree.points[idx[order]]
    tree.perm[s : s + c] = tree.perm[idx[order]]
    counts = np.bincount(oct_, minlength=1 << d) if c else np.zeros(1 << d, np.int64)
    offs = s + np.concatenate([[0], np.cumsum(counts)[:-1]])
    nb = tree.n_boxes
    kid_ids = np.arange(nb, nb + (1 << d))
    tree.children[b, :] = kid_ids
    kid_ic = np.empty((1 << d, d), np.int64)
    for o in range(1 << d):
        kid_ic[o] = tree.icoord[b] * 2 + ((o >> np.arange(d)) & 1)
    tree.level = np.concatenate([tree.level, np.full(1 << d, tree.level[b] + 1)])
    tree.parent = np.concatenate([tree.parent, np.full(1 << d, b)])
    tree.children = np.vstack([tree.children, np.full((1 << d, 1 << d), -1, np.int64)])
    tree.icoord = np.vstack([tree.icoord, kid_ic])
    tree.pt_start = np.concatenate([tree.pt_start, offs])
    tree.pt_count = np.concatenate([tree.pt_count, counts])
    return kid_ids


def _center_units(tree: Tree, ids, unit_level):
    """Box centers in units of w(unit_level)/2 as exact integers."""
    lv = tree.level[ids].astype(np.int64)
    shift = unit_level - lv
    return (2 * tree.icoord[ids] + 1) << shift[:, None]


def _near_int(tree: Tree, a, b, k: int, unit_level: int):
    """Exact integer test ||x_a - x_b||_inf <= (k/2)(w_a + w_b)."""
    ca = _center_units(tree, a, unit_level)
    cb = _center_units(tree, b, unit_level)
    dist = np.abs(ca - cb).max(axis=-1)
    wa = np.int64(2) << (unit_level - tree.level[a].astype(np.int64))
    wb = np.int64(2) << (unit_level - tree.level[b].astype(np.int64))
    return 2 * dist <= k * (wa + wb)


def level_restrict(tree: Tree, cfg: TreeConfig) -> Tree:
    """Split coarse leaves until childless boxes 3+ levels apart never touch.

    Touching means ||x_1 - x_2||_inf <= (k/2)(w_1 + w_2); offending coarse
    leaves are subdivided (possibly creating empty children) until every
    childless pair at level distance > 2 is separated.
    """
    k = cfg.k
    changed = True
    while changed:
        changed = False
        max_lv = tree.n_levels - 1
        unit = max_lv + 1
        # hash childless boxes per level for window lookups
        leaf_ids = np.nonzero(tree.is_leaf)[0]
        by_level = {}
        for lv in range(max_lv + 1):
            ids = leaf_ids[tree.level[leaf_ids] == lv]
            by_level[lv] = {tuple(ic): int(i) for ic, i in zip(tree.icoord[ids], ids)}
        to_split = set()
        for b in leaf_ids:
            lb = int(tree.level[b])
            for lc in range(0, lb - 2):
                table = by_level.get(lc)
                if not table:
                    continue
                # coarse cells whose k-dilated box can touch b
                wb = tree.root_width / (1 << lb)
                wc = tree.root_width / (1 << lc)
                cb = tree.root_lo + (tree.icoord[b] + 0.5) * wb
                reach = 0.5 * k * (wb + wc)
                lo = np.floor((cb - reach - tree.root_lo) / wc).astype(np.int64)
                hi = np.floor((cb + reach - tree.root_lo) / wc).astype(np.int64)
                rng = [range(max(l, 0), min(h, (1 << lc) - 1) + 1) for l, h in zip(lo, hi)]
                for cell in itertools.product(*rng):
                    c = table.get(cell)
                    if c is None or c in to_split:
                        continue
                    if _near_int(
                        tree, np.array([b]), np.array([c]), k, unit
                    )[0]:
                        to_split.add(c)
        if to_split:
            changed = True
            for c in sorted(to_split):
                if int(tree.level[c]) + 1 > cfg.max_levels:
                    raise MaxDepthExceeded("level restriction hit max_levels")
                _subdivide_leaf(tree, c)
    return tree


def complexify_centers(tree: Tree) -> Tree:
    """Attach complexified centers: real center + i * mean Im of box points.

    Empty boxes inherit the parent's imaginary offset.
    """
    n = tree.n_boxes
    d = tree.dimension
    im = tree.points.imag
    pref = np.concatenate([np.zeros((1, d)), np.cumsum(im, axis=0)])
    centers = tree.center()
    out = centers.astype(np.complex128)
    order = np.argsort(tree.level, kind="stable")  # parents before children
    for b in order:
        s, c = int(tree.pt_start[b]), int(tree.pt_count[b])
        if c > 0:
            mean_im = (pref[s + c] - pref[s]) / c
        else:
            p = int(tree.parent[b])
            mean_im = out[p].imag if p >= 0 else np.zeros(d)
        out[b] = centers[b] + 1j * mean_im
    tree.cplx_center = out
    return tree


def build_lists(tree: Tree, cfg: TreeConfig) -> InteractionLists:
    """Construct colleagues and Lists 1-4 of the adaptive algorithm.

    list1: childless near boxes of a childless box (any level, symmetric,
    includes the box itself).  list2: same-level children of the parent's
    colleagues at distance >= (k+1) w.  list3: descendants of colleagues
    that are separated from the (childless) box although their parent is
    not.  list4 is the transpose of list3.
    """
    k = cfg.k
    n = tree.n_boxes
    unit = tree.n_levels
    colleagues = [np.empty(0, np.int64) for _ in range(n)]
    colleagues[0] = np.array([0], np.int64)
    list2 = [np.empty(0, np.int64) for _ in range(n)]
    for lv in range(1, tree.n_levels):
        ids = tree.level_ids(lv)
        if ids.size == 0:
            continue
        cand_all = []
        owner = []
        for b in ids:
            p = int(tree.parent[b])
            cols = colleagues[p]
            kids = tree.children[cols]
            kids = kids[kids >= 0]
            cand_all.append(kids)
            owner.append(np.full(kids.size, b))
        cand = np.concatenate(cand_all)
        own = np.concatenate(owner)
        near = _near_int(tree, own, cand, k, unit)
        for b in ids:
            colleagues[b] = np.empty(0, np.int64)
        sel = np.argsort(own, kind="stable")
        own_s, cand_s, near_s = own[sel], cand[sel], near[sel]
        bounds = np.searchsorted(own_s, ids)
        bounds = np.append(bounds, own_s.size)
        for i, b in enumerate(ids):
            sl = slice(bounds[i], bounds[i + 1])
            colleagues[b] = cand_s[sl][near_s[sl]]
            list2[b] = cand_s[sl][~near_s[sl]]

    list1 = [[] for _ in range(n)]
    list3 = [[] for _ in range(n)]
    list4 = [[] for _ in range(n)]
    is_leaf = tree.is_leaf
    for b in np.nonzero(is_leaf)[0]:
        b = int(b)
        stack = [int(c) for c in colleagues[b] if c != b]
        list1[b].append(b)
        while stack:
            c = stack.pop()
            if is_leaf[c]:
                list1[b].append(c)
                if tree.level[c] > tree.level[b]:
                    list1[c].append(b)  # symmetric coarse-side entry
                continue
            for ch in tree.children[c]:
                ch = int(ch)
                if _near_int(tree, np.array([b]), np.array([ch]), k, unit)[0]:
                    stack.append(ch)
                else:
                    list3[b].append(ch)
                    list4[ch].append(b)

    def _fin(lst):
        return [np.unique(np.asarray(v, np.int64)) for v in lst]

    return InteractionLists(
        list1=_fin(list1),
        list2=[np.sort(v) for v in list2],
        list3=_fin(list3),
        list4=_fin(list4),
        colleagues=[np.sort(v) for v in colleagues],
    )


def dump_tree(tree: Tree) -> str:
    """One box per line: id level center width im-offset parent children leaf."""
    lines = []
    centers = tree.center()
    cc = tree.cplx_center
    for b in range(tree.n_boxes):
        w = tree.root_width / (1 << int(tree.level[b]))
        im = cc[b].imag if cc is not None else np.zeros(tree.dimension)
        kids = ",".join(str(int(c)) for c in tree.children[b] if c >= 0) or "-"
        lines.append(
            f"{b} {int(tree.level[b])} "
            + " ".join(f"{v:.17g}" for v in centers[b])
            + f" {w:.17g} "
            + " ".join(f"{v:.17g}" for v in im)
            + f" {int(tree.parent[b])} {kids} {int(tree.is_leaf[b])}"
        )
    return "\n".join(lines) + "\n"
