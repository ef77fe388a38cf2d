"""The adaptive tree: built on real parts, centers complexified afterward.

Shows subdivision, the level-restriction pass, complexified centers, the
four interaction lists, and the coverage audit that certifies every
(target box, source point) pair is handled exactly once.
"""

import numpy as np

from zfmm.oracle import gen_wobble2d
from zfmm.tree import TreeConfig, build_lists, build_tree, complexify_centers, dump_tree, level_restrict

pts = gen_wobble2d(6000)
cfg = TreeConfig(max_pts_per_leaf=40, k=1)

tree = build_tree(pts, cfg)
print(f"built tree: {tree.n_boxes} boxes, {tree.n_levels} levels")
n_before = tree.n_boxes
level_restrict(tree, cfg)
print(f"level restriction added {tree.n_boxes - n_before} boxes")

# Complexified centers: real center + i * (mean imaginary part of the
# box's points); empty boxes inherit the parent's offset.
complexify_centers(tree)
deep = np.argmax(tree.level * (tree.pt_count > 0))
print("example box center:", tree.cplx_center[deep])

lists = build_lists(tree, cfg)
leaves = np.nonzero(tree.is_leaf & (tree.pt_count > 0))[0]
b = int(leaves[len(leaves) // 2])
print(f"\nbox {b} (level {int(tree.level[b])}, {int(tree.pt_count[b])} pts):")
print("  list1 (direct neighbours):   ", lists.list1[b].size)
print("  list2 (same-level M2L):      ", lists.list2[b].size)
print("  list3 (separated descendants):", lists.list3[b].size)
print("  list4 (coarse source boxes):  ", lists.list4[b].size)

# Coverage audit: walking a leaf's ancestor chain, each source point must
# be hit by exactly one of direct/list2/list3/list4.
bad = 0
for b in leaves:
    cov = np.zeros(len(pts), np.int64)
    a = int(b)
    while a >= 0:
        for c in np.concatenate([lists.list2[a], lists.list4[a]]):
            c = int(c)
            cov[tree.pt_start[c] : tree.pt_start[c] + tree.pt_count[c]] += 1
        a = int(tree.parent[a])
    for c in np.concatenate([lists.list1[int(b)], lists.list3[int(b)]]):
        c = int(c)
        cov[tree.pt_start[c] : tree.pt_start[c] + tree.pt_count[c]] += 1
    bad += int((cov != 1).sum())
print("\ncoverage audit miscounts:", bad)

# Text dump (one box per line) for golden tests / debugging.
print("\nfirst three dump lines:")
print("\n".join(dump_tree(tree).splitlines()[:3]))
