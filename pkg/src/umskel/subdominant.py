"""Subdominant ultrametric and the exact minimum-distortion embedding.

The subdominant ultrametric u of a finite metric d is the pointwise-largest
ultrametric below d; equivalently u(x,y) is the minimax path distance (the
smallest possible maximum edge over paths x -> y).  A single-linkage sweep
(sort edges ascending, merge clusters) computes it exactly and the merge
order is the dendrogram.

Scaling that dendrogram by D* = max d/u yields the optimal non-contracting
embedding into an ultrametric: no ultrametric rho with d <= rho achieves a
smaller max rho/d.  `exhaustive_min_distortion` certifies this at tiny n by
enumerating every leaf-labeled hierarchy.
"""

from __future__ import annotations

import itertools

import numpy as np

from .config import HIERARCHY_ORACLE_CAP
from .errors import ArgumentError, CapacityError
from .metric import FiniteMetricSpace, require_valid_metric
from .tree import TreeNode, UltrametricTree, leaf


def subdominant_ultrametric(space: FiniteMetricSpace,
                            tol: float | None = None) -> UltrametricTree:
    """Single-linkage dendrogram of the space.

    Clusters merging at exactly equal heights collapse into one node, so
    diameters strictly decrease along every path and an ultrametric input is
    reproduced exactly by the induced matrix.
    """
    require_valid_metric(space, tol)
    n = space.n
    if n == 1:
        return UltrametricTree(leaf(0))

    edges = sorted(
        ((space.d(i, j), i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda e: e[0])

    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    node_of: dict[int, TreeNode] = {i: leaf(i) for i in range(n)}
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri == rj:
            continue
        a, b = node_of[ri], node_of[rj]
        kids: list[TreeNode] = []
        for sub in (a, b):
            if not sub.is_leaf and sub.diam == w:
                kids.extend(sub.children)
            else:
                kids.append(sub)
        merged = TreeNode(diam=w, point=None,
                          children=tuple(sorted(kids, key=lambda c: c.min_point())))
        parent[rj] = ri
        node_of[ri] = merged
    root = node_of[find(0)]
    return UltrametricTree(root)


def min_ultrametric_distortion(space: FiniteMetricSpace, tol: float | None = None
                               ) -> tuple[float, UltrametricTree]:
    """(D*, tree) with d <= rho <= D*.d and D* minimal.

    D* = max over pairs of d/u for the subdominant u, and the returned tree is
    the subdominant dendrogram scaled by D*:  any dominating ultrametric rho
    satisfies rho <= D.u along minimax paths, so D >= d/u pairwise.
    """
    tree = subdominant_ultrametric(space, tol)
    if space.n < 2:
        return 1.0, tree
    pts, u = tree.induced_matrix()
    iu = np.triu_indices(space.n, 1)
    dstar = float(np.max(space.dist[iu] / u[iu]))
    return dstar, tree.scale(dstar)


def hierarchy_topologies(points: tuple):
    """All leaf-labeled multifurcating rooted trees on the given points,
    as nested frozensets (the laminar family of each topology)."""
    points = tuple(points)
    if len(points) == 1:
        yield frozenset((frozenset(points),))
        return
    for blocks in _set_partitions(points):
        if len(blocks) < 2:
            continue
        for combo in itertools.product(*(list(hierarchy_topologies(tuple(b)))
                                         for b in blocks)):
            fam = frozenset((frozenset(points),)).union(*combo)
            yield fam


def _set_partitions(items: tuple):
    """All set partitions, generated by placing items one at a time."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in _set_partitions(rest):
        for k in range(len(smaller)):
            yield smaller[:k] + [smaller[k] + [first]] + smaller[k + 1:]
        yield smaller + [[first]]


def exhaustive_min_distortion(space: FiniteMetricSpace,
                              cap: int = HIERARCHY_ORACLE_CAP) -> float:
    """Brute-force optimum over every dendrogram topology.

    For a fixed topology the level values minimizing the distortion are the
    set diameters (the pointwise-smallest monotone assignment dominating d),
    so the distortion of a topology is max over nodes of
    diam(node) / min{d(x,y): lca(x,y) = node}.
    """
    require_valid_metric(space)
    n = space.n
    if n > cap:
        raise CapacityError(
            f"exhaustive hierarchy search capped at n={cap}, got {n}", n=n, cap=cap)
    if n < 2:
        return 1.0
    d = space.dist
    pts = tuple(range(n))

    best = np.inf
    for fam in hierarchy_topologies(pts):
        worst = 1.0
        ok = True
        for cell in fam:
            if len(cell) < 2:
                continue
            idx = sorted(cell)
            diam = float(d[np.ix_(idx, idx)].max())
            # pairs whose LCA is this cell: those not together in any child cell
            min_lca = np.inf
            for i, j in itertools.combinations(idx, 2):
                together_below = any(
                    i in sub and j in sub for sub in fam
                    if sub < cell)
                if not together_below:
                    min_lca = min(min_lca, d[i, j])
            if min_lca == np.inf:
                continue
            worst = max(worst, diam / min_lca)
            if worst >= best:
                ok = False
                break
        if ok:
            best = min(best, worst)
    return float(best)


def minimax_matrix_oracle(space: FiniteMetricSpace) -> np.ndarray:
    """Reference subdominant matrix via explicit path enumeration (tiny n)."""
    n = space.n
    if n > 8:
        raise CapacityError(f"path enumeration oracle capped at n=8, got {n}", n=n)
    d = space.dist
    u = d.copy()
    for i in range(n):
        for j in range(i + 1, n):
            others = [k for k in range(n) if k != i and k != j]
            best = d[i, j]
            for m in range(len(others) + 1):
                for mids in itertools.permutations(others, m):
                    path = (i, *mids, j)
                    worst = max(d[path[t], path[t + 1]] for t in range(len(path) - 1))
                    best = min(best, worst)
            u[i, j] = u[j, i] = best
    return u


def distortion_of_subset(space: FiniteMetricSpace, subset,
                         tol: float | None = None) -> float:
    """min_ultrametric_distortion of the induced subspace (1.0 below 2 points)."""
    from .metric import restrict_space

    idx = sorted(set(int(i) for i in subset))
    if not idx:
        raise ArgumentError("empty subset has no distortion")
    if len(idx) < 2:
        return 1.0
    dstar, _ = min_ultrametric_distortion(restrict_space(space, idx), tol)
    return dstar


def tree_on_subset(space: FiniteMetricSpace, subset,
                   tol: float | None = None) -> tuple[float, UltrametricTree]:
    """Optimal ultrametric tree on a subset, leaves in ambient indices."""
    from .metric import restrict_space

    idx = sorted(set(int(i) for i in subset))
    if not idx:
        raise ArgumentError("empty subset has no tree")
    if len(idx) == 1:
        return 1.0, UltrametricTree(leaf(idx[0]))
    dstar, tree = min_ultrametric_distortion(restrict_space(space, idx), tol)
    return dstar, relabel_tree(tree, {k: idx[k] for k in range(len(idx))})


def relabel_tree(tree: UltrametricTree, mapping: dict) -> UltrametricTree:
    def walk(node: TreeNode) -> TreeNode:
        if node.is_leaf:
            return leaf(mapping[node.point])
        return TreeNode(diam=node.diam, point=None,
                        children=tuple(sorted((walk(c) for c in node.children),
                                              key=lambda c: c.min_point())))

    return UltrametricTree(walk(tree.root))
