"""Rooted dendrograms with diameter-labeled nodes.

The induced distance between two leaves is the diameter of their least
common ancestor; strictly decreasing diameters along every root-leaf path
make that distance an ultrametric.  Leaves carry point indices of the
ambient space, so a tree on a subset keeps the original indexing.

Children are kept sorted by their smallest contained point index, which
makes every construction in this package deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .config import resolve_tol
from .errors import ArgumentError, StructuralError


@dataclass(frozen=True)
class TreeNode:
    diam: float
    point: int | None = None
    children: tuple = ()

    @property
    def is_leaf(self) -> bool:
        return self.point is not None

    def min_point(self) -> int:
        if self.is_leaf:
            return self.point
        return min(c.min_point() for c in self.children)


def leaf(point: int) -> TreeNode:
    return TreeNode(diam=0.0, point=int(point))


def internal(diam: float, children: Iterable[TreeNode]) -> TreeNode:
    kids = tuple(sorted(children, key=lambda c: c.min_point()))
    if len(kids) < 2:
        raise StructuralError("internal node needs at least two children")
    return TreeNode(diam=float(diam), point=None, children=kids)


@dataclass(frozen=True)
class UltrametricTree:
    """A dendrogram plus convenience accessors; immutable."""

    root: TreeNode
    _points: tuple = field(init=False, repr=False)

    def __post_init__(self):
        pts = tuple(sorted(_collect_points(self.root)))
        object.__setattr__(self, "_points", pts)

    @property
    def points(self) -> tuple:
        """Sorted leaf point indices."""
        return self._points

    @property
    def n(self) -> int:
        return len(self._points)

    def diameter(self) -> float:
        return self.root.diam

    def cells(self) -> list[tuple[float, frozenset]]:
        """(diameter, leaf set) for every node, preorder."""
        out: list[tuple[float, frozenset]] = []

        def walk(node: TreeNode) -> frozenset:
            if node.is_leaf:
                cell = frozenset((node.point,))
            else:
                cell = frozenset().union(*(walk(c) for c in node.children))
            out.append((node.diam, cell))
            return cell

        walk(self.root)
        out.reverse()  # root first
        return out

    def induced_matrix(self) -> tuple[tuple, np.ndarray]:
        """(sorted leaf points, ultrametric matrix in that order)."""
        pts = self._points
        pos = {p: i for i, p in enumerate(pts)}
        m = np.zeros((len(pts), len(pts)), dtype=np.float64)

        def walk(node: TreeNode) -> list[int]:
            if node.is_leaf:
                return [pos[node.point]]
            groups = [walk(c) for c in node.children]
            for a in range(len(groups)):
                for b in range(a + 1, len(groups)):
                    for i in groups[a]:
                        for j in groups[b]:
                            m[i, j] = m[j, i] = node.diam
            return [i for g in groups for i in g]

        walk(self.root)
        return pts, m

    def rho(self, x: int, y: int) -> float:
        """Induced distance between two leaf points."""
        if x == y:
            return 0.0
        node = self.root
        while not node.is_leaf:
            owners = [c for c in node.children if _contains(c, x)]
            other = [c for c in node.children if _contains(c, y)]
            if owners[0] is not other[0]:
                return node.diam
            node = owners[0]
        raise ArgumentError(f"points {x},{y} not separated in tree")

    def ball(self, x: int, r: float, tol: float | None = None) -> frozenset:
        """Leaf set of the largest ancestor of x with diameter <= r."""
        tol = resolve_tol(tol)
        node = self.root
        best = None
        while True:
            if node.diam <= r + tol:
                best = node
                break
            if node.is_leaf:
                break
            node = next(c for c in node.children if _contains(c, x))
        if best is None:
            best = _leaf_node(self.root, x)
        return frozenset(_collect_points(best))

    def scale(self, factor: float) -> "UltrametricTree":
        if not factor > 0:
            raise ArgumentError(f"scale factor must be positive, got {factor}")

        def walk(node: TreeNode) -> TreeNode:
            if node.is_leaf:
                return node
            return TreeNode(diam=node.diam * factor, point=None,
                            children=tuple(walk(c) for c in node.children))

        return UltrametricTree(walk(self.root))

    def to_jsonable(self) -> dict:
        def walk(node: TreeNode):
            if node.is_leaf:
                return {"point": int(node.point)}
            return {"diam": float(node.diam), "children": [walk(c) for c in node.children]}

        return walk(self.root)

    @classmethod
    def from_jsonable(cls, obj) -> "UltrametricTree":
        def walk(o) -> TreeNode:
            if not isinstance(o, dict):
                raise StructuralError(f"tree node must be an object, got {type(o).__name__}")
            if "point" in o:
                return leaf(o["point"])
            if "diam" not in o or "children" not in o:
                raise StructuralError("internal tree node requires 'diam' and 'children'")
            kids = [walk(c) for c in o["children"]]
            if len(kids) == 1:
                return kids[0]
            return internal(o["diam"], kids)

        return cls(walk(obj))


def _collect_points(node: TreeNode) -> list[int]:
    if node.is_leaf:
        return [node.point]
    out: list[int] = []
    for c in node.children:
        out.extend(_collect_points(c))
    return out


def _contains(node: TreeNode, p: int) -> bool:
    if node.is_leaf:
        return node.point == p
    return any(_contains(c, p) for c in node.children)


def _leaf_node(node: TreeNode, p: int) -> TreeNode:
    if node.is_leaf:
        if node.point != p:
            raise ArgumentError(f"point {p} not in tree")
        return node
    for c in node.children:
        if _contains(c, p):
            return _leaf_node(c, p)
    raise ArgumentError(f"point {p} not in tree")


def validate_tree(tree: UltrametricTree, tol: float | None = None) -> None:
    """Structural invariants: unique leaves, leaf diameter 0, strictly
    decreasing diameters down every path.  Raises on the first failure."""
    tol = resolve_tol(tol)
    seen: set[int] = set()

    def walk(node: TreeNode, parent_diam: float | None) -> None:
        if node.is_leaf:
            if node.diam != 0.0:
                raise StructuralError(f"leaf {node.point} carries diameter {node.diam}")
            if node.point in seen:
                raise StructuralError(f"point {node.point} appears on two leaves")
            seen.add(node.point)
        else:
            if node.diam < 0:
                raise StructuralError(f"negative node diameter {node.diam}")
            if len(node.children) < 2:
                raise StructuralError("internal node with fewer than two children")
            for c in node.children:
                walk(c, node.diam)
            return
        if parent_diam is not None and node.diam >= parent_diam:
            raise StructuralError(
                f"diameters must strictly decrease: child {node.diam} under {parent_diam}")

    def check_decrease(node: TreeNode) -> None:
        for c in node.children:
            if not c.is_leaf:
                if c.diam >= node.diam:
                    raise StructuralError(
                        f"diameters must strictly decrease: child {c.diam} "
                        f"under parent {node.diam}")
                check_decrease(c)

    walk(tree.root, None)
    if not tree.root.is_leaf:
        check_decrease(tree.root)


def check_ultrametric_matrix(mat: np.ndarray, tol: float | None = None):
    """Worst strengthened-triangle violation of a symmetric matrix.

    Returns (max_violation, witness_triple); a violation within tol is
    considered clean by callers.
    """
    tol = resolve_tol(tol)
    n = mat.shape[0]
    worst = 0.0
    witness = None
    for i in range(n):
        for j in range(i + 1, n):
            cap = np.maximum(mat[i, :], mat[:, j])
            k = int(np.argmax(mat[i, j] - cap))
            gap = float(mat[i, j] - cap[k])
            if k != i and k != j and gap > worst:
                worst = gap
                witness = (i, k, j)
    return worst, witness


def ultrametric_from_tree(tree: UltrametricTree, tol: float | None = None):
    """Induced matrix of a structurally valid tree, with the triple check run.

    Returns (points, matrix).  Raises StructuralError if diameters do not
    decrease or the induced matrix fails the strengthened triangle inequality
    beyond tolerance (impossible for a valid tree; the check is the point).
    """
    tol = resolve_tol(tol)
    validate_tree(tree, tol)
    pts, mat = tree.induced_matrix()
    worst, witness = check_ultrametric_matrix(mat, tol)
    if worst > tol:
        raise StructuralError(
            f"induced matrix violates the ultrametric inequality by {worst:.3g}",
            witness=list(witness))
    return pts, mat


def restrict_tree(tree: UltrametricTree, subset: Iterable[int]) -> UltrametricTree:
    """Prune to the given leaf points; single-child chains collapse so LCA
    diameters (and hence the induced distances) are preserved."""
    keep = set(int(i) for i in subset)
    if not keep:
        raise ArgumentError("cannot restrict a tree to an empty leaf set")
    missing = keep - set(tree.points)
    if missing:
        raise ArgumentError(f"points {sorted(missing)} not in tree")

    def walk(node: TreeNode) -> TreeNode | None:
        if node.is_leaf:
            return node if node.point in keep else None
        kids = [w for w in (walk(c) for c in node.children) if w is not None]
        if not kids:
            return None
        if len(kids) == 1:
            return kids[0]
        return TreeNode(diam=node.diam, point=None,
                        children=tuple(sorted(kids, key=lambda c: c.min_point())))

    pruned = walk(tree.root)
    assert pruned is not None
    return UltrametricTree(pruned)


@dataclass(frozen=True)
class DistortionCertificate:
    """Bounds d <= rho <= upper*d measured on concrete data.

    lower is min rho/d (>= 1 means the tree dominates the metric); upper is
    max rho/d; witness_pair attains the upper ratio.
    """

    lower: float
    upper: float
    witness_pair: tuple

    def to_jsonable(self) -> dict:
        return {"lower": self.lower, "upper": self.upper,
                "witness_pair": list(self.witness_pair)}


def distortion_certificate(space, tree: UltrametricTree,
                           tol: float | None = None) -> DistortionCertificate:
    """Measure the distortion of a tree against the space it lives over."""
    tol = resolve_tol(tol)
    pts, mat = tree.induced_matrix()
    if len(pts) < 2:
        return DistortionCertificate(lower=1.0, upper=1.0,
                                     witness_pair=(pts[0], pts[0]) if pts else (0, 0))
    idx = list(pts)
    sub = space.dist[np.ix_(idx, idx)]
    iu = np.triu_indices(len(idx), 1)
    ratios = mat[iu] / sub[iu]
    hi = int(np.argmax(ratios))
    lo = int(np.argmin(ratios))
    return DistortionCertificate(
        lower=float(ratios[lo]),
        upper=float(ratios[hi]),
        witness_pair=(pts[iu[0][hi]], pts[iu[1][hi]]))
