"""Merging two approximately-ultrametric subsets into one dendrogram.

Given subsets U1, U2 of a common metric space, each carrying a dominating
ultrametric of distortion D1 resp. D2, one partition step splits U1 u U2
into cells whose diameters shrink by the factor (1 - delta) and whose
pairwise separations stay above diam/(D1*D2 + 2*D1 + 2*D2 + 2 + eps).
Recursing inside the cells builds an ultrametric on the union whose
distortion is at most D1*D2 + 2*D1 + 2*D2 + 2 + eps.

Cells are built from threshold classes: E_i are the classes of rho1 at
threshold a*diam on U1, F_j those of rho2 at b*diam on U2; each F_j within
distance c*diam of some E_i is absorbed there (at most one E_i can claim a
given F_j).  A point lying in both subsets always follows its E-class;
leftover cells are the F_j minus U1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import resolve_tol
from .errors import ArgumentError, ContractError, InternalInvariantError
from .metric import (FiniteMetricSpace, require_valid_metric, set_distance,
                     subset_diameter)
from .tree import (DistortionCertificate, TreeNode, UltrametricTree,
                   distortion_certificate, leaf, restrict_tree)


@dataclass(frozen=True)
class MergeParams:
    """Distortions, slack and the derived split constants.

    With Q = D1*D2 + 2*D1 + 2*D2 + 2:
      a = (D1*D2 + 2*D1)/Q,  b = D2/(Q + eps),  c = 1/Q,
      delta = 2*eps*D2 / (Q*(Q + eps)),
    and the identity a + 2b + 2c = 1 - delta holds.
    """

    D1: float
    D2: float
    eps: float
    a: float
    b: float
    c: float
    delta: float

    @property
    def q(self) -> float:
        return self.D1 * self.D2 + 2.0 * self.D1 + 2.0 * self.D2 + 2.0

    @property
    def distortion_bound(self) -> float:
        return self.q + self.eps

    def to_jsonable(self) -> dict:
        return {"D1": self.D1, "D2": self.D2, "eps": self.eps, "a": self.a,
                "b": self.b, "c": self.c, "delta": self.delta,
                "distortion_bound": self.distortion_bound}


def merge_params(D1: float, D2: float, eps: float) -> MergeParams:
    if not (D1 >= 1.0 and D2 >= 1.0):
        raise ArgumentError(f"distortions must be >= 1, got D1={D1}, D2={D2}")
    if not eps > 0.0:
        raise ArgumentError(
            f"eps must be strictly positive (delta > 0 drives termination), got {eps}")
    q = D1 * D2 + 2.0 * D1 + 2.0 * D2 + 2.0
    a = (D1 * D2 + 2.0 * D1) / q
    b = D2 / (q + eps)
    c = 1.0 / q
    delta = 2.0 * eps * D2 / (q * (q + eps))
    params = MergeParams(D1=D1, D2=D2, eps=eps, a=a, b=b, c=c, delta=delta)
    gap = abs(params.a + 2.0 * params.b + 2.0 * params.c - (1.0 - params.delta))
    if gap > 1e-12:
        raise InternalInvariantError(
            f"identity a+2b+2c = 1-delta off by {gap:.3g}", D1=D1, D2=D2, eps=eps)
    return params


@dataclass(frozen=True)
class ClusterCell:
    points: tuple           # sorted point indices
    kind: str               # "E" (E_i plus absorbed F_j's) or "F" (leftover)
    e_index: int | None
    f_indices: tuple


@dataclass(frozen=True)
class ClusterPartition:
    cells: tuple            # ClusterCell, ordered by smallest point
    level_diameter: float

    def point_lists(self) -> list[tuple]:
        return [c.points for c in self.cells]

    def to_jsonable(self) -> dict:
        return {
            "level_diameter": self.level_diameter,
            "cells": [{"points": list(c.points), "kind": c.kind,
                       "e_index": c.e_index, "f_indices": list(c.f_indices)}
                      for c in self.cells],
        }


def _threshold_classes(tree: UltrametricTree, threshold: float, tol: float) -> list[tuple]:
    """Classes of the relation rho <= threshold, via maximal tree cells."""
    classes: list[tuple] = []

    def walk(node: TreeNode) -> None:
        if node.is_leaf:
            classes.append((node.point,))
        elif node.diam <= threshold + tol:
            classes.append(tuple(sorted(_leafset(node))))
        else:
            for child in node.children:
                walk(child)

    walk(tree.root)
    return classes


def _leafset(node: TreeNode) -> list[int]:
    if node.is_leaf:
        return [node.point]
    out: list[int] = []
    for c in node.children:
        out.extend(_leafset(c))
    return out


def _check_side(space: FiniteMetricSpace, pts: tuple, tree: UltrametricTree,
                d_bound: float, side: str, tol: float) -> None:
    if tuple(sorted(tree.points)) != tuple(sorted(pts)):
        raise ArgumentError(f"rho{side} leaf set does not match U{side}")
    cert = distortion_certificate(space, tree, tol)
    if len(pts) >= 2 and cert.lower < 1.0 - tol:
        x, y = _min_ratio_pair(space, tree)
        raise ContractError(
            f"rho{side} fails to dominate d at pair ({x}, {y})",
            pair=[x, y], ratio=cert.lower)
    if cert.upper > d_bound + tol:
        raise ContractError(
            f"rho{side} exceeds the claimed distortion {d_bound} at pair "
            f"{cert.witness_pair}", pair=list(cert.witness_pair), ratio=cert.upper)


def _min_ratio_pair(space: FiniteMetricSpace, tree: UltrametricTree) -> tuple:
    pts, mat = tree.induced_matrix()
    best = None
    best_ratio = math.inf
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            ratio = mat[i, j] / space.d(pts[i], pts[j])
            if ratio < best_ratio:
                best_ratio = ratio
                best = (pts[i], pts[j])
    return best


def union_partition_step(space: FiniteMetricSpace, U1, U2,
                         rho1: UltrametricTree | None,
                         rho2: UltrametricTree | None,
                         params: MergeParams,
                         tol: float | None = None,
                         validate: bool = True) -> ClusterPartition:
    """One split of U1 u U2 into cells, asserting both displayed bounds.

    When one side is empty the step degenerates to the threshold classes of
    the surviving side; diameters and separations still satisfy the bounds.
    """
    tol = resolve_tol(tol)
    u1 = tuple(sorted(set(int(i) for i in U1)))
    u2 = tuple(sorted(set(int(i) for i in U2)))
    if u1 and rho1 is None:
        raise ArgumentError("U1 is nonempty but rho1 is missing")
    if u2 and rho2 is None:
        raise ArgumentError("U2 is nonempty but rho2 is missing")
    union = tuple(sorted(set(u1) | set(u2)))
    if len(union) < 2:
        raise ArgumentError("partition step needs at least two points in U1 u U2")
    delta_level = subset_diameter(space, union)
    if delta_level <= 0.0:
        raise ArgumentError("partition step needs a positive diameter")
    if validate:
        require_valid_metric(space, tol)
        if u1 and rho1 is not None:
            _check_side(space, u1, rho1, params.D1, "1", tol)
        if u2 and rho2 is not None:
            _check_side(space, u2, rho2, params.D2, "2", tol)

    cells = _partition_cells(space, u1, u2, rho1, rho2, params, delta_level, tol)
    partition = ClusterPartition(cells=tuple(cells), level_diameter=delta_level)
    covered = sorted(p for c in partition.cells for p in c.points)
    if covered != list(union):
        raise InternalInvariantError("cells do not partition U1 u U2",
                                     covered=covered, expected=list(union))
    _assert_partition_bounds(space, partition, params, tol)
    return partition


def _partition_cells(space, u1, u2, rho1, rho2, params, delta_level, tol):
    if u1 and not u2:
        classes = _threshold_classes(rho1, params.a * delta_level, tol)
        cells = [ClusterCell(points=cls, kind="E", e_index=i, f_indices=())
                 for i, cls in enumerate(sorted(classes))]
        return sorted(cells, key=lambda c: c.points[0])
    if u2 and not u1:
        classes = _threshold_classes(rho2, params.b * delta_level, tol)
        cells = [ClusterCell(points=cls, kind="F", e_index=None, f_indices=(j,))
                 for j, cls in enumerate(sorted(classes))]
        return sorted(cells, key=lambda c: c.points[0])

    e_classes = sorted(_threshold_classes(rho1, params.a * delta_level, tol))
    f_classes = sorted(_threshold_classes(rho2, params.b * delta_level, tol))
    u1_set = set(u1)

    owner: dict[int, int] = {}
    for j, f in enumerate(f_classes):
        close = [i for i, e in enumerate(e_classes)
                 if set_distance(space, e, f) <= params.c * delta_level + tol]
        if len(close) > 1:
            raise InternalInvariantError(
                f"F-class {j} is within c*diam of two E-classes {close}",
                f_class=list(f), e_classes=close)
        if close:
            owner[j] = close[0]

    cells: list[ClusterCell] = []
    for i, e in enumerate(e_classes):
        absorbed = tuple(j for j, f in enumerate(f_classes) if owner.get(j) == i)
        pts = set(e)
        for j in absorbed:
            pts.update(p for p in f_classes[j] if p not in u1_set)
        cells.append(ClusterCell(points=tuple(sorted(pts)), kind="E",
                                 e_index=i, f_indices=absorbed))
    for j, f in enumerate(f_classes):
        if j in owner:
            continue
        rest = tuple(sorted(p for p in f if p not in u1_set))
        if rest:
            cells.append(ClusterCell(points=rest, kind="F",
                                     e_index=None, f_indices=(j,)))
    return sorted(cells, key=lambda c: c.points[0])


def _assert_partition_bounds(space, partition: ClusterPartition,
                             params: MergeParams, tol: float) -> None:
    delta_level = partition.level_diameter
    diam_cap = (1.0 - params.delta) * delta_level
    sep_floor = delta_level / params.distortion_bound
    for cell in partition.cells:
        diam = subset_diameter(space, cell.points)
        if diam > diam_cap + tol:
            raise InternalInvariantError(
                f"cell diameter {diam} exceeds (1-delta)*diam = {diam_cap}",
                cell=list(cell.points))
    cells = partition.cells
    for x in range(len(cells)):
        for y in range(x + 1, len(cells)):
            gap = set_distance(space, cells[x].points, cells[y].points)
            if gap < sep_floor - tol:
                raise InternalInvariantError(
                    f"cells {x},{y} at distance {gap} below the floor {sep_floor}",
                    cell_a=list(cells[x].points), cell_b=list(cells[y].points))


def union_ultrametric(space: FiniteMetricSpace, U1, U2,
                      rho1: UltrametricTree, rho2: UltrametricTree,
                      eps: float = 1e-6, tol: float | None = None
                      ) -> tuple[UltrametricTree, DistortionCertificate]:
    """Recursive merge of two dominated subsets into one dendrogram.

    D1, D2 are measured from the supplied trees.  Node diameters are the
    metric diameters of the recursion cells, so every level inherits both
    partition bounds; the certificate upper is at most
    D1*D2 + 2*D1 + 2*D2 + 2 + eps.
    """
    tol = resolve_tol(tol)
    require_valid_metric(space, tol)
    u1 = tuple(sorted(set(int(i) for i in U1)))
    u2 = tuple(sorted(set(int(i) for i in U2)))
    union = tuple(sorted(set(u1) | set(u2)))
    if not union:
        raise ArgumentError("cannot merge two empty subsets")
    if union[0] < 0 or union[-1] >= space.n:
        raise ArgumentError(
            f"subset indices must lie in [0, {space.n}), got {union[0]}..{union[-1]}")

    d1 = distortion_certificate(space, rho1, tol).upper if len(u1) >= 2 else 1.0
    d2 = distortion_certificate(space, rho2, tol).upper if len(u2) >= 2 else 1.0
    params = merge_params(max(1.0, d1), max(1.0, d2), eps)
    if u1:
        _check_side(space, u1, rho1, params.D1, "1", tol)
    if u2:
        _check_side(space, u2, rho2, params.D2, "2", tol)

    top = subset_diameter(space, union)
    min_sep = _min_positive_distance(space, union)
    if top > 0.0 and min_sep > 0.0:
        depth_cap = math.ceil(math.log(top / min_sep) /
                              -math.log1p(-params.delta)) + 1
    else:
        depth_cap = 1

    u1_set, u2_set = set(u1), set(u2)

    def grow(pts: tuple, t1: UltrametricTree | None, t2: UltrametricTree | None,
             depth: int) -> TreeNode:
        if len(pts) == 1:
            return leaf(pts[0])
        if depth > depth_cap:
            raise InternalInvariantError(
                f"merge recursion exceeded its depth bound {depth_cap}",
                cell=list(pts))
        c1 = tuple(p for p in pts if p in u1_set)
        c2 = tuple(p for p in pts if p in u2_set)
        partition = union_partition_step(space, c1, c2, t1, t2, params,
                                         tol=tol, validate=False)
        kids = []
        for cell in partition.cells:
            s1 = tuple(p for p in cell.points if p in u1_set)
            s2 = tuple(p for p in cell.points if p in u2_set)
            kids.append(grow(
                cell.points,
                restrict_tree(t1, s1) if s1 and t1 is not None else None,
                restrict_tree(t2, s2) if s2 and t2 is not None else None,
                depth + 1))
        return TreeNode(diam=partition.level_diameter, point=None,
                        children=tuple(sorted(kids, key=lambda k: k.min_point())))

    tree = UltrametricTree(grow(union, rho1 if u1 else None,
                                rho2 if u2 else None, 1))
    cert = distortion_certificate(space, tree, tol)
    if cert.upper > params.distortion_bound + tol:
        raise InternalInvariantError(
            f"merged distortion {cert.upper} exceeds the bound "
            f"{params.distortion_bound}", witness=list(cert.witness_pair))
    return tree, cert


def _min_positive_distance(space: FiniteMetricSpace, pts: tuple) -> float:
    best = math.inf
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            v = space.d(pts[i], pts[j])
            if 0.0 < v < best:
                best = v
    return 0.0 if best == math.inf else best


def multi_union(space: FiniteMetricSpace, parts, eps: float = 1e-6,
                tol: float | None = None
                ) -> tuple[UltrametricTree, DistortionCertificate]:
    """Left-fold of `union_ultrametric` over (subset, tree, distortion) parts.

    The certificate upper is bounded by folding
    D -> D*Di + 2*D + 2*Di + 2 + eps over the parts' distortions.
    """
    parts = list(parts)
    if not parts:
        raise ArgumentError("multi_union needs at least one part")
    pts, tree, _ = parts[0]
    acc_pts = tuple(sorted(set(int(i) for i in pts)))
    acc_tree = tree
    bound = distortion_certificate(space, tree, tol).upper if len(acc_pts) >= 2 else 1.0
    for nxt_pts, nxt_tree, _ in parts[1:]:
        nxt = tuple(sorted(set(int(i) for i in nxt_pts)))
        acc_tree, cert = union_ultrametric(space, acc_pts, nxt,
                                           acc_tree, nxt_tree, eps, tol)
        d_i = distortion_certificate(space, nxt_tree, tol).upper if len(nxt) >= 2 else 1.0
        bound = bound * d_i + 2.0 * bound + 2.0 * d_i + 2.0 + eps
        acc_pts = tuple(sorted(set(acc_pts) | set(nxt)))
    cert = distortion_certificate(space, acc_tree, tol)
    if len(acc_pts) >= 2 and cert.upper > bound + resolve_tol(tol):
        raise InternalInvariantError(
            f"folded distortion {cert.upper} exceeds the fold bound {bound}")
    return acc_tree, cert


@dataclass(frozen=True)
class LineExample:
    """The sharpness instance: two interleaved blocks of integers on a line."""

    space: FiniteMetricSpace
    u1: tuple
    u2: tuple
    rho1: UltrametricTree
    rho2: UltrametricTree
    bounds: dict

    def to_jsonable(self) -> dict:
        return {
            "space": self.space.to_jsonable(),
            "u1": list(self.u1), "u2": list(self.u2),
            "rho1": self.rho1.to_jsonable(), "rho2": self.rho2.to_jsonable(),
            "bounds": dict(self.bounds),
        }


def make_line_example(M: int, N: int, tol: float | None = None) -> LineExample:
    """Blocks of M and N consecutive integers alternating along
    {0, ..., K(M+N)-1} with K = MN div (M+N); each side carries its
    two-level dominating ultrametric (within blocks M-1 resp. N-1; across
    blocks (K-1)(M+N) + M-1 resp. + N-1).

    Any ultrametric on the union (a path of K(M+N) consecutive integers)
    incurs distortion at least K(M+N)-1 = MN - L - 1.
    """
    if M < 2 or N < 2:
        raise ArgumentError(f"block sizes must be at least 2, got M={M}, N={N}")
    tol = resolve_tol(tol)
    K, L = divmod(M * N, M + N)
    n = K * (M + N)
    from .metric import path_space

    space = path_space(n)
    u1 = tuple(i * (M + N) + j for i in range(K) for j in range(M))
    u2 = tuple(i * (M + N) + M + j for i in range(K) for j in range(N))

    def two_level(blocks: list[tuple], within: float, across: float) -> UltrametricTree:
        kids = []
        for blk in blocks:
            kids.append(TreeNode(diam=float(within), point=None,
                                 children=tuple(leaf(p) for p in blk)))
        if len(kids) == 1:
            return UltrametricTree(kids[0])
        return UltrametricTree(TreeNode(diam=float(across), point=None,
                                        children=tuple(kids)))

    blocks1 = [tuple(i * (M + N) + j for j in range(M)) for i in range(K)]
    blocks2 = [tuple(i * (M + N) + M + j for j in range(N)) for i in range(K)]
    rho1 = two_level(blocks1, M - 1, (K - 1) * (M + N) + M - 1)
    rho2 = two_level(blocks2, N - 1, (K - 1) * (M + N) + N - 1)

    _check_side(space, u1, rho1, float(M - 1), "1", tol)
    _check_side(space, u2, rho2, float(N - 1), "2", tol)

    bounds = {
        "M": M, "N": N, "K": K, "L": L,
        "D1_bound": float(M - 1), "D2_bound": float(N - 1),
        "union_lower_bound": float(K * (M + N) - 1),
    }
    return LineExample(space=space, u1=u1, u2=u2, rho1=rho1, rho2=rho2,
                       bounds=bounds)
