"""Covering submeasures and the submeasure-to-measure construction.

The covering submeasure of a weighted space is, for each point set A, the
minimum over finite covers of A by closed balls of the sum of powered ball
masses mu(B(x, c_eps*r))^(1-eps).  Only balls centered at points with radii
among the realized distances matter: any other ball equals one of these as a
set, at no smaller cost.

Costs are quantized to integer multiples of 2^-40 (about 9.1e-13, below the
package tolerance).  Every cover sums at most n costs, so all sums stay
exactly representable in float64 and the set-cover DP, the branch-and-bound
oracle and the submeasure axioms compare exactly, with no rounding slack.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from . import kernels
from .config import exact_cover_cap, resolve_tol
from .errors import (ArgumentError, CapacityError, SubmeasureContractError)
from .measures import MeasureVec, WeightedSpace
from .metric import closed_ball
from .tree import TreeNode, UltrametricTree

COST_GRID = float(2.0 ** 40)


def quantize_cost(value: float) -> float:
    """Snap a covering cost to the exact dyadic grid."""
    return round(value * COST_GRID) / COST_GRID


@dataclass(frozen=True)
class Ball:
    center: int
    radius: float
    mask: int           # covered point set as a bitmask
    cost: float         # quantized mu(B(center, c_eps*radius))^(1-eps)

    def points(self) -> tuple:
        return tuple(b for b in range(self.mask.bit_length()) if (self.mask >> b) & 1)


def candidate_balls(ws: WeightedSpace, eps: float, c_eps: float,
                    tol: float | None = None) -> list[Ball]:
    """All distinct candidate balls, deduplicated by point set at least cost."""
    _check_params(eps, c_eps)
    tol = resolve_tol(tol)
    space, mu = ws.space, ws.mu
    best: dict[int, Ball] = {}
    for x in range(space.n):
        for r in sorted(set(float(v) for v in space.dist[x])):
            mask = _mask(closed_ball(space, x, r, tol))
            cost = quantize_cost(mu.ball_mass(space, x, c_eps * r, tol) ** (1.0 - eps))
            prev = best.get(mask)
            if prev is None or cost < prev.cost:
                best[mask] = Ball(center=x, radius=r, mask=mask, cost=cost)
    return sorted(best.values(), key=lambda b: (b.mask, b.cost))


def _check_params(eps: float, c_eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    if not c_eps >= 1.0:
        raise ArgumentError(f"c_eps must be at least 1, got {c_eps}")


def _mask(points: Iterable[int]) -> int:
    m = 0
    for p in points:
        m |= 1 << int(p)
    return m


class CoveringSubmeasure:
    """Exact evaluator of the covering submeasure of a weighted space."""

    def __init__(self, ws: WeightedSpace, eps: float, c_eps: float = 1.0,
                 cap: int | None = None, tol: float | None = None):
        _check_params(eps, c_eps)
        self.ws = ws
        self.eps = float(eps)
        self.c_eps = float(c_eps)
        self.cap = exact_cover_cap(cap)
        self.tol = resolve_tol(tol)
        self.balls = candidate_balls(ws, eps, c_eps, tol)
        self._table: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.ws.n

    def table(self) -> np.ndarray:
        """Minimum cover cost for every subset bitmask (2^n entries)."""
        if self._table is None:
            if self.n > self.cap:
                raise CapacityError(
                    f"exact cover table needs n <= {self.cap}, got {self.n}; "
                    f"greedy_value gives a labeled upper bound", n=self.n, cap=self.cap)
            masks = np.array([b.mask for b in self.balls], dtype=np.int64)
            costs = np.array([b.cost for b in self.balls], dtype=np.float64)
            self._table = kernels.setcover_min_costs(masks, costs, self.n)
        return self._table

    def value(self, points: Iterable[int]) -> float:
        pts = sorted(set(int(p) for p in points))
        if not pts:
            return 0.0
        if self.n <= self.cap:
            return float(self.table()[_mask(pts)])
        if len(pts) > self.cap:
            raise CapacityError(
                f"exact cover evaluation capped at |A| <= {self.cap}, got {len(pts)}; "
                f"greedy_value gives a labeled upper bound",
                size=len(pts), cap=self.cap)
        return self._value_remapped(pts)

    __call__ = value

    def _value_remapped(self, pts: list[int]) -> float:
        pos = {p: i for i, p in enumerate(pts)}
        local: dict[int, float] = {}
        for b in self.balls:
            m = 0
            for p in pts:
                if (b.mask >> p) & 1:
                    m |= 1 << pos[p]
            if m and (m not in local or b.cost < local[m]):
                local[m] = b.cost
        masks = np.array(sorted(local), dtype=np.int64)
        costs = np.array([local[int(m)] for m in masks], dtype=np.float64)
        dp = kernels.setcover_min_costs(masks, costs, len(pts))
        return float(dp[(1 << len(pts)) - 1])

    def optimal_cover(self, points: Iterable[int]) -> list[Ball]:
        """One cover attaining value(points), reconstructed from the table."""
        pts = sorted(set(int(p) for p in points))
        if not pts:
            return []
        dp = self.table()
        chosen: list[Ball] = []
        s = _mask(pts)
        while s:
            b = (s & -s).bit_length() - 1
            for ball in self.balls:
                if (ball.mask >> b) & 1 and dp[s] == dp[s & ~ball.mask] + ball.cost:
                    chosen.append(ball)
                    s &= ~ball.mask
                    break
            else:
                raise SubmeasureContractError("cover reconstruction failed",
                                              subset=pts)
        return chosen

    def greedy_value(self, points: Iterable[int]) -> float:
        """Greedy cover cost: an upper bound on the exact value, NOT exact."""
        pts = set(int(p) for p in points)
        total = 0.0
        uncovered = _mask(pts)
        while uncovered:
            best_ball = None
            best_key = None
            for ball in self.balls:
                gain = bin(ball.mask & uncovered).count("1")
                if gain == 0:
                    continue
                key = (ball.cost / gain, ball.cost, ball.mask)
                if best_key is None or key < best_key:
                    best_key = key
                    best_ball = ball
            total += best_ball.cost
            uncovered &= ~best_ball.mask
        return total


def covering_submeasure(ws: WeightedSpace, eps: float, c_eps: float,
                        A: Iterable[int], cap: int | None = None,
                        tol: float | None = None) -> float:
    """Exact covering-submeasure value of the point set A."""
    return CoveringSubmeasure(ws, eps, c_eps, cap=cap, tol=tol).value(A)


def cover_cost_branch_and_bound(ws: WeightedSpace, eps: float, c_eps: float,
                                A: Iterable[int], tol: float | None = None) -> float:
    """Independent exhaustive oracle: branch over balls covering the lowest
    uncovered point, pruning on the running cost only."""
    _check_params(eps, c_eps)
    tol = resolve_tol(tol)
    target = frozenset(int(p) for p in A)
    if not target:
        return 0.0
    space, mu = ws.space, ws.mu
    radii = sorted(set([0.0] + [float(v) for v in space.dist.flat]))
    options: dict[frozenset, float] = {}
    for x in range(space.n):
        for r in radii:
            covered = frozenset(closed_ball(space, x, r, tol)) & target
            if not covered:
                continue
            cost = quantize_cost(mu.ball_mass(space, x, c_eps * r, tol) ** (1.0 - eps))
            if covered not in options or cost < options[covered]:
                options[covered] = cost
    balls = sorted(options.items(), key=lambda kv: kv[1])
    by_point: dict[int, list[tuple[frozenset, float]]] = {
        p: [bc for bc in balls if p in bc[0]] for p in target}

    best = [sum(by_point[p][0][1] for p in target)]  # singleton-ish upper bound

    def search(uncovered: frozenset, cost: float) -> None:
        if cost >= best[0] and uncovered:
            return
        if not uncovered:
            if cost < best[0]:
                best[0] = cost
            return
        p = min(uncovered)
        for covered, c in by_point[p]:
            if cost + c < best[0]:
                search(uncovered - covered, cost + c)

    search(target, 0.0)
    return best[0]


@dataclass(frozen=True)
class TableSubmeasure:
    """Explicit set-function table; the caller vouches for the axioms."""

    values: dict  # frozenset -> float or Fraction

    def value(self, points: Iterable[int]):
        key = frozenset(int(p) for p in points)
        if not key:
            return 0.0
        if key not in self.values:
            raise ArgumentError(f"table submeasure has no entry for {sorted(key)}")
        return self.values[key]

    __call__ = value


def check_submeasure_axioms(xi: Callable, n: int, pairs: int, rng) -> dict:
    """Sample subset pairs and compare the three axioms exactly.

    Returns counts of violations; all zeros means the sampled axioms hold.
    """
    empty_bad = 0 if xi(()) == 0.0 else 1
    mono_bad = 0
    subadd_bad = 0
    for _ in range(pairs):
        amask = int(rng.integers(0, 1 << n))
        bmask = int(rng.integers(0, 1 << n))
        a = [i for i in range(n) if (amask >> i) & 1]
        b = [i for i in range(n) if (bmask >> i) & 1]
        ab = sorted(set(a) | set(b))
        va, vb, vab = xi(a), xi(b), xi(ab)
        if va > vab or vb > vab:
            mono_bad += 1
        if vab > va + vb:
            subadd_bad += 1
    return {"empty": empty_bad, "monotonicity": mono_bad, "subadditivity": subadd_bad}


@dataclass(frozen=True)
class DominatedMeasure:
    """Output of the top-down mass-splitting recursion.

    cell_values maps every tree cell to its exact rational mass, so the
    domination guarantee nu(cell) <= xi(cell)/xi(root) can be checked with no
    tolerance at all; leaf_weights is the same data keyed by point.
    """

    leaf_weights: dict
    cell_values: dict

    def as_vector(self, n: int) -> MeasureVec:
        w = np.zeros(n)
        for p, v in self.leaf_weights.items():
            w[p] = float(v)
        return MeasureVec(w)


def submeasure_to_measure(tree: UltrametricTree, xi: Callable) -> DominatedMeasure:
    """Split unit mass down the tree proportionally to xi of the children.

    nu(root) = 1 and nu(C) = xi(C)/sum_i xi(C_i) * nu(parent).  Arithmetic is
    exact (rational), so on a genuine submeasure the produced nu satisfies
    nu(C) <= xi(C)/xi(root) exactly on every cell.  A node with positive mass
    whose children all have xi = 0 certifies the input was not a submeasure.
    """
    root_val = _as_fraction(xi(tree.points))
    if not root_val > 0:
        raise ArgumentError(f"xi(root cell) must be positive, got {float(root_val)}")

    leaf_weights: dict[int, Fraction] = {}
    cell_values: dict[frozenset, Fraction] = {}

    def walk(node: TreeNode, mass: Fraction) -> None:
        cell = frozenset(_leafset(node))
        cell_values[cell] = mass
        if node.is_leaf:
            leaf_weights[node.point] = mass
            return
        kids = node.children
        kid_vals = [_as_fraction(xi(_leafset(k))) for k in kids]
        total = sum(kid_vals, Fraction(0))
        if total == 0:
            if mass > 0:
                raise SubmeasureContractError(
                    "node with positive mass has children of total xi 0 "
                    "(impossible for a submeasure)",
                    cell=sorted(cell))
            for k in kids:
                walk(k, Fraction(0))
            return
        for k, v in zip(kids, kid_vals):
            walk(k, mass * v / total)

    walk(tree.root, Fraction(1))
    return DominatedMeasure(leaf_weights=leaf_weights, cell_values=cell_values)


def _leafset(node: TreeNode) -> list[int]:
    if node.is_leaf:
        return [node.point]
    out: list[int] = []
    for c in node.children:
        out.extend(_leafset(c))
    return out


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    return Fraction(float(v))
