"""Skeleton subsets: search, dominated measure, and growth certification.

A skeleton of a weighted space is a subset S carrying a near-ultrametric
tree and a probability measure nu whose d-balls are dominated by powered
mu-balls: nu(B(x,r)) <= mu(B(x, C*r))^(1-eps) for every center x and radius
r.  The subset search maximizes the covering-submeasure value under a
distortion budget, sweeping the budget upward until the value reaches 1
(it always does at the distortion of the full space).  The constant C is
measured by an independent scan over all breakpoint radii, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import resolve_tol, subset_search_cap
from .errors import ArgumentError, CapacityError
from .measures import MeasureVec, WeightedSpace
from .metric import FiniteMetricSpace, require_valid_metric
from .submeasures import CoveringSubmeasure, submeasure_to_measure
from .subdominant import min_ultrametric_distortion, tree_on_subset
from .tree import UltrametricTree
from .union import multi_union

XI_TARGET_TOL = 1e-9  # quantized costs reach xi(X) = 1 only up to ~n * 2^-41


@dataclass(frozen=True)
class GrowthRow:
    x: int
    r: float
    lhs: float      # nu(B(x, r))
    rhs: float      # mu(B(x, C*r))^(1-eps)
    margin: float   # rhs - lhs

    def to_jsonable(self) -> dict:
        return {"x": self.x, "r": self.r, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin}


def growth_breakpoints(space: FiniteMetricSpace, x: int) -> list[float]:
    return sorted(set(float(v) for v in space.dist[x]))


def _growth_holds(ws: WeightedSpace, nu: MeasureVec, eps: float, C: float,
                  tol: float) -> bool:
    space, mu = ws.space, ws.mu
    for x in range(space.n):
        for r in growth_breakpoints(space, x):
            lhs = nu.ball_mass(space, x, r, tol)
            rhs = mu.ball_mass(space, x, C * r, tol) ** (1.0 - eps)
            if lhs > rhs + tol:
                return False
    return True


def verify_growth(ws: WeightedSpace, S, nu: MeasureVec, eps: float,
                  tol: float | None = None) -> float:
    """Smallest scale constant C on the ratio grid certifying the growth
    inequality at every (x, breakpoint r); +inf when no C can work.

    The inequality is monotone in C, the only C values where anything
    changes are distance ratios, and failures at r = 0 cannot be rescued by
    any C, so a binary search over the sorted ratio grid is exact.
    """
    tol = resolve_tol(tol)
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    s_set = set(int(i) for i in S)
    support = set(nu.support())
    if not support <= s_set:
        raise ArgumentError(
            f"nu must be supported on S; stray points {sorted(support - s_set)}")

    space, mu = ws.space, ws.mu
    # r = 0 rows decide feasibility outright
    for x in range(space.n):
        if nu.ball_mass(space, x, 0.0, tol) > mu.ball_mass(space, x, 0.0, tol) ** (1.0 - eps) + tol:
            return math.inf

    ratios = {1.0}
    for x in range(space.n):
        row = [v for v in growth_breakpoints(space, x) if v > 0]
        for ry in row:
            for rz in row:
                if rz >= ry:
                    ratios.add(rz / ry)
    grid = sorted(ratios)
    if not _growth_holds(ws, nu, eps, grid[-1], tol):
        return math.inf
    lo, hi = 0, len(grid) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _growth_holds(ws, nu, eps, grid[mid], tol):
            hi = mid
        else:
            lo = mid + 1
    return float(grid[lo])


def growth_margins(ws: WeightedSpace, nu: MeasureVec, eps: float, C: float,
                   tol: float | None = None) -> list[GrowthRow]:
    """Per-(x, r) sides of the growth inequality at a given constant."""
    tol = resolve_tol(tol)
    space, mu = ws.space, ws.mu
    rows = []
    for x in range(space.n):
        for r in growth_breakpoints(space, x):
            lhs = nu.ball_mass(space, x, r, tol)
            rhs = mu.ball_mass(space, x, C * r, tol) ** (1.0 - eps) if math.isfinite(C) \
                else 1.0 ** (1.0 - eps)
            rows.append(GrowthRow(x=x, r=float(r), lhs=lhs, rhs=rhs,
                                  margin=rhs - lhs))
    return rows


@dataclass(frozen=True)
class SkeletonResult:
    S: tuple
    tree: UltrametricTree
    nu: MeasureVec
    eps: float
    c_eps: float
    distortion: float
    C_measured: float
    xi_S: float
    xi_deficient: bool
    report: tuple = field(repr=False)   # GrowthRow rows at C_measured

    def to_jsonable(self) -> dict:
        return {
            "S": list(self.S),
            "tree": self.tree.to_jsonable(),
            "nu": self.nu.to_jsonable(),
            "eps": self.eps,
            "c_eps": self.c_eps,
            "distortion": self.distortion,
            "C_measured": self.C_measured,
            "xi_S": self.xi_S,
            "xi_deficient": self.xi_deficient,
            "margins": [row.to_jsonable() for row in self.report],
        }

    @classmethod
    def from_jsonable(cls, obj: dict) -> "SkeletonResult":
        rows = tuple(GrowthRow(x=int(m["x"]), r=float(m["r"]), lhs=float(m["lhs"]),
                               rhs=float(m["rhs"]), margin=float(m["margin"]))
                     for m in obj.get("margins", ()))
        return cls(S=tuple(int(i) for i in obj["S"]),
                   tree=UltrametricTree.from_jsonable(obj["tree"]),
                   nu=MeasureVec(obj["nu"]),
                   eps=float(obj["eps"]), c_eps=float(obj["c_eps"]),
                   distortion=float(obj["distortion"]),
                   C_measured=float(obj["C_measured"]) if obj["C_measured"] != "inf"
                   else math.inf,
                   xi_S=float(obj["xi_S"]),
                   xi_deficient=bool(obj["xi_deficient"]),
                   report=rows)


class _SubsetEnumeration:
    """Shared exhaustive scan: distortion and covering value of every subset."""

    def __init__(self, ws: WeightedSpace, eps: float, c_eps: float,
                 cap: int | None, tol: float):
        n = ws.n
        limit = subset_search_cap(cap)
        if n > limit:
            raise CapacityError(
                f"exhaustive subset search capped at n={limit}, got {n}; "
                f"pass heuristic=True for a labeled non-exact search",
                n=n, cap=limit)
        self.ws = ws
        self.oracle = CoveringSubmeasure(ws, eps, c_eps, cap=max(n, 1), tol=tol)
        self.xi = self.oracle.table()
        masks = np.arange(1, 1 << n, dtype=np.int64)
        self.masks = masks
        self.dist = kernels.subset_distortions(ws.space.dist, masks)
        pop = np.zeros((1 << n), dtype=np.int64)
        for m in range(1, 1 << n):
            pop[m] = pop[m >> 1] + (m & 1)
        self.sizes = pop[masks]

    def best_at(self, d_max: float, tol: float):
        feasible = self.dist <= d_max + tol
        if not feasible.any():
            return None
        xi_vals = self.xi[self.masks]
        best_xi = xi_vals[feasible].max()
        pool = feasible & (xi_vals == best_xi)
        best_size = self.sizes[pool].max()
        pool &= self.sizes == best_size
        subsets = [_bits(int(m)) for m in self.masks[pool]]
        return min(subsets), float(best_xi)


def _bits(mask: int) -> tuple:
    return tuple(b for b in range(mask.bit_length()) if (mask >> b) & 1)


def skeleton_search(ws: WeightedSpace, eps: float, c_eps: float, D_max: float,
                    cap: int | None = None, heuristic: bool = False,
                    tol: float | None = None):
    """Subset maximizing the covering value under a distortion budget.

    Preference order: larger covering value, then larger cardinality, then
    lexicographically smallest index tuple.  Returns (S, tree) or None when
    no nonempty subset fits the budget (only possible for D_max < 1).
    """
    tol = resolve_tol(tol)
    require_valid_metric(ws.space, tol)
    if heuristic:
        choice = _heuristic_best(ws, eps, c_eps, D_max, tol)
    else:
        enum = _SubsetEnumeration(ws, eps, c_eps, cap, tol)
        choice = enum.best_at(D_max, tol)
    if choice is None:
        return None
    subset, _ = choice
    _, tree = tree_on_subset(ws.space, subset, tol)
    return tuple(subset), tree


def _heuristic_best(ws: WeightedSpace, eps: float, c_eps: float, D_max: float,
                    tol: float):
    """Greedy grow plus dendrogram cells; a labeled non-exact search."""
    from .subdominant import distortion_of_subset

    space = ws.space
    oracle = CoveringSubmeasure(ws, eps, c_eps, cap=None, tol=tol)
    candidates: set[tuple] = set()
    _, full_tree = min_ultrametric_distortion(space, tol)
    for _, cell in full_tree.cells():
        sub = tuple(sorted(cell))
        if distortion_of_subset(space, sub, tol) <= D_max + tol:
            candidates.add(sub)
    current: list[int] = []
    while True:
        best_add = None
        best_val = -math.inf
        for p in range(space.n):
            if p in current:
                continue
            trial = sorted(current + [p])
            if len(trial) <= oracle.cap and \
                    distortion_of_subset(space, trial, tol) <= D_max + tol:
                val = oracle.value(trial)
                if val > best_val:
                    best_val = val
                    best_add = p
        if best_add is None:
            break
        current = sorted(current + [best_add])
        candidates.add(tuple(current))
    scored = []
    for sub in candidates:
        if len(sub) <= oracle.cap:
            scored.append((oracle.value(sub), len(sub), tuple(-i for i in sub), sub))
    if not scored:
        return None
    scored.sort(reverse=True)
    _, _, _, best = scored[0]
    return best, float(scored[0][0])


def build_skeleton(ws: WeightedSpace, eps: float, c_eps: float = 1.0,
                   dmax_values=None, cap: int | None = None,
                   tol: float | None = None) -> SkeletonResult:
    """Full pipeline: sweep the distortion budget upward until the covering
    value reaches 1, split mass down the optimal tree, certify growth.

    The default sweep visits exactly the achievable subset distortions, so
    the stop value is the smallest budget at which the covering value tops
    out (it is always <= 1, and equals 1 at the full space)."""
    tol = resolve_tol(tol)
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    require_valid_metric(ws.space, tol)
    enum = _SubsetEnumeration(ws, eps, c_eps, cap, tol)

    if dmax_values is None:
        # the sweep over achievable distortions stops exactly at the smallest
        # budget whose best covering value reaches 1; jump there directly
        xi_vals = enum.xi[enum.masks]
        reached = xi_vals >= 1.0 - XI_TARGET_TOL
        if reached.any():
            sweep = [float(enum.dist[reached].min())]
        else:  # unreachable for the covering submeasure; kept for safety
            sweep = [float(enum.dist.max())]
    else:
        sweep = sorted(float(v) for v in dmax_values)
        if not sweep:
            raise ArgumentError("empty distortion sweep")

    chosen = None
    chosen_xi = -math.inf
    for d_max in sweep:
        found = enum.best_at(d_max, tol)
        if found is None:
            continue
        subset, xi_val = found
        if xi_val > chosen_xi or chosen is None:
            chosen, chosen_xi = subset, xi_val
        if xi_val >= 1.0 - XI_TARGET_TOL:
            break
    if chosen is None:
        raise ArgumentError(
            f"no subset fits any budget in the sweep (min budget {sweep[0]})")

    S = tuple(chosen)
    distortion, tree = tree_on_subset(ws.space, S, tol)
    split = submeasure_to_measure(tree, lambda pts: enum.oracle.value(pts))
    nu = split.as_vector(ws.n)
    C = verify_growth(ws, S, nu, eps, tol)
    rows = growth_margins(ws, nu, eps, C, tol)
    return SkeletonResult(
        S=S, tree=tree, nu=nu, eps=float(eps), c_eps=float(c_eps),
        distortion=float(distortion), C_measured=C,
        xi_S=float(chosen_xi), xi_deficient=bool(chosen_xi < 1.0 - XI_TARGET_TOL),
        report=tuple(rows))


@dataclass(frozen=True)
class DvoretzkyResult:
    S: tuple
    passed: bool
    cardinality_floor: float
    distortion_budget: float
    skeleton: SkeletonResult

    def to_jsonable(self) -> dict:
        return {"S": list(self.S), "passed": self.passed,
                "cardinality_floor": self.cardinality_floor,
                "distortion_budget": self.distortion_budget,
                "skeleton": self.skeleton.to_jsonable()}


def dvoretzky_check(space: FiniteMetricSpace, eps: float,
                    cap: int | None = None, tol: float | None = None
                    ) -> DvoretzkyResult:
    """Uniform-measure skeleton with the n^(1-eps) cardinality check.

    The distortion budget is recorded (it is the measured value), never
    asserted against an unknown universal constant."""
    ws = WeightedSpace(space, MeasureVec.uniform(space.n))
    sk = build_skeleton(ws, eps, cap=cap, tol=tol)
    floor = space.n ** (1.0 - eps)
    passed = len(sk.S) + 1e-9 >= floor
    return DvoretzkyResult(S=sk.S, passed=bool(passed), cardinality_floor=floor,
                           distortion_budget=sk.distortion, skeleton=sk)


@dataclass(frozen=True)
class MultiSkeletonResult:
    S: tuple
    tree: UltrametricTree
    distortion: float
    fold_bound: float
    parts: tuple   # one SkeletonResult per input measure

    def to_jsonable(self) -> dict:
        return {"S": list(self.S), "tree": self.tree.to_jsonable(),
                "distortion": self.distortion, "fold_bound": self.fold_bound,
                "parts": [p.to_jsonable() for p in self.parts]}


def multi_measure_skeleton(space: FiniteMetricSpace, measures, eps: float,
                           c_eps: float = 1.0, merge_eps: float = 1e-6,
                           cap: int | None = None, tol: float | None = None
                           ) -> MultiSkeletonResult:
    """One skeleton per measure on the full space, merged into a common S.

    Each nu_i keeps its own growth certificate (its support S_i lies inside
    the merged S), and the merged tree's distortion is bounded by folding
    the pairwise merge bound over the parts."""
    measures = list(measures)
    if not measures:
        raise ArgumentError("need at least one measure")
    parts = []
    for mu in measures:
        ws = WeightedSpace(space, mu if isinstance(mu, MeasureVec) else MeasureVec(mu))
        parts.append(build_skeleton(ws, eps, c_eps, cap=cap, tol=tol))
    if len(parts) == 1:
        sk = parts[0]
        return MultiSkeletonResult(S=sk.S, tree=sk.tree, distortion=sk.distortion,
                                   fold_bound=sk.distortion, parts=(sk,))
    triples = [(p.S, p.tree, p.distortion) for p in parts]
    tree, cert = multi_union(space, triples, eps=merge_eps, tol=tol)
    bound = parts[0].distortion
    for p in parts[1:]:
        bound = bound * p.distortion + 2.0 * bound + 2.0 * p.distortion + 2.0 + merge_eps
    S = tuple(sorted(set().union(*(p.S for p in parts))))
    return MultiSkeletonResult(S=S, tree=tree, distortion=cert.upper,
                               fold_bound=bound, parts=tuple(parts))
