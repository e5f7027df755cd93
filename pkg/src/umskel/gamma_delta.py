"""Profile-integral functionals over probability measures.

The profile of a measure at a point is the integral over radii of
phi(mass of the ball); with phi(t) = sqrt(ln(1/t)) the inf-sup and sup-inf
of profiles over measures are the chaining functionals usually written
gamma_2 and delta_2.  On a finite space the integral is a finite breakpoint
sum over the distinct distances from the point.

Everything here brackets rather than computes the true functionals: any
measure gives an upper bound on the inf-sup and a lower bound on the
sup-inf; the equalizing measure makes the two collapse to one value; the
simplex grid scan certifies two-sided estimates at tiny n.

Natural logarithm throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .config import GRID_POINT_CAP, resolve_tol
from .errors import ArgumentError, CapacityError, InternalInvariantError
from .measures import MeasureVec, WeightedSpace
from .metric import FiniteMetricSpace, require_valid_metric
from .skeleton import SkeletonResult
from .tree import TreeNode, UltrametricTree


@dataclass(frozen=True)
class PhiFunction:
    """Weight applied to ball masses; evaluated on (0, 1], +inf at 0."""

    fn: Callable = field(repr=False)
    name: str = "custom"
    non_increasing: bool = True
    continuous: bool = True
    diverges_at_zero: bool = True
    kind: str = "custom"   # "sqrt_log" picks the compiled grid kernel

    def __call__(self, t: float) -> float:
        if t <= 0.0:
            return math.inf
        return float(self.fn(min(t, 1.0)))

    def check_samples(self, count: int = 64) -> None:
        """Spot-check the declared flags on a geometric sample of (0, 1]."""
        ts = np.geomspace(1e-12, 1.0, count)
        vals = [self(t) for t in ts]
        if not math.isfinite(vals[-1]):
            raise ArgumentError(f"phi(1) must be finite, got {vals[-1]}")
        if self.non_increasing:
            for a, b in zip(vals, vals[1:]):
                if b > a + 1e-9:
                    raise ArgumentError("phi is not non-increasing on samples")
        if self.diverges_at_zero and not self(0.0) == math.inf:
            raise ArgumentError("phi must return the +inf sentinel at 0")


PHI2 = PhiFunction(fn=lambda t: math.sqrt(-math.log(t)) if t < 1.0 else 0.0,
                   name="sqrt_log", kind="sqrt_log")


def _breakpoints(space: FiniteMetricSpace, x: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Distinct radii from x and, per radius, the covered point indices."""
    row = space.dist[x]
    radii = np.unique(row)
    covered = [np.nonzero(row <= r)[0] for r in radii]
    return radii, covered


def profile_integral(space: FiniteMetricSpace, mu: MeasureVec, x: int,
                     phi: PhiFunction = PHI2) -> float:
    """Breakpoint sum of widths times phi(ball mass); +inf as soon as a ball
    of positive width has zero mass."""
    if not 0 <= x < space.n:
        raise ArgumentError(f"point index {x} out of range")
    radii, covered = _breakpoints(space, x)
    total = 0.0
    for k in range(len(radii) - 1):
        width = float(radii[k + 1] - radii[k])
        mass = float(mu.weights[covered[k]].sum())
        if mass <= 0.0:
            return math.inf
        total += width * phi(mass)
    return total


def profile_all(space: FiniteMetricSpace, mu: MeasureVec,
                phi: PhiFunction = PHI2) -> np.ndarray:
    return np.array([profile_integral(space, mu, x, phi) for x in range(space.n)])


@dataclass(frozen=True)
class ProfileResult:
    integrals: tuple
    sup: float
    inf: float

    def to_jsonable(self) -> dict:
        return {"integrals": list(self.integrals), "sup": self.sup, "inf": self.inf}


def gamma_delta_bounds(space: FiniteMetricSpace, mu: MeasureVec,
                       phi: PhiFunction = PHI2) -> tuple[float, float, ProfileResult]:
    """(gamma_upper, delta_lower, profiles) for one measure.

    sup of the profiles bounds the inf-sup functional from above; inf bounds
    the sup-inf from below.  +inf entries are carried, never special-cased:
    they simply can win the sup and lose the inf."""
    profs = profile_all(space, mu, phi)
    sup = float(np.max(profs))
    inf_ = float(np.min(profs))
    return sup, inf_, ProfileResult(integrals=tuple(float(v) for v in profs),
                                    sup=sup, inf=inf_)


@dataclass(frozen=True)
class EqualizingResult:
    mu: MeasureVec
    V: float
    residual: float
    converged: bool
    iterations: int

    def to_jsonable(self) -> dict:
        return {"mu": self.mu.to_jsonable(), "V": self.V, "residual": self.residual,
                "converged": self.converged, "iterations": self.iterations}


def equalizing_measure(space: FiniteMetricSpace, phi: PhiFunction = PHI2,
                       tol: float = 1e-9, max_iter: int = 50000,
                       eta: float = 0.5) -> EqualizingResult:
    """Damped mass-reweighting iteration towards equal profiles.

    Mass moves toward points with large profile integrals (which lowers
    them), so measures with all profiles equal are exactly the fixed points.
    The step size halves whenever the residual worsens and creeps back up on
    success; non-convergence is reported in the flag, never hidden.
    """
    if not phi.diverges_at_zero:
        raise ArgumentError("equalizing requires phi to diverge at zero")
    require_valid_metric(space)
    n = space.n
    if n == 1:
        return EqualizingResult(mu=MeasureVec([1.0]), V=0.0, residual=0.0,
                                converged=True, iterations=0)

    mu = np.full(n, 1.0 / n)
    profs = _profiles_np(space, mu, phi)
    residual = float(profs.max() - profs.min())
    best = (residual, mu.copy(), profs.copy())
    it = 0
    while it < max_iter and residual > tol:
        it += 1
        weights = mu * (1.0 + np.minimum(profs, 1e12))
        target = weights / weights.sum()
        candidate = (1.0 - eta) * mu + eta * target
        candidate /= candidate.sum()
        cand_profs = _profiles_np(space, candidate, phi)
        cand_residual = float(cand_profs.max() - cand_profs.min())
        if cand_residual <= residual:
            mu, profs, residual = candidate, cand_profs, cand_residual
            eta = min(0.95, eta * 1.25)
            if residual < best[0]:
                best = (residual, mu.copy(), profs.copy())
        else:
            eta = eta / 2.0
            if eta < 1e-12:
                break
    residual, mu, profs = best
    finite = profs[np.isfinite(profs)]
    V = float(finite.mean()) if len(finite) else math.inf
    return EqualizingResult(mu=MeasureVec(mu), V=V, residual=float(residual),
                            converged=bool(residual <= tol), iterations=it)


def _profiles_np(space: FiniteMetricSpace, mu: np.ndarray,
                 phi: PhiFunction) -> np.ndarray:
    out = np.empty(space.n)
    for x in range(space.n):
        radii, covered = _breakpoints(space, x)
        acc = 0.0
        for k in range(len(radii) - 1):
            mass = float(mu[covered[k]].sum())
            if mass <= 0.0:
                acc = math.inf
                break
            acc += float(radii[k + 1] - radii[k]) * phi(mass)
        out[x] = acc
    return out


@dataclass(frozen=True)
class GridResult:
    gamma_hat: float
    delta_hat: float
    gamma_witness: MeasureVec
    delta_witness: MeasureVec
    resolution: int

    @property
    def gap(self) -> float:
        return self.gamma_hat - self.delta_hat

    def to_jsonable(self) -> dict:
        return {"gamma_hat": self.gamma_hat, "delta_hat": self.delta_hat,
                "gap": self.gap, "resolution": self.resolution,
                "gamma_witness": self.gamma_witness.to_jsonable(),
                "delta_witness": self.delta_witness.to_jsonable()}


def gamma_delta_grid(space: FiniteMetricSpace, phi: PhiFunction = PHI2,
                     resolution: int = 200) -> GridResult:
    """Exhaustive simplex grid scan (n <= 4).

    gamma_hat minimizes the profile supremum over interior grid measures
    (zero atoms make the supremum +inf, never optimal for a diverging phi);
    delta_hat maximizes the infimum over the full grid, where zero atoms are
    legitimate witnesses.  gamma_hat upper-bounds the inf-sup functional and
    delta_hat lower-bounds the sup-inf one, so on spaces where the two agree
    the gap shrinks as the grid refines.
    """
    require_valid_metric(space)
    n = space.n
    if n > GRID_POINT_CAP:
        raise CapacityError(
            f"grid scan capped at n={GRID_POINT_CAP} points, got {n}",
            n=n, cap=GRID_POINT_CAP)
    if resolution < 1:
        raise ArgumentError(f"resolution must be positive, got {resolution}")

    masks, widths = _grid_tables(space)
    if phi.kind == "sqrt_log":
        g_hat, g_arg, d_hat, d_arg = kernels.grid_scan_sqrtlog(masks, widths,
                                                               resolution)
    else:
        g_hat, g_arg, d_hat, d_arg = _grid_scan_generic(masks, widths,
                                                        resolution, phi)
    return GridResult(
        gamma_hat=float(g_hat), delta_hat=float(d_hat),
        gamma_witness=MeasureVec(g_arg / float(resolution)),
        delta_witness=MeasureVec(d_arg / float(resolution)),
        resolution=int(resolution))


def _grid_tables(space: FiniteMetricSpace) -> tuple[np.ndarray, np.ndarray]:
    """Padded (P, K, n) ball-membership and (P, K) width tables."""
    n = space.n
    per_point = [_breakpoints(space, x) for x in range(n)]
    K = max(len(radii) - 1 for radii, _ in per_point) if n > 1 else 1
    K = max(K, 1)
    masks = np.zeros((n, K, n), dtype=np.int64)
    widths = np.zeros((n, K), dtype=np.float64)
    for x, (radii, covered) in enumerate(per_point):
        for k in range(len(radii) - 1):
            widths[x, k] = float(radii[k + 1] - radii[k])
            masks[x, k, covered[k]] = 1
    return masks, widths


def _grid_scan_generic(masks, widths, resolution, phi: PhiFunction):
    """Reference implementation for arbitrary phi; used off the hot path."""
    from ._kernels_np import _composition_chunks

    P, K, n = masks.shape
    gamma_hat, delta_hat = math.inf, -math.inf
    gamma_arg = np.zeros(n, dtype=np.int64)
    delta_arg = np.zeros(n, dtype=np.int64)
    for chunk in _composition_chunks(resolution, n):
        for comp in chunk:
            mu = comp / float(resolution)
            sup, inf_ = -math.inf, math.inf
            for p in range(P):
                acc = 0.0
                for k in range(K):
                    w = widths[p, k]
                    if w <= 0.0:
                        continue
                    mass = float(masks[p, k] @ mu)
                    acc += w * phi(mass)
                    if acc == math.inf:
                        break
                sup = max(sup, acc)
                inf_ = min(inf_, acc)
            if np.all(comp > 0) and sup < gamma_hat:
                gamma_hat = sup
                gamma_arg = comp.copy()
            if inf_ > delta_hat:
                delta_hat = inf_
                delta_arg = comp.copy()
    return gamma_hat, gamma_arg, delta_hat, delta_arg


def find_dominated_point(tree: UltrametricTree, mu, nu) -> int:
    """Leaf whose tree balls all carry no more mu-mass than nu-mass.

    Descends by pigeonhole: every node has a child where mu does not exceed
    nu, because the children partition the node.  The returned leaf is
    re-verified over every ball radius, with exact comparisons.
    """
    mu_w = np.asarray(mu, dtype=np.float64) if not isinstance(mu, MeasureVec) else mu.weights
    nu_w = np.asarray(nu, dtype=np.float64) if not isinstance(nu, MeasureVec) else nu.weights
    if np.any(mu_w < 0) or np.any(nu_w < 0):
        raise ArgumentError("measures must be nonnegative")

    def mass(w: np.ndarray, pts) -> float:
        return float(w[sorted(pts)].sum())

    top = list(tree.points)
    if mass(mu_w, top) > mass(nu_w, top):
        raise ArgumentError(
            f"mu(U)={mass(mu_w, top)!r} exceeds nu(U)={mass(nu_w, top)!r}")

    node = tree.root
    chain = [tuple(sorted(tree.points))]
    while not node.is_leaf:
        pick = None
        fallback, fallback_gap = None, math.inf
        for child in node.children:
            pts = _node_points(child)
            gap = mass(mu_w, pts) - mass(nu_w, pts)
            if gap <= 0.0:
                pick = child
                break
            if gap < fallback_gap:
                fallback, fallback_gap = child, gap
        node = pick if pick is not None else fallback
        chain.append(tuple(sorted(_node_points(node))))
    a = node.point

    for ball in chain:
        if mass(mu_w, ball) > mass(nu_w, ball):
            raise InternalInvariantError(
                f"dominated point {a} fails at ball {ball}", point=a,
                ball=list(ball))
    return a


def _node_points(node: TreeNode) -> list[int]:
    if node.is_leaf:
        return [node.point]
    out: list[int] = []
    for c in node.children:
        out.extend(_node_points(c))
    return out


def star_space(n: int) -> tuple[FiniteMetricSpace, MeasureVec, MeasureVec]:
    """Hub-and-spokes metric on {0, 1, ..., n} with its two witness measures.

    d(0, i) = 1 and d(p, q) = 2 between distinct spokes.  mu_witness puts
    half the mass on the hub; nu_witness spreads everything over the spokes.
    """
    if n < 1:
        raise ArgumentError(f"star needs at least one spoke, got {n}")
    d = np.full((n + 1, n + 1), 2.0)
    d[0, :] = 1.0
    d[:, 0] = 1.0
    np.fill_diagonal(d, 0.0)
    space = FiniteMetricSpace(tuple(range(n + 1)), d)
    mu = MeasureVec([0.5] + [1.0 / (2 * n)] * n)
    nu = MeasureVec([0.0] + [1.0 / n] * n)
    return space, mu, nu


def star_witness_values(n: int) -> tuple[float, float]:
    """Closed forms: (2*sqrt(ln n), sqrt(ln 2n) + sqrt(ln(2n/(n+1))))."""
    if n < 1:
        raise ArgumentError(f"star needs at least one spoke, got {n}")
    delta_form = 2.0 * math.sqrt(math.log(n)) if n > 1 else 0.0
    gamma_form = math.sqrt(math.log(2 * n)) + math.sqrt(math.log(2 * n / (n + 1)))
    return delta_form, gamma_form


@dataclass(frozen=True)
class MajorizingRow:
    x: int
    I_nu: float
    I_mu: float
    I_mu_scaled: float   # mu-profile with radii scaled by C (equals I_mu/C)
    threshold: float     # I_mu_scaled / sqrt(2)
    passed: bool

    def to_jsonable(self) -> dict:
        return {"x": self.x, "I_nu": self.I_nu, "I_mu": self.I_mu,
                "I_mu_scaled": self.I_mu_scaled, "threshold": self.threshold,
                "passed": self.passed}


@dataclass(frozen=True)
class MajorizingReport:
    rows: tuple
    all_passed: bool
    C: float
    delta_lower_S_nu: float
    delta_lower_X_mu: float
    delta_ratio: float
    # observational only: profile supremum of mu restricted to S against the
    # full-space one (the true functionals are only bracketed here)
    gamma_upper_X_mu: float
    gamma_upper_S_restricted: float
    subset_gamma_ratio: float

    def to_jsonable(self) -> dict:
        return {"rows": [r.to_jsonable() for r in self.rows],
                "all_passed": self.all_passed, "C": self.C,
                "delta_lower_S_nu": self.delta_lower_S_nu,
                "delta_lower_X_mu": self.delta_lower_X_mu,
                "delta_ratio": self.delta_ratio,
                "gamma_upper_X_mu": self.gamma_upper_X_mu,
                "gamma_upper_S_restricted": self.gamma_upper_S_restricted,
                "subset_gamma_ratio": self.subset_gamma_ratio}


def majorizing_chain_check(ws: WeightedSpace, sk: SkeletonResult,
                           tol: float = 1e-9) -> MajorizingReport:
    """Pointwise chain step at every skeleton point, for eps = 1/2.

    The growth certificate says nu-balls are dominated by square roots of
    scaled mu-balls, so phi2 of the former is at least phi2 of the latter
    over sqrt(2); integrating gives I_nu(x) >= I_mu_scaled(x)/sqrt(2), with
    the scaled profile integral equal to I_mu(x)/C after substitution.
    """
    if sk.eps != 0.5:
        raise ArgumentError(
            f"the sqrt(2) chain constant is specific to eps = 1/2, got {sk.eps}")
    C = sk.C_measured
    if not math.isfinite(C):
        raise ArgumentError("skeleton carries a failed growth certificate (C = inf)")

    space, mu = ws.space, ws.mu
    rows = []
    for x in sk.S:
        i_nu = profile_integral(space, sk.nu, x, PHI2)
        i_mu = profile_integral(space, mu, x, PHI2)
        i_scaled = _scaled_profile(space, mu, x, C)
        threshold = i_scaled / math.sqrt(2.0)
        rows.append(MajorizingRow(
            x=x, I_nu=i_nu, I_mu=i_mu, I_mu_scaled=i_scaled, threshold=threshold,
            passed=bool(i_nu >= threshold - tol)))
    d_s = min(r.I_nu for r in rows)
    profiles_x = profile_all(space, mu, PHI2)
    d_x = float(np.min(profiles_x))
    ratio = d_s / d_x if d_x > 0 and math.isfinite(d_s) else math.inf
    g_x = float(np.max(profiles_x))
    g_s, g_ratio = _restricted_gamma_upper(space, mu, sk.S, g_x)
    return MajorizingReport(rows=tuple(rows), all_passed=all(r.passed for r in rows),
                            C=C, delta_lower_S_nu=d_s, delta_lower_X_mu=d_x,
                            delta_ratio=ratio, gamma_upper_X_mu=g_x,
                            gamma_upper_S_restricted=g_s,
                            subset_gamma_ratio=g_ratio)


def _restricted_gamma_upper(space: FiniteMetricSpace, mu: MeasureVec, S,
                            g_x: float) -> tuple[float, float]:
    """Profile supremum of mu restricted-and-renormalized to S, on (S, d)."""
    from .metric import restrict_space

    idx = sorted(int(i) for i in S)
    mass = float(mu.weights[idx].sum())
    if mass <= 0.0:
        return math.inf, math.inf
    sub_space = restrict_space(space, idx)
    sub_mu = MeasureVec(mu.weights[idx] / mass)
    g_s = float(np.max(profile_all(sub_space, sub_mu, PHI2)))
    ratio = g_s / g_x if g_x > 0 and math.isfinite(g_s) else math.inf
    return g_s, ratio


def _scaled_profile(space: FiniteMetricSpace, mu: MeasureVec, x: int,
                    C: float) -> float:
    """Integral over r of phi2(mu(B(x, C*r))): the mass jumps at d/C."""
    row = space.dist[x]
    radii = np.unique(row) / C
    covered = [np.nonzero(row <= r * C + resolve_tol(None))[0] for r in radii]
    total = 0.0
    for k in range(len(radii) - 1):
        mass = float(mu.weights[covered[k]].sum())
        width = float(radii[k + 1] - radii[k])
        if mass <= 0.0:
            return math.inf
        total += width * PHI2(mass)
    return total
