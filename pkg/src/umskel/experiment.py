"""Monte-Carlo argmax-location experiment for linear Gaussian processes.

Each trial draws a standard Gaussian vector g and evaluates Z_x = <g, x> at
every site x; the empirical law of the argmax is the measure fed to the
skeleton pipeline at eps = 1/2.  The growth certificate then turns into a
probability statement: if the skeleton sample lands in a ball with
probability p, the argmax lands in the C-times-larger ball with probability
at least p^2.  Probes check exactly that, padded by a binomial confidence
radius for the sampling noise in the empirical law.

Trials are drawn from a counter-based generator (Philox), so a fixed config
reproduces the report byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, InternalInvariantError
from .measures import MeasureVec, WeightedSpace
from .metric import FiniteMetricSpace
from .skeleton import build_skeleton

Z_99 = 2.5758293035489004  # two-sided 99% normal quantile
MAX_TIE_ROUNDS = 64


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    trials: int
    dim: int
    eps: float = 0.5
    probes: tuple = ()   # (point index, radius) pairs; empty = auto grid

    def __post_init__(self):
        if self.trials < 1:
            raise ArgumentError(f"need at least one trial, got {self.trials}")
        if self.dim < 1:
            raise ArgumentError(f"dimension must be positive, got {self.dim}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ArgumentError("seed must fit in 64 bits")
        if self.eps != 0.5:
            raise ArgumentError(
                f"the p^2 probe logic is specific to eps = 1/2, got {self.eps}")

    def to_jsonable(self) -> dict:
        return {"seed": int(self.seed), "trials": self.trials, "dim": self.dim,
                "eps": self.eps, "probes": [list(p) for p in self.probes]}


def euclidean_space(points: np.ndarray) -> FiniteMetricSpace:
    diffs = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diffs ** 2).sum(axis=2))
    np.fill_diagonal(dist, 0.0)
    return FiniteMetricSpace(tuple(range(len(points))), dist)


def sample_argmax_law(points: np.ndarray, cfg: ExperimentConfig
                      ) -> tuple[np.ndarray, np.ndarray, int]:
    """(empirical argmax law, all Z samples, tie redraw count)."""
    rng = np.random.Generator(np.random.Philox(int(cfg.seed)))
    m = len(points)
    g = rng.standard_normal((cfg.trials, cfg.dim))
    z = g @ points.T
    redraws = 0
    for _ in range(MAX_TIE_ROUNDS):
        top = z.max(axis=1, keepdims=True)
        tied = (z == top).sum(axis=1) > 1
        if not tied.any():
            break
        rows = np.nonzero(tied)[0]
        redraws += len(rows)
        z[rows] = rng.standard_normal((len(rows), cfg.dim)) @ points.T
    else:
        raise InternalInvariantError(
            f"exact argmax ties persisted across {MAX_TIE_ROUNDS} redraw rounds")
    counts = np.bincount(np.argmax(z, axis=1), minlength=m)
    return counts / float(cfg.trials), z, redraws


def gaussian_argmax_experiment(points, cfg: ExperimentConfig) -> dict:
    """Full experiment report (plain data, canonical-serializer ready)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != cfg.dim:
        raise ArgumentError(
            f"points must be an (m, {cfg.dim}) array, got shape {pts.shape}")
    if len(pts) < 2:
        raise ArgumentError(f"need at least two points, got {len(pts)}")
    space = euclidean_space(pts)
    if np.any((space.dist + np.eye(len(pts))) <= 0):
        raise ArgumentError("points must be pairwise distinct")

    mu_hat, z, redraws = sample_argmax_law(pts, cfg)
    metric_rows = _metric_consistency(space, z)

    ws = WeightedSpace(space, MeasureVec(mu_hat))
    sk = build_skeleton(ws, cfg.eps)
    C = sk.C_measured

    probes = list(cfg.probes) if cfg.probes else _auto_probes(space)
    probe_rows = []
    for x, r in probes:
        p_sigma = sk.nu.ball_mass(space, int(x), float(r))
        p_tau = ws.mu.ball_mass(space, int(x), C * float(r))
        slack = Z_99 * math.sqrt(p_tau * (1.0 - p_tau) / cfg.trials)
        probe_rows.append({
            "x": int(x), "r": float(r), "radius_multiplier": C,
            "p_sigma": p_sigma, "p_tau": p_tau,
            "p_sigma_squared": p_sigma ** 2, "ci_slack": slack,
            "passed": bool(p_tau >= p_sigma ** 2 - slack)})

    return {
        "config": cfg.to_jsonable(),
        "rng": {"generator": "philox-4x64", "numpy_version": np.__version__},
        "points": [list(map(float, p)) for p in pts],
        "tie_redraws": int(redraws),
        "tie_note": "exact argmax ties are re-drawn; they have probability "
                    "zero in exact arithmetic",
        "mu_hat": [float(v) for v in mu_hat],
        "metric_consistency": metric_rows,
        "metric_consistent": all(row["within_3se"] for row in metric_rows),
        "skeleton": sk.to_jsonable(),
        "probes": probe_rows,
        "all_probes_passed": all(row["passed"] for row in probe_rows),
    }


def _metric_consistency(space: FiniteMetricSpace, z: np.ndarray) -> list[dict]:
    """Squared empirical increments against the input metric, per pair."""
    trials = z.shape[0]
    rows = []
    for i in range(space.n):
        for j in range(i + 1, space.n):
            sq = (z[:, i] - z[:, j]) ** 2
            mean_sq = float(sq.mean())
            true_sq = space.d(i, j) ** 2
            se = true_sq * math.sqrt(2.0 / trials)
            rows.append({"i": i, "j": j, "empirical_sq": mean_sq,
                         "true_sq": true_sq, "se": se,
                         "within_3se": bool(abs(mean_sq - true_sq) <= 3.0 * se)})
    return rows


def _auto_probes(space: FiniteMetricSpace) -> list[tuple[int, float]]:
    probes = []
    for x in range(space.n):
        for r in sorted(set(float(v) for v in space.dist[x])):
            probes.append((x, r))
    return probes
