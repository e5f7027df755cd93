"""Timing comparison of the numba kernels against the numpy fallbacks.

Run:  python benchmarks/bench_kernels.py [--repeats 3]

Covers the three hot paths: the all-subsets distortion scan, the set-cover
table over subset bitmasks, and the simplex grid scan of the sqrt-log
profile functionals.  Results from both backends are also cross-checked.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from umskel import _kernels_np as knp
from umskel import _kernels_nb as knb
from umskel.gamma_delta import _grid_tables
from umskel.metric import FiniteMetricSpace
from umskel.submeasures import quantize_cost


def _euclidean(rng, n, dim=3):
    pts = rng.standard_normal((n, dim))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, 0.0)
    return FiniteMetricSpace(tuple(range(n)), d)


def _time(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    rng = np.random.default_rng(2024)

    workloads = []

    space = _euclidean(rng, 13)
    masks = np.arange(1, 1 << 13, dtype=np.int64)
    workloads.append((
        "subset_distortions (n=13, 8191 subsets)",
        lambda: knp.subset_distortions(space.dist, masks),
        lambda: knb.subset_distortions(space.dist, masks),
        lambda a, b: np.array_equal(a, b),
    ))

    n = 14
    n_balls = 180
    ball_masks = rng.integers(1, 1 << n, size=n_balls).astype(np.int64)
    for b in range(n):
        ball_masks[int(rng.integers(0, n_balls))] |= 1 << b
    ball_costs = np.array([quantize_cost(v) for v in rng.random(n_balls)])
    workloads.append((
        "setcover_min_costs (n=14, 180 balls)",
        lambda: knp.setcover_min_costs(ball_masks, ball_costs, n),
        lambda: knb.setcover_min_costs(ball_masks, ball_costs, n),
        lambda a, b: np.array_equal(a, b),
    ))

    ultra = FiniteMetricSpace(
        tuple(range(4)),
        [[0, 1, 2, 2], [1, 0, 2, 2], [2, 2, 0, 0.5], [2, 2, 0.5, 0]])
    gmasks, gwidths = _grid_tables(ultra)
    workloads.append((
        "grid_scan_sqrtlog (n=4, resolution 200, 1.37M measures)",
        lambda: knp.grid_scan_sqrtlog(gmasks, gwidths, 200),
        lambda: knb.grid_scan_sqrtlog(gmasks, gwidths, 200),
        lambda a, b: abs(a[0] - b[0]) < 1e-12 and abs(a[2] - b[2]) < 1e-12,
    ))

    for _, _, nb_fn, _ in workloads:
        nb_fn()  # compile outside the timed region

    print(f"{'workload':58s} {'numpy':>9s} {'numba':>9s} {'speedup':>8s}")
    for name, np_fn, nb_fn, same in workloads:
        t_np, out_np = _time(np_fn, args.repeats)
        t_nb, out_nb = _time(nb_fn, args.repeats)
        agree = "ok" if same(out_np, out_nb) else "MISMATCH"
        print(f"{name:58s} {t_np:8.3f}s {t_nb:8.3f}s {t_np / t_nb:7.1f}x  {agree}")


if __name__ == "__main__":
    main()
