"""Pure-numpy implementations of the hot kernels.

Selected when numba is unavailable or ``UMSKEL_NO_NUMBA`` is set.  Kept
numerically identical to the numba twins in ``_kernels_nb``: ball masses are
accumulated as exact small integers and float sums follow the same order.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def subset_distortions(dist: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Best non-contracting ultrametric distortion for each point subset.

    For every bitmask the subdominant (minimax path) distance ``u`` on the
    induced submatrix is computed by a Floyd sweep and the distortion is
    ``max d/u`` over pairs; subsets of size < 2 get 1.0.
    """
    out = np.ones(len(masks), dtype=np.float64)
    for t, mask in enumerate(masks):
        idx = _bits(int(mask))
        if len(idx) < 2:
            continue
        sub = dist[np.ix_(idx, idx)]
        u = sub.copy()
        for k in range(len(idx)):
            np.minimum(u, np.maximum.outer(u[:, k], u[k, :]), out=u)
        iu = np.triu_indices(len(idx), 1)
        out[t] = float(np.max(sub[iu] / u[iu]))
    return out


def setcover_min_costs(ball_masks: np.ndarray, ball_costs: np.ndarray, n: int) -> np.ndarray:
    """Exact minimum ball-cover cost for every subset of an n-point ground set.

    dp over subset bitmasks: dp[S] covers the lowest set bit of S with any
    candidate ball containing it.  Balls may spill outside S.
    """
    size = 1 << n
    dp = np.full(size, np.inf, dtype=np.float64)
    dp[0] = 0.0
    masks_int = ball_masks.astype(np.int64)
    by_bit_masks = []
    by_bit_costs = []
    for b in range(n):
        sel = (masks_int >> b) & 1 == 1
        by_bit_masks.append(masks_int[sel])
        by_bit_costs.append(ball_costs[sel])
    for s in range(1, size):
        b = (s & -s).bit_length() - 1
        rest = dp[s & ~by_bit_masks[b]]
        dp[s] = float(np.min(rest + by_bit_costs[b]))
    return dp


def grid_scan_sqrtlog(masks: np.ndarray, widths: np.ndarray, resolution: int):
    """Scan all simplex grid measures for the sqrt-log profile functionals.

    masks:  (P, K, n) 0/1 ball membership per point and breakpoint.
    widths: (P, K) breakpoint interval widths (0 marks padding).
    Returns (gamma_hat, gamma_arg, delta_hat, delta_arg): the grid min of the
    per-point profile supremum over interior measures and the grid max of the
    infimum over all measures, first-encountered tie winning.
    """
    P, K, n = masks.shape
    flat_masks = masks.reshape(P * K, n).astype(np.float64)
    live = widths.reshape(P * K) > 0.0
    wflat = widths.reshape(P * K).astype(np.float64)
    inv_r = 1.0 / resolution

    gamma_hat = np.inf
    gamma_arg = np.zeros(n, dtype=np.int64)
    delta_hat = -np.inf
    delta_arg = np.zeros(n, dtype=np.int64)

    for comp in _composition_chunks(resolution, n):
        g = comp.shape[0]
        counts = comp.astype(np.float64) @ flat_masks.T  # exact small ints
        t = counts * inv_r
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(t > 0.0, np.sqrt(np.maximum(-np.log(t), 0.0)), np.inf)
            term *= wflat
        term[:, ~live] = 0.0  # padded breakpoints contribute nothing
        term = term.reshape(g, P, K)
        profiles = np.zeros((g, P), dtype=np.float64)
        for k in range(K):  # accumulate in the same order as the numba twin
            profiles += term[:, :, k]
        sup = profiles.max(axis=1)
        inf_ = profiles.min(axis=1)

        interior = np.all(comp > 0, axis=1)
        if np.any(interior):
            vals = np.where(interior, sup, np.inf)
            j = int(np.argmin(vals))
            if vals[j] < gamma_hat:
                gamma_hat = float(vals[j])
                gamma_arg = comp[j].astype(np.int64)
        j = int(np.argmax(inf_))
        if inf_[j] > delta_hat:
            delta_hat = float(inf_[j])
            delta_arg = comp[j].astype(np.int64)
    return gamma_hat, gamma_arg, delta_hat, delta_arg


def _bits(mask: int) -> list[int]:
    out = []
    b = 0
    while mask:
        if mask & 1:
            out.append(b)
        mask >>= 1
        b += 1
    return out


def _composition_chunks(resolution: int, n: int):
    """Yield blocks of compositions of `resolution` into n parts, lexicographic."""
    r = resolution
    if n == 1:
        yield np.array([[r]], dtype=np.int64)
    elif n == 2:
        a = np.arange(r + 1, dtype=np.int64)
        yield np.stack([a, r - a], axis=1)
    elif n == 3:
        for a in range(r + 1):
            b = np.arange(r - a + 1, dtype=np.int64)
            cols = np.full_like(b, a)
            yield np.stack([cols, b, r - a - b], axis=1)
    elif n == 4:
        for a in range(r + 1):
            m = r - a
            bb, cc = np.meshgrid(np.arange(m + 1, dtype=np.int64),
                                 np.arange(m + 1, dtype=np.int64), indexing="ij")
            keep = (bb + cc) <= m
            b = bb[keep]
            c = cc[keep]
            cols = np.full_like(b, a)
            yield np.stack([cols, b, c, r - a - b - c], axis=1)
    else:
        raise ValueError(f"grid scan supports at most 4 parts, got {n}")
