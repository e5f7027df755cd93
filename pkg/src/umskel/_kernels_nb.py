"""Numba-compiled twins of the hot kernels in ``_kernels_np``."""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND = "numba"


@njit(cache=True)
def _subset_distortions_impl(dist, masks):
    n = dist.shape[0]
    out = np.ones(masks.shape[0], dtype=np.float64)
    idx = np.empty(n, dtype=np.int64)
    u = np.empty((n, n), dtype=np.float64)
    for t in range(masks.shape[0]):
        mask = masks[t]
        m = 0
        for b in range(n):
            if (mask >> b) & 1:
                idx[m] = b
                m += 1
        if m < 2:
            continue
        for i in range(m):
            for j in range(m):
                u[i, j] = dist[idx[i], idx[j]]
        for k in range(m):
            for i in range(m):
                uik = u[i, k]
                for j in range(m):
                    v = uik if uik > u[k, j] else u[k, j]
                    if v < u[i, j]:
                        u[i, j] = v
        best = 1.0
        for i in range(m):
            for j in range(i + 1, m):
                ratio = dist[idx[i], idx[j]] / u[i, j]
                if ratio > best:
                    best = ratio
        out[t] = best
    return out


@njit(cache=True)
def _setcover_min_costs_impl(ball_masks, ball_costs, n):
    size = 1 << n
    dp = np.full(size, np.inf, dtype=np.float64)
    dp[0] = 0.0
    nb = ball_masks.shape[0]
    # CSR of ball indices per covered bit
    counts = np.zeros(n + 1, dtype=np.int64)
    for i in range(nb):
        for b in range(n):
            if (ball_masks[i] >> b) & 1:
                counts[b + 1] += 1
    for b in range(n):
        counts[b + 1] += counts[b]
    order = np.empty(counts[n], dtype=np.int64)
    fill = counts[:n].copy()
    for i in range(nb):
        for b in range(n):
            if (ball_masks[i] >> b) & 1:
                order[fill[b]] = i
                fill[b] += 1
    for s in range(1, size):
        b = 0
        while ((s >> b) & 1) == 0:
            b += 1
        best = np.inf
        for p in range(counts[b], counts[b + 1]):
            i = order[p]
            v = dp[s & ~ball_masks[i]] + ball_costs[i]
            if v < best:
                best = v
        dp[s] = best
    return dp


@njit(cache=True)
def _grid_scan_sqrtlog_impl(masks, widths, resolution):
    P, K, n = masks.shape
    inv_r = 1.0 / resolution
    gamma_hat = np.inf
    gamma_arg = np.zeros(n, dtype=np.int64)
    delta_hat = -np.inf
    delta_arg = np.zeros(n, dtype=np.int64)

    comp = np.zeros(n, dtype=np.int64)
    comp[n - 1] = resolution
    head = np.zeros(n - 1, dtype=np.int64) if n > 1 else np.zeros(0, dtype=np.int64)
    while True:
        interior = True
        for j in range(n):
            if comp[j] == 0:
                interior = False
                break
        sup = -np.inf
        inf_ = np.inf
        for p in range(P):
            acc = 0.0
            for k in range(K):
                w = widths[p, k]
                if w <= 0.0:
                    continue
                m = 0
                for j in range(n):
                    m += masks[p, k, j] * comp[j]
                if m == 0:
                    acc = np.inf
                    break
                t = m * inv_r
                if t < 1.0:
                    v = -np.log(t)
                    if v > 0.0:
                        acc += w * np.sqrt(v)
            if acc > sup:
                sup = acc
            if acc < inf_:
                inf_ = acc
        if interior and sup < gamma_hat:
            gamma_hat = sup
            gamma_arg[:] = comp
        if inf_ > delta_hat:
            delta_hat = inf_
            delta_arg[:] = comp

        if n == 1:
            break
        j = n - 2
        advanced = False
        while j >= 0:
            head[j] += 1
            s = 0
            for q in range(j + 1):
                s += head[q]
            if s <= resolution:
                for q in range(j + 1, n - 1):
                    head[q] = 0
                advanced = True
                break
            head[j] = 0
            j -= 1
        if not advanced:
            break
        s = 0
        for q in range(n - 1):
            comp[q] = head[q]
            s += head[q]
        comp[n - 1] = resolution - s
    return gamma_hat, gamma_arg, delta_hat, delta_arg


def subset_distortions(dist: np.ndarray, masks: np.ndarray) -> np.ndarray:
    return _subset_distortions_impl(np.ascontiguousarray(dist, dtype=np.float64),
                                    np.ascontiguousarray(masks, dtype=np.int64))


def setcover_min_costs(ball_masks: np.ndarray, ball_costs: np.ndarray, n: int) -> np.ndarray:
    return _setcover_min_costs_impl(np.ascontiguousarray(ball_masks, dtype=np.int64),
                                    np.ascontiguousarray(ball_costs, dtype=np.float64),
                                    int(n))


def grid_scan_sqrtlog(masks: np.ndarray, widths: np.ndarray, resolution: int):
    return _grid_scan_sqrtlog_impl(np.ascontiguousarray(masks, dtype=np.int64),
                                   np.ascontiguousarray(widths, dtype=np.float64),
                                   int(resolution))
