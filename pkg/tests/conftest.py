"""Shared instance generators for the test suite.

Everything is seeded; no test depends on global RNG state.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from umskel import FiniteMetricSpace
from umskel.submeasures import TableSubmeasure
from umskel.tree import TreeNode, UltrametricTree, leaf


def euclidean_metric(rng: np.random.Generator, n: int, dim: int = 3,
                     scale: float = 1.0) -> FiniteMetricSpace:
    pts = rng.standard_normal((n, dim)) * scale
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, 0.0)
    return FiniteMetricSpace(tuple(range(n)), d)


def shortest_path_metric(rng: np.random.Generator, n: int) -> FiniteMetricSpace:
    """Random symmetric weights pushed to a metric by path closure."""
    w = rng.uniform(0.5, 3.0, size=(n, n))
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, 0.0)
    d = w.copy()
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return FiniteMetricSpace(tuple(range(n)), d)


def random_metric(rng: np.random.Generator, n: int) -> FiniteMetricSpace:
    if rng.random() < 0.5:
        return euclidean_metric(rng, n, dim=int(rng.integers(2, 5)))
    return shortest_path_metric(rng, n)


def random_ultrametric_tree(rng: np.random.Generator, n: int,
                            diam: float = 2.0) -> UltrametricTree:
    """Random recursive partition with strictly decreasing diameters."""
    points = list(range(n))
    rng.shuffle(points)

    def build(pts: list[int], top: float) -> TreeNode:
        if len(pts) == 1:
            return leaf(pts[0])
        k = int(rng.integers(2, len(pts) + 1))
        cuts = sorted(rng.choice(range(1, len(pts)), size=k - 1, replace=False))
        groups = [pts[a:b] for a, b in zip([0] + list(cuts), list(cuts) + [len(pts)])]
        kids = [build(g, top * rng.uniform(0.25, 0.8)) for g in groups]
        return TreeNode(diam=top, point=None,
                        children=tuple(sorted(kids, key=lambda c: c.min_point())))

    if n == 1:
        return UltrametricTree(leaf(0))
    return UltrametricTree(build(points, diam))


def random_ultrametric_space(rng: np.random.Generator, n: int) -> FiniteMetricSpace:
    tree = random_ultrametric_tree(rng, n)
    _, mat = tree.induced_matrix()
    return FiniteMetricSpace(tuple(range(n)), mat)


def random_submeasure_table(rng: np.random.Generator, n: int) -> TableSubmeasure:
    """A genuine probability submeasure with exact rational values.

    Components (additive measures, caps of them, concave functions of the
    cardinality) are each submeasures, and max/sum/scaling preserve the
    axioms; normalizing by the ground-set value makes it a probability
    submeasure."""
    components = []
    for _ in range(int(rng.integers(1, 4))):
        kind = rng.integers(0, 3)
        if kind == 0:
            w = [Fraction(int(rng.integers(1, 32)), 32) for _ in range(n)]
            components.append(lambda A, w=w: sum((w[i] for i in A), Fraction(0)))
        elif kind == 1:
            w = [Fraction(int(rng.integers(1, 32)), 32) for _ in range(n)]
            cap = Fraction(int(rng.integers(8, 64)), 32)
            components.append(
                lambda A, w=w, cap=cap: min(sum((w[i] for i in A), Fraction(0)), cap))
        else:
            incs = sorted((Fraction(int(rng.integers(1, 64)), 64)
                           for _ in range(n)), reverse=True)
            steps = [Fraction(0)]
            for inc in incs:
                steps.append(steps[-1] + inc)
            components.append(lambda A, steps=steps: steps[len(A)])
    use_max = rng.random() < 0.5

    def raw(A) -> Fraction:
        vals = [c(A) for c in components]
        return max(vals) if use_max else sum(vals, Fraction(0))

    ground = frozenset(range(n))
    norm = raw(ground)
    table = {}
    for mask in range(1, 1 << n):
        cell = frozenset(i for i in range(n) if (mask >> i) & 1)
        table[cell] = raw(cell) / norm
    return TableSubmeasure(values=table)


def random_probability(rng: np.random.Generator, n: int,
                       allow_zeros: bool = False) -> np.ndarray:
    w = rng.random(n) + 1e-3
    if allow_zeros and n > 1 and rng.random() < 0.4:
        w[rng.integers(0, n)] = 0.0
    return w / w.sum()


@pytest.fixture(scope="session")
def warm_kernels():
    """Trigger jit compilation outside any timed region."""
    import numpy as np

    from umskel import kernels

    d = np.array([[0.0, 1.0], [1.0, 0.0]])
    kernels.subset_distortions(d, np.array([3], dtype=np.int64))
    kernels.setcover_min_costs(np.array([1, 2, 3], dtype=np.int64),
                               np.array([0.5, 0.5, 0.75]), 2)
    masks = np.ones((2, 1, 2), dtype=np.int64)
    widths = np.ones((2, 1), dtype=np.float64)
    kernels.grid_scan_sqrtlog(masks, widths, 4)
    return kernels.BACKEND
