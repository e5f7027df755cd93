"""Point measures on finite metric spaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import resolve_tol
from .errors import ArgumentError
from .metric import FiniteMetricSpace, closed_ball


@dataclass(frozen=True)
class MeasureVec:
    """Nonnegative weights indexed by point."""

    weights: np.ndarray = field(repr=False)

    def __init__(self, weights: Sequence[float]):
        arr = np.asarray(weights, dtype=np.float64).copy()
        if arr.ndim != 1:
            raise ArgumentError(f"measure must be a flat vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ArgumentError("measure weights must be finite")
        if np.any(arr < 0):
            i = int(np.argmin(arr))
            raise ArgumentError(f"negative weight {arr[i]} at point {i}", point=i)
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)

    @property
    def n(self) -> int:
        return len(self.weights)

    def total(self) -> float:
        return float(self.weights.sum())

    def mass(self, points: Iterable[int]) -> float:
        idx = list(points)
        return float(self.weights[idx].sum()) if idx else 0.0

    def support(self) -> tuple:
        return tuple(int(i) for i in np.nonzero(self.weights)[0])

    def ball_mass(self, space: FiniteMetricSpace, x: int, r: float,
                  tol: float | None = None) -> float:
        return self.mass(sorted(closed_ball(space, x, r, tol)))

    def to_jsonable(self) -> list:
        return [float(w) for w in self.weights]

    @classmethod
    def uniform(cls, n: int) -> "MeasureVec":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, at: int) -> "MeasureVec":
        w = np.zeros(n)
        w[at] = 1.0
        return cls(w)


@dataclass(frozen=True)
class WeightedSpace:
    """A metric space together with a probability measure on its points."""

    space: FiniteMetricSpace
    mu: MeasureVec

    def __post_init__(self):
        if self.mu.n != self.space.n:
            raise ArgumentError(
                f"measure length {self.mu.n} does not match point count {self.space.n}")
        tol = resolve_tol(None)
        total = self.mu.total()
        if abs(total - 1.0) > max(tol, 1e-12):
            raise ArgumentError(f"probability measure must sum to 1, got {total!r}")

    @property
    def n(self) -> int:
        return self.space.n


def probability(weights: Sequence[float]) -> MeasureVec:
    """Validate and wrap an explicit probability vector."""
    vec = MeasureVec(weights)
    if abs(vec.total() - 1.0) > 1e-12:
        raise ArgumentError(f"weights sum to {vec.total()!r}, expected 1")
    return vec
