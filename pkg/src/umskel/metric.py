"""Finite metric spaces: the labeled point set with its distance matrix.

A space is immutable after construction.  Construction enforces structure
(square matrix, finite nonnegative entries); the metric axioms themselves are
checked by :func:`validate_metric`, which reports every violation with a
witness instead of raising, so that deliberately broken matrices can be
inspected.  Operations that require a valid metric call
:func:`require_valid_metric` first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import resolve_tol
from .errors import ArgumentError, MetricValueError, StructuralError


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labeled points with a symmetric matrix of pairwise distances."""

    labels: tuple
    dist: np.ndarray = field(repr=False)

    def __init__(self, labels: Sequence, dist) -> None:
        labels = tuple(labels)
        arr = _as_square_matrix(dist, len(labels))
        arr.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", arr)

    @property
    def n(self) -> int:
        return len(self.labels)

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def to_jsonable(self) -> dict:
        return {"labels": list(self.labels), "dist": [list(map(float, row)) for row in self.dist]}

    @classmethod
    def from_jsonable(cls, obj: dict) -> "FiniteMetricSpace":
        if not isinstance(obj, dict) or "labels" not in obj or "dist" not in obj:
            raise StructuralError("metric-space JSON requires 'labels' and 'dist' keys")
        return cls(obj["labels"], obj["dist"])


def _as_square_matrix(dist, n: int) -> np.ndarray:
    try:
        arr = np.array(dist, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise StructuralError(f"distance matrix is not rectangular numeric data: {exc}")
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise StructuralError(f"distance matrix must be square, got shape {arr.shape}")
    if arr.shape[0] != n:
        raise StructuralError(
            f"label count {n} does not match matrix size {arr.shape[0]}")
    if np.isnan(arr).any():
        i, j = np.argwhere(np.isnan(arr))[0]
        raise MetricValueError(f"NaN distance at ({i}, {j})", entry=[int(i), int(j)])
    if np.isinf(arr).any():
        i, j = np.argwhere(np.isinf(arr))[0]
        raise MetricValueError(f"infinite distance at ({i}, {j})", entry=[int(i), int(j)])
    if (arr < 0).any():
        i, j = np.argwhere(arr < 0)[0]
        raise MetricValueError(
            f"negative distance {arr[i, j]} at ({i}, {j})", entry=[int(i), int(j)])
    return arr


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str          # "zero_diagonal" | "symmetry" | "distinct_points" | "triangle"
    witness: tuple      # indices involved
    margin: float       # how far past the axiom the witness lies (> 0 is bad)

    def describe(self, labels: tuple) -> str:
        names = ", ".join(repr(labels[i]) for i in self.witness)
        return f"{self.axiom} violated at ({names}) by {self.margin:.6g}"


@dataclass(frozen=True)
class ValidationReport:
    """Axiom check outcome; empty `violations` means the space is a metric."""

    violations: tuple
    strict_violations: tuple
    tol: float

    @property
    def is_valid(self) -> bool:
        return not self.violations

    @property
    def is_strictly_valid(self) -> bool:
        return not self.strict_violations

    def to_jsonable(self) -> dict:
        return {
            "valid": self.is_valid,
            "strictly_valid": self.is_strictly_valid,
            "tolerance": self.tol,
            "violations": [
                {"axiom": v.axiom, "witness": list(v.witness), "margin": v.margin}
                for v in self.violations
            ],
        }


def validate_metric(space: FiniteMetricSpace, tol: float | None = None) -> ValidationReport:
    """Check zero diagonal, symmetry, point distinctness and triangles.

    Returns both the tolerant verdict ("fails by more than tol") and the
    strict one ("fails at all").  The triangle scan is cubic; at desk scale
    this is the honest choice.
    """
    tol = resolve_tol(tol)
    d = space.dist
    n = space.n
    strict: list[AxiomViolation] = []
    tolerant: list[AxiomViolation] = []

    def record(axiom: str, witness: tuple, margin: float,
               strict_bad: bool, tolerant_bad: bool) -> None:
        v = AxiomViolation(axiom, witness, margin)
        if strict_bad:
            strict.append(v)
        if tolerant_bad:
            tolerant.append(v)

    for i in range(n):
        gap = float(abs(d[i, i]))
        record("zero_diagonal", (i,), gap, gap > 0.0, gap > tol)
    asym = np.abs(d - d.T)
    for i, j in zip(*np.nonzero(np.triu(asym, 1))):
        gap = float(asym[i, j])
        record("symmetry", (int(i), int(j)), gap, gap > 0.0, gap > tol)
    for i in range(n):
        for j in range(i + 1, n):
            # distinctness: tolerance makes this check stricter, not looser
            val = float(min(d[i, j], d[j, i]))
            record("distinct_points", (i, j), val, val <= 0.0, val <= tol)
    for i in range(n):
        for j in range(i + 1, n):
            slack = d[i, :] + d[:, j] - d[i, j]
            k = int(np.argmin(slack))
            deficit = float(-slack[k])
            if k != i and k != j:
                record("triangle", (i, k, j), deficit, deficit > 0.0, deficit > tol)

    return ValidationReport(violations=tuple(tolerant), strict_violations=tuple(strict), tol=tol)


def require_valid_metric(space: FiniteMetricSpace, tol: float | None = None) -> None:
    report = validate_metric(space, tol)
    if not report.is_valid:
        v = report.violations[0]
        raise ArgumentError(
            f"not a valid metric space: {v.describe(space.labels)}",
            axiom=v.axiom, witness=list(v.witness), margin=v.margin,
            total_violations=len(report.violations))


def closed_ball(space: FiniteMetricSpace, x: int, r: float,
                tol: float | None = None) -> frozenset:
    """All points within distance r of x (closed, with tolerant boundary)."""
    if not 0 <= x < space.n:
        raise ArgumentError(f"point index {x} out of range for n={space.n}")
    if not r >= 0:
        raise ArgumentError(f"ball radius must be nonnegative, got {r}")
    tol = resolve_tol(tol)
    return frozenset(int(i) for i in np.nonzero(space.dist[x] <= r + tol)[0])


def restrict_space(space: FiniteMetricSpace, subset: Iterable[int]) -> FiniteMetricSpace:
    """Induced subspace on `subset`, points ordered by original index."""
    idx = sorted(set(int(i) for i in subset))
    if not idx:
        raise ArgumentError("cannot restrict to an empty subset")
    for i in idx:
        if not 0 <= i < space.n:
            raise ArgumentError(f"subset index {i} out of range for n={space.n}")
    labels = tuple(space.labels[i] for i in idx)
    return FiniteMetricSpace(labels, space.dist[np.ix_(idx, idx)])


def subset_diameter(space: FiniteMetricSpace, subset: Iterable[int]) -> float:
    idx = list(subset)
    if len(idx) < 2:
        return 0.0
    return float(space.dist[np.ix_(idx, idx)].max())


def set_distance(space: FiniteMetricSpace, a: Iterable[int], b: Iterable[int]) -> float:
    ia, ib = list(a), list(b)
    if not ia or not ib:
        raise ArgumentError("set distance needs two nonempty sets")
    return float(space.dist[np.ix_(ia, ib)].min())


def path_space(m: int, step: float = 1.0) -> FiniteMetricSpace:
    """m points on a line at consecutive multiples of `step`."""
    if m < 1:
        raise ArgumentError(f"path needs at least one point, got {m}")
    xs = np.arange(m, dtype=np.float64) * step
    return FiniteMetricSpace(tuple(range(m)), np.abs(xs[:, None] - xs[None, :]))


def equilateral_space(n: int, side: float = 1.0) -> FiniteMetricSpace:
    if n < 1:
        raise ArgumentError(f"need at least one point, got {n}")
    d = np.full((n, n), float(side))
    np.fill_diagonal(d, 0.0)
    return FiniteMetricSpace(tuple(range(n)), d)


def line_subset_space(points: Sequence[float]) -> FiniteMetricSpace:
    xs = np.asarray(sorted(points), dtype=np.float64)
    return FiniteMetricSpace(tuple(float(x) if x != int(x) else int(x) for x in xs),
                             np.abs(xs[:, None] - xs[None, :]))
