"""Global numeric tolerance and exact-computation caps.

All comparisons in this package use one explicit absolute tolerance
(default 1e-12).  Validators report both the strict (tolerance 0) and the
tolerant verdict; constructive code uses the tolerant comparison only.

Caps guard the exponential-time exact routines.  ``UMSKEL_EXACT_CAP`` in the
environment overrides the exact-search caps (set cover and subset search).
The dendrogram-enumeration cap (5) and the simplex-grid point cap (4) are
hard: their cost grows too fast for an override to be meaningful.
"""

from __future__ import annotations

import os

DEFAULT_TOLERANCE = 1e-12

# Exact minimum-cost ball-cover DP: 2^|A| states.
DEFAULT_EXACT_COVER_CAP = 16
# Exhaustive subset enumeration in the skeleton search: 2^n subsets.
DEFAULT_SUBSET_SEARCH_CAP = 14
# Exhaustive enumeration of leaf-labeled hierarchies (236 topologies at n=5).
HIERARCHY_ORACLE_CAP = 5
# Simplex grid scans enumerate all compositions of the resolution into n parts.
GRID_POINT_CAP = 4

_tolerance = DEFAULT_TOLERANCE


def tolerance() -> float:
    return _tolerance


def set_tolerance(tol: float) -> None:
    global _tolerance
    if not (tol >= 0.0):
        raise ValueError(f"tolerance must be a nonnegative real, got {tol!r}")
    _tolerance = float(tol)


def resolve_tol(tol: float | None) -> float:
    return _tolerance if tol is None else float(tol)


def _env_cap() -> int | None:
    raw = os.environ.get("UMSKEL_EXACT_CAP")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        return None


def exact_cover_cap(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    env = _env_cap()
    return env if env is not None else DEFAULT_EXACT_COVER_CAP


def subset_search_cap(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    env = _env_cap()
    return env if env is not None else DEFAULT_SUBSET_SEARCH_CAP
