"""Hot-kernel dispatch.

The numba backend is the default; set ``UMSKEL_NO_NUMBA=1`` (or any nonempty
value) to force the pure-numpy fallback.  Both backends are exercised by the
test suite and compared by ``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import os

if os.environ.get("UMSKEL_NO_NUMBA"):
    from . import _kernels_np as _impl
else:
    try:
        from . import _kernels_nb as _impl
    except ImportError:  # pragma: no cover - numba is an install-time choice
        from . import _kernels_np as _impl

BACKEND = _impl.BACKEND
subset_distortions = _impl.subset_distortions
setcover_min_costs = _impl.setcover_min_costs
grid_scan_sqrtlog = _impl.grid_scan_sqrtlog
