"""Shared numerical configuration.

Every feasibility, orthogonality and equality check in the package derives
its tolerance from the single value below; callers may override per call.
"""

from __future__ import annotations

import os

DEFAULT_TOL = 1e-9

#: Environment variable capping intra-suite parallelism (1 = sequential).
THREADS_ENV = "FITZKIT_THREADS"


def thread_count() -> int:
    """Worker count for lattice-parallel loops, from FITZKIT_THREADS."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be >= 1, got {n}")
    return n
