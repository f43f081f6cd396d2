"""Shared exception types."""
from __future__ import annotations

import os


class BudgetError(RuntimeError):
    """An enumeration would exceed the configured search budget."""


class NonRealizableError(ValueError):
    """A construction is known to contain no realizable series."""


def _env_cap(name: str, default: int) -> int:
    raw = os.environ.get(name, "")
    try:
        n = int(raw)
        if n > 0:
            return n
    except ValueError:
        pass
    return default


def candidate_budget() -> int:
    """Enumeration cap; override with TROPLS_MAX_CANDIDATES."""
    return _env_cap("TROPLS_MAX_CANDIDATES", 1_000_000)


def region_budget() -> int:
    """Cap on coefficient-space regions visited; override with TROPLS_MAX_REGIONS."""
    return _env_cap("TROPLS_MAX_REGIONS", 20_000)
