# =============================================================================
# CONFIG UTILS - Runtime configuration helpers
# =============================================================================
"""
Runtime configuration helpers shared by the numerical modules and the CLI.

This module bridges environment variables (optionally loaded from ``.env``
by ``app.py``) and the values the solvers need at run time: the number of
FFT worker threads and small parsing helpers for numbers given as text.
"""

import os
from fractions import Fraction
from typing import List, Optional


# =============================================================================
# CONSTANTS
# =============================================================================

DEFAULT_THREADS = 1

_override_threads: Optional[int] = None


# =============================================================================
# THREAD CONFIGURATION
# =============================================================================


def get_fft_workers() -> int:
    """Return how many threads scipy.fft may use for one transform.

    ``NLES_THREADS`` caps internal parallelism; values below 1 or
    unparseable values fall back to a single worker.
    """
    if _override_threads is not None:
        return _override_threads
    raw = os.environ.get("NLES_THREADS")
    if raw is None:
        return DEFAULT_THREADS
    try:
        return max(1, int(raw))
    except (ValueError, TypeError):
        print(f"WARN [config_utils] Ignoring invalid NLES_THREADS={raw!r}")
        return DEFAULT_THREADS


def set_fft_workers(threads: Optional[int]) -> None:
    """Pin the worker count for this process (``None`` restores the env value)."""
    global _override_threads
    if threads is None:
        _override_threads = None
        return
    _override_threads = max(1, int(threads))


# =============================================================================
# NUMBER PARSING
# =============================================================================


def parse_number(text: str) -> float:
    """Parse a float that may be written as a fraction (``1/9``)."""
    text = str(text).strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def parse_number_list(text: str) -> List[float]:
    """Parse a comma-separated list such as ``1e-8,1e-6,1e-4``."""
    items = [part.strip() for part in str(text).split(",")]
    return [parse_number(item) for item in items if item]
