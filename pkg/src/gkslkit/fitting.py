"""Log-log slope fits and two-point Richardson extrapolation."""

from __future__ import annotations

import numpy as np


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs at least two positive points")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def spans_decades(x, decades: float = 2.0) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(x.size and x.min() > 0 and np.log10(x.max() / x.min()) >= decades - 1e-9)


def richardson_weights(h1: float, h2: float, order: int = 1) -> tuple[float, float]:
    """Weights ``(w1, w2)`` with ``w1 f(h1) + w2 f(h2)`` cancelling the ``h**order`` term.

    For ``h2 = h1 / 2`` and ``order = 1`` this is ``(-1, 2)``.
    """
    if h1 <= 0 or h2 <= 0 or h1 == h2:
        raise ValueError("Richardson extrapolation needs two distinct positive steps")
    a1, a2 = h1**order, h2**order
    return -a2 / (a1 - a2), a1 / (a1 - a2)
