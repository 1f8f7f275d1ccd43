"""Semigroups generated by GKSL generators and their Trotter approximants."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .channels import super_from_kraus
from .errors import InsufficientGrid, StepTooLarge
from .fitting import loglog_slope, spans_decades
from .gksl import GkslGenerator, build_super
from .operator_core import dag, expm, psd_sqrt

__all__ = [
    "channel_at",
    "t0_max",
    "psi_step",
    "trotter_channel",
    "trotter_convergence",
    "TrotterReport",
]

DEGENERATE_ERROR = 1e-13
SLOPE_BAND = (-1.15, -0.85)


def channel_at(g: GkslGenerator, t: float) -> np.ndarray:
    """Superoperator of ``exp(t L)``."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    return expm(t * build_super(g))


def t0_max(g: GkslGenerator) -> float:
    """Largest ``t`` with ``t * sum_j V_j^dag V_j <= I``; ``inf`` without jumps."""
    if g.n_jumps == 0:
        return float("inf")
    k = np.einsum("jba,jbc->ac", g.jumps.conj(), g.jumps)
    nrm = float(np.linalg.norm(k, 2))
    return float("inf") if nrm == 0.0 else 1.0 / nrm


def _check_step(g: GkslGenerator, step: float) -> None:
    t0 = t0_max(g)
    if step > t0 * (1 + 1e-12):
        raise StepTooLarge(f"step {step:.6g} exceeds t0 = {t0:.6g}")


def psi_step(g: GkslGenerator, t: float) -> np.ndarray:
    """One-step unital CP map with Kraus operators ``R_0, ..., R_N``.

    ``R_0 = exp(-itH) sqrt(I - t sum_j V_j^dag V_j)`` and ``R_j = sqrt(t) V_j``.
    """
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    _check_step(g, t)
    d = g.dim
    k = np.einsum("jba,jbc->ac", g.jumps.conj(), g.jumps)
    r0 = expm(-1j * t * g.H) @ psd_sqrt(np.eye(d) - t * k)
    return np.concatenate([r0[None], np.sqrt(t) * g.jumps])


def trotter_channel(g: GkslGenerator, t: float, n: int) -> np.ndarray:
    """Superoperator of ``Psi_{t/n}`` composed ``n`` times."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    _check_step(g, t / n)
    step = super_from_kraus(psi_step(g, t / n))
    return np.linalg.matrix_power(step, n)


@dataclass(frozen=True)
class TrotterReport:
    t: float
    n_values: list
    errors: list
    fitted_slope: float | None
    degenerate: bool
    monotone: bool

    @property
    def in_band(self) -> bool:
        if self.degenerate:
            return True
        lo, hi = SLOPE_BAND
        return lo <= self.fitted_slope <= hi

    def to_dict(self) -> dict:
        out = asdict(self)
        out["in_band"] = self.in_band
        return out


def trotter_convergence(g: GkslGenerator, t: float, n_values) -> TrotterReport:
    """Errors ``||Phi_n - exp(tL)||_2`` over an ``n`` grid and their log-log slope.

    A generator whose errors all sit below ``1e-13`` is reported as degenerate
    with no slope.
    """
    n_values = [int(n) for n in n_values]
    if len(n_values) < 4 or not spans_decades(n_values):
        raise InsufficientGrid("need at least 4 n values spanning 2 decades")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise InsufficientGrid("n values must be strictly increasing")
    exact = channel_at(g, t)
    errors = [float(np.linalg.norm(trotter_channel(g, t, n) - exact)) for n in n_values]
    degenerate = max(errors) < DEGENERATE_ERROR
    slope = None if degenerate else loglog_slope(n_values, np.maximum(errors, 1e-300))
    monotone = all(b <= 1.1 * a for a, b in zip(errors, errors[1:]))
    return TrotterReport(float(t), n_values, errors, slope, degenerate, monotone)
