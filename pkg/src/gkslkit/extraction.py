"""Recover a GKSL generator from the channels of a semigroup at small times.

Pipeline per time step ``dt``: channel -> Choi -> deterministic Kraus set
``L_j`` -> traceless split ``L_j = M_j + alpha_j I`` -> Hermitian ``Y`` such
that, exactly for any unital Kraus set,

    Lambda(A) = A + i[Y, A] + sum_j (M_j^dag A M_j - {M_j^dag M_j, A} / 2).

Dividing by ``dt`` gives a per-step candidate generator with Hamiltonian
``Y/dt`` and jumps ``M_j/sqrt(dt)``. Two such candidates are combined by
Richardson extrapolation at the superoperator level and the jump operators
are refit from the extrapolated dissipator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channels import (
    as_kraus,
    choi_from_super,
    identity_super,
    is_unital,
    kraus_from_choi,
    super_dim,
    super_trace,
)
from .errors import InsufficientGrid, NotCP, NotUnital, StepTooLarge
from .fitting import loglog_slope, richardson_weights, spans_decades
from .gksl import (
    GkslGenerator,
    build_super,
    canonicalize,
    hamiltonian_super,
    reduce_jumps,
)
from .operator_core import anticomm, comm, dag, eigh_sorted, herm_split, hs_norm, traceless_part

__all__ = [
    "ExtractionIntermediate",
    "OrderDiagnostics",
    "ExtractionResult",
    "decompose",
    "reconstruct",
    "candidate_generator",
    "kraus_at",
    "order_diagnostics",
    "finite_difference_generator",
    "extract_generator",
    "refit_jumps",
    "DEFAULT_DT_PAIR",
    "DEFAULT_DT_GRID",
]

ChannelSource = Callable[[float], np.ndarray]

DEFAULT_DT_PAIR = (1e-3, 5e-4)
DEFAULT_DT_GRID = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
# Kraus truncation for near-identity channels: dropping eigenvalues near
# 1e-10 would cost ~1e-10/dt in the difference quotient.
KRAUS_TOL = 1e-13
UNITAL_TOL = 1e-9
MAX_STEP_DEVIATION = 0.1
REFIT_NEG_TOL = 1e-6
DEGENERATE_NORM = 1e-12
SLOPE_M_BAND = (0.45, 0.55)
SLOPE_Y_BAND = (0.85, 1.15)


@dataclass(frozen=True)
class ExtractionIntermediate:
    dt: float
    kraus: np.ndarray
    alphas: np.ndarray
    tracelessM: np.ndarray
    X: np.ndarray
    beta: float
    X_R: np.ndarray
    X_I: np.ndarray
    Y: np.ndarray


def decompose(kraus, dt: float) -> ExtractionIntermediate:
    """Traceless splitting of a unital Kraus set.

    ``X`` is built from the traceless parts, ``X = sum_j conj(alpha_j) M_j``,
    so that ``X_R = ((1 - beta) I - sum_j M_j^dag M_j) / 2`` holds. ``X_I``
    and hence ``Y`` would be the same with ``L_j`` in place of ``M_j``.
    """
    k = as_kraus(kraus)
    ok, residual = is_unital(k, UNITAL_TOL)
    if not ok:
        raise NotUnital(f"Kraus set is not unital (residual {residual:.3e})")
    d = k.shape[1]
    parts = [traceless_part(m) for m in k]
    ms = np.asarray([p[0] for p in parts])
    alphas = np.asarray([p[1] for p in parts])
    x = np.einsum("j,jab->ab", alphas.conj(), ms)
    beta = float(np.sum(np.abs(alphas) ** 2))
    x_r, x_i = herm_split(x)
    y = -x_i + np.trace(x_i).real / d * np.eye(d)
    return ExtractionIntermediate(float(dt), k, alphas, ms, x, beta, x_r, x_i, y)


def reconstruct(inter: ExtractionIntermediate, a: np.ndarray) -> np.ndarray:
    """Right-hand side ``A + i[Y, A] + sum_j (M_j^dag A M_j - {M_j^dag M_j, A}/2)``."""
    out = a + 1j * comm(inter.Y, a)
    for m in inter.tracelessM:
        md = dag(m)
        out = out + md @ a @ m - 0.5 * anticomm(md @ m, a)
    return out


def candidate_generator(inter: ExtractionIntermediate) -> GkslGenerator:
    """Generator with ``H = Y/dt`` and jumps ``M_j / sqrt(dt)`` for one step."""
    y = (inter.Y + dag(inter.Y)) / 2
    return GkslGenerator(y / inter.dt, inter.tracelessM / np.sqrt(inter.dt))


def kraus_at(source: ChannelSource, dt: float) -> np.ndarray:
    return kraus_from_choi(choi_from_super(source(dt)), tol=KRAUS_TOL)


def finite_difference_generator(source: ChannelSource, dt: float) -> np.ndarray:
    if dt <= 0:
        raise ValueError("dt must be positive")
    s = np.asarray(source(dt), dtype=complex)
    return (s - identity_super(super_dim(s))) / dt


@dataclass(frozen=True)
class OrderDiagnostics:
    dt_grid: list
    m_norms: list
    y_norms: list
    slope_m: float | None
    slope_y: float | None
    trace_residuals: list = field(default_factory=list)

    @property
    def degenerate_m(self) -> bool:
        return self.slope_m is None

    @property
    def degenerate_y(self) -> bool:
        return self.slope_y is None

    def in_bands(self) -> dict:
        """Pass flags for the two order laws; degenerate series pass vacuously."""
        def ok(slope, band):
            return slope is None or band[0] <= slope <= band[1]
        return {"slope_m": ok(self.slope_m, SLOPE_M_BAND), "slope_y": ok(self.slope_y, SLOPE_Y_BAND)}

    def to_dict(self) -> dict:
        return {
            "dt_grid": list(self.dt_grid),
            "m_norms": list(self.m_norms),
            "y_norms": list(self.y_norms),
            "slope_m": self.slope_m,
            "slope_y": self.slope_y,
            "degenerate_m": self.degenerate_m,
            "degenerate_y": self.degenerate_y,
            "trace_residuals": list(self.trace_residuals),
            "in_bands": self.in_bands(),
        }


def _slope_or_none(x, y):
    if max(y) < DEGENERATE_NORM:
        return None
    return loglog_slope(x, np.maximum(y, 1e-300))


def order_diagnostics(source: ChannelSource, dt_grid=DEFAULT_DT_GRID) -> OrderDiagnostics:
    """Scaling of ``max_j ||M_j||_2`` and ``||Y||_inf`` over a decreasing dt grid.

    Each grid point also checks ``tr[Lambda_dt - id] = -d sum_j ||M_j||_2^2``;
    a violation above ``1e-10`` relative raises ``ValueError``.
    """
    grid = [float(t) for t in dt_grid]
    if len(grid) < 4 or not spans_decades(grid):
        raise InsufficientGrid("dt grid needs at least 4 points spanning 2 decades")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise InsufficientGrid("dt grid must be strictly decreasing")
    m_norms, y_norms, trace_res = [], [], []
    for dt in grid:
        s = np.asarray(source(dt), dtype=complex)
        d = super_dim(s)
        inter = decompose(kraus_from_choi(choi_from_super(s), tol=KRAUS_TOL), dt)
        m_norms.append(max(hs_norm(m) for m in inter.tracelessM))
        y_norms.append(float(np.linalg.norm(inter.Y, 2)))
        lhs = super_trace(s - identity_super(d))
        rhs = -d * sum(hs_norm(m) ** 2 for m in inter.tracelessM)
        res = abs(lhs - rhs)
        if res > 1e-10 * max(1.0, abs(rhs)):
            raise ValueError(f"trace identity violated at dt={dt:g}: residual {res:.3e}")
        trace_res.append(float(res))
    return OrderDiagnostics(grid, m_norms, y_norms, _slope_or_none(grid, m_norms),
                            _slope_or_none(grid, y_norms), trace_res)


def _omega_projector(d: int) -> np.ndarray:
    omega = np.eye(d, dtype=complex).reshape(-1)
    return np.eye(d * d) - np.outer(omega, omega) / d


def refit_jumps(dissipator: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Traceless jump operators reproducing a dissipator superoperator.

    The Choi matrix is made Hermitian and compressed onto the complement of
    the maximally entangled vector, where the anticommutator and commutator
    terms vanish and only ``sum_j |w_j><w_j|`` remains. Small negative
    eigenvalues (down to ``-1e-6`` relative) are clipped.
    """
    d = super_dim(dissipator)
    j = choi_from_super(dissipator)
    j = (j + dag(j)) / 2
    p = _omega_projector(d)
    jp = p @ j @ p
    w, v = eigh_sorted(jp)
    scale = max(float(np.max(np.abs(w))), 0.0)
    if scale == 0.0:
        return np.zeros((0, d, d), dtype=complex)
    if w[-1] < -REFIT_NEG_TOL * scale:
        raise NotCP(f"extrapolated dissipator is not conditionally CP (eigenvalue {w[-1]:.3e})")
    keep = w > tol * scale
    vecs = v[:, keep].T * np.sqrt(w[keep])[:, None]
    return vecs.conj().reshape(-1, d, d)


@dataclass(frozen=True)
class ExtractionResult:
    generator: GkslGenerator
    diagnostics: OrderDiagnostics | None
    residuals: list
    extrapolation_record: dict
    per_dt: list = field(default_factory=list)


def extract_generator(
    source: ChannelSource,
    dt_pair=DEFAULT_DT_PAIR,
    dt_grid=DEFAULT_DT_GRID,
    gauge: Callable[[float, np.ndarray], np.ndarray] | None = None,
) -> ExtractionResult:
    """Canonical, reduced generator of the semigroup behind ``source``.

    ``gauge``, if given, is applied to each per-step Kraus set before the
    traceless splitting; the result must not depend on it. Pass
    ``dt_grid=None`` to skip the order diagnostics.
    """
    dt1, dt2 = (float(t) for t in dt_pair)
    per_dt, residuals = [], []
    for dt in (dt1, dt2):
        s = np.asarray(source(dt), dtype=complex)
        d = super_dim(s)
        deviation = float(np.linalg.norm(s - identity_super(d)))
        if deviation >= MAX_STEP_DEVIATION:
            raise StepTooLarge(f"||Lambda_dt - id||_2 = {deviation:.3g} at dt={dt:g}; use a smaller step")
        kraus = kraus_from_choi(choi_from_super(s), tol=KRAUS_TOL)
        if gauge is not None:
            kraus = gauge(dt, kraus)
        g_dt = reduce_jumps(canonicalize(candidate_generator(decompose(kraus, dt))))
        fd = (s - identity_super(d)) / dt
        residuals.append(float(np.linalg.norm(build_super(g_dt) - fd)))
        per_dt.append(g_dt)
    w1, w2 = richardson_weights(dt1, dt2)
    l_star = w1 * build_super(per_dt[0]) + w2 * build_super(per_dt[1])
    h_star = w1 * per_dt[0].H + w2 * per_dt[1].H
    h_star = (h_star + dag(h_star)) / 2
    jumps = refit_jumps(l_star - hamiltonian_super(h_star))
    generator = reduce_jumps(canonicalize(GkslGenerator(h_star, jumps)))
    diagnostics = order_diagnostics(source, dt_grid) if dt_grid is not None else None
    record = {"dt": [dt1, dt2], "weights": [w1, w2], "order": 1}
    return ExtractionResult(generator, diagnostics, residuals, record, per_dt)
