"""GKSL generators: data model, superoperator, canonical gauge, jump reduction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import super_trace
from .errors import DimensionMismatch, NonCanonical
from .operator_core import as_operator, dag, eigh_sorted, hs_norm

__all__ = [
    "GkslGenerator",
    "SIGMA_MINUS",
    "amplitude_damping",
    "zero_generator",
    "hamiltonian_super",
    "dissipator_super",
    "build_super",
    "is_canonical",
    "canonicalize",
    "reduce_jumps",
    "trace_identity_check",
    "generator_distance",
    "unitary_with_first_row",
]

_NEGLIGIBLE_GRAM = 1e-26  # all jumps below 1e-13 in HS norm count as absent

# |0><1|: lowers |1> to |0>.
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)


@dataclass(frozen=True)
class GkslGenerator:
    """``L(A) = i[H, A] + sum_j (V_j^dag A V_j - {V_j^dag V_j, A} / 2)``.

    ``jumps`` has shape ``(N, d, d)``; ``N = 0`` is a purely Hamiltonian generator.
    """

    H: np.ndarray
    jumps: np.ndarray = field(default=None)

    def __post_init__(self):
        h = as_operator(self.H)
        d = h.shape[0]
        if np.linalg.norm(h - dag(h)) > 1e-12 * max(1.0, hs_norm(h)):
            raise ValueError("H is not Hermitian")
        jumps = self.jumps
        if jumps is None or len(jumps) == 0:
            jumps = np.zeros((0, d, d), dtype=complex)
        jumps = np.asarray(jumps, dtype=complex)
        if jumps.ndim == 2:
            jumps = jumps[None]
        if jumps.ndim != 3 or jumps.shape[1:] != (d, d):
            raise DimensionMismatch(f"jump operators must be {d}x{d}, got {jumps.shape}")
        if not np.all(np.isfinite(jumps)):
            raise ValueError("jump operators have non-finite entries")
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "jumps", jumps)

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    @property
    def n_jumps(self) -> int:
        return self.jumps.shape[0]


def amplitude_damping(gamma: float = 1.0) -> GkslGenerator:
    return GkslGenerator(np.zeros((2, 2)), [np.sqrt(gamma) * SIGMA_MINUS])


def zero_generator(d: int) -> GkslGenerator:
    return GkslGenerator(np.zeros((d, d)))


def hamiltonian_super(h: np.ndarray) -> np.ndarray:
    """Superoperator of ``A -> i[h, A]`` (column stacking)."""
    d = h.shape[0]
    eye = np.eye(d)
    return 1j * (np.kron(eye, h) - np.kron(h.T, eye))


def dissipator_super(jumps: np.ndarray) -> np.ndarray:
    jumps = np.asarray(jumps, dtype=complex)
    d = jumps.shape[-1]
    eye = np.eye(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    for v in jumps:
        vdv = dag(v) @ v
        out += np.kron(v.T, dag(v)) - 0.5 * (np.kron(eye, vdv) + np.kron(vdv.T, eye))
    return out


def build_super(g: GkslGenerator) -> np.ndarray:
    return hamiltonian_super(g.H) + dissipator_super(g.jumps)


def _scale(g: GkslGenerator) -> float:
    return max(1.0, hs_norm(g.H), *(hs_norm(v) for v in g.jumps))


def is_canonical(g: GkslGenerator, tol: float = 1e-12) -> bool:
    cut = tol * _scale(g)
    traces = [abs(np.trace(g.H))] + [abs(np.trace(v)) for v in g.jumps]
    return max(traces) <= cut


def canonicalize(g: GkslGenerator) -> GkslGenerator:
    """Equivalent generator with traceless ``H`` and traceless jumps.

    Scalar shifts ``V_j = V'_j + alpha_j I`` are absorbed into the Hamiltonian
    as ``(alpha_j V'_j^dag - conj(alpha_j) V'_j) / 2i``.
    """
    d = g.dim
    eye = np.eye(d)
    h = g.H.copy()
    new_jumps = []
    for v in g.jumps:
        alpha = np.trace(v) / d
        vp = v - alpha * eye
        h = h + (alpha * dag(vp) - np.conj(alpha) * vp) / 2j
        new_jumps.append(vp)
    h = (h + dag(h)) / 2
    h = h - np.trace(h).real / d * eye
    return GkslGenerator(h, np.asarray(new_jumps).reshape(-1, d, d))


def unitary_with_first_row(c: np.ndarray) -> np.ndarray:
    """Unitary whose first row is the unit vector ``c``.

    The remaining rows come from Gram-Schmidt on the standard basis against
    ``c``, in index order, so the completion is deterministic.
    """
    c = np.asarray(c, dtype=complex)
    n = c.size
    rows = [c / np.linalg.norm(c)]
    for k in range(n):
        if len(rows) == n:
            break
        e = np.zeros(n, dtype=complex)
        e[k] = 1.0
        for _ in range(2):
            for r in rows:
                # Orthogonality of rows: sum_j r_j conj(e_j) = 0.
                e = e - np.vdot(r, e) * r
        nrm = np.linalg.norm(e)
        if nrm > 1e-8:
            rows.append(e / nrm)
    return np.asarray(rows)


def reduce_jumps(g: GkslGenerator, tol: float = 1e-10) -> GkslGenerator:
    """Remove linear dependencies among traceless jump operators.

    While the Hilbert-Schmidt Gram matrix of the jumps has an eigenvalue
    below ``tol`` times its largest, take a unit null vector ``c``, rotate
    the jumps by a unitary with first row ``c`` and drop the first (null)
    operator. The generator is unchanged because the dissipator is invariant
    under unitary mixing of the jumps.
    """
    if not is_canonical(g):
        raise NonCanonical("reduce_jumps requires traceless H and jumps")
    jumps = g.jumps
    d = g.dim
    while jumps.shape[0] > 0:
        flat = jumps.reshape(jumps.shape[0], -1)
        gram = flat.conj() @ flat.T
        w, v = eigh_sorted(gram)
        if w[0] <= _NEGLIGIBLE_GRAM:
            jumps = jumps[:0]
            break
        if w[-1] >= tol * w[0]:
            break
        # gram @ c = 0 implies sum_j c_j W_j = 0.
        u = unitary_with_first_row(v[:, -1])
        jumps = np.einsum("kj,jab->kab", u, jumps)[1:]
    return GkslGenerator(g.H, jumps.reshape(-1, d, d))


def trace_identity_check(g: GkslGenerator) -> tuple[float, float]:
    """``(tr L, -d sum_j ||V_j||_2^2)`` for a canonical generator."""
    if not is_canonical(g):
        raise NonCanonical("trace identity requires traceless jumps")
    tr = super_trace(build_super(g))
    lhs = tr.real
    rhs = -g.dim * float(sum(hs_norm(v) ** 2 for v in g.jumps))
    if abs(tr.imag) > 1e-12 * (1 + abs(rhs)):
        raise ValueError(f"superoperator trace has imaginary part {tr.imag:.3e}")
    return lhs, rhs


def generator_distance(g1: GkslGenerator, g2: GkslGenerator) -> float:
    if g1.dim != g2.dim:
        raise DimensionMismatch(f"dimension mismatch: {g1.dim} vs {g2.dim}")
    return float(np.linalg.norm(build_super(g1) - build_super(g2)))
