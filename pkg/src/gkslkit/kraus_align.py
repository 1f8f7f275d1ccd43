"""Unitary alignment of Kraus sets and the closeness experiment for CP maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    as_kraus,
    choi_from_kraus,
    choi_from_super,
    is_unital,
    kraus_from_choi,
    mix_kraus,
    super_from_kraus,
)
from .errors import DimensionMismatch, NotCP
from .ensembles import random_kraus
from .fitting import loglog_slope
from .gksl import GkslGenerator
from .operator_core import dag
from .semigroup import channel_at

__all__ = [
    "AlignmentResult",
    "pad_to",
    "kraus_set_distance",
    "align",
    "kraus_map_distance",
    "unital_projection",
    "closeness_experiment",
]


@dataclass(frozen=True)
class AlignmentResult:
    mixing: np.ndarray
    aligned: np.ndarray
    distance_before: float
    distance_after: float


def pad_to(kraus, n: int) -> np.ndarray:
    """Append zero operators up to length ``n``; the map is unchanged."""
    k = as_kraus(kraus)
    if n < k.shape[0]:
        raise ValueError(f"cannot pad {k.shape[0]} operators down to {n}")
    zeros = np.zeros((n - k.shape[0],) + k.shape[1:], dtype=complex)
    return np.concatenate([k, zeros])


def kraus_set_distance(a, b) -> float:
    """``sqrt(sum_j ||a_j - b_j||_2^2)`` over equal-length sets."""
    a = as_kraus(a)
    b = as_kraus(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"Kraus sets differ in shape: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def align(reference, target) -> AlignmentResult:
    """Mix ``target`` by the unitary that brings it closest to ``reference``.

    Both sets are zero-padded to ``N = max(len_ref, len_target, d^2)``. With
    overlaps ``S_jk = tr[target_k^dag reference_j]`` and SVD ``S = W s V^dag``,
    ``U = W V^dag`` maximises ``Re tr[U^dag S]`` over all unitaries, which is
    the global minimiser of ``sum_j ||reference_j - sum_k u_jk target_k||_2^2``.
    """
    ref = as_kraus(reference)
    tgt = as_kraus(target)
    if ref.shape[1] != tgt.shape[1]:
        raise DimensionMismatch(f"dimension mismatch: {ref.shape[1]} vs {tgt.shape[1]}")
    d = ref.shape[1]
    n = max(ref.shape[0], tgt.shape[0], d * d)
    ref = pad_to(ref, n)
    tgt = pad_to(tgt, n)
    overlaps = ref.reshape(n, -1) @ tgt.reshape(n, -1).conj().T
    w, _, vh = np.linalg.svd(overlaps)
    u = w @ vh
    aligned = mix_kraus(tgt, u)
    return AlignmentResult(u, aligned, kraus_set_distance(ref, tgt), kraus_set_distance(ref, aligned))


def kraus_map_distance(k1, k2) -> float:
    s1 = super_from_kraus(k1)
    s2 = super_from_kraus(k2)
    if s1.shape != s2.shape:
        raise DimensionMismatch(f"dimension mismatch: {s1.shape} vs {s2.shape}")
    return float(np.linalg.norm(s1 - s2))


def unital_projection(choi: np.ndarray) -> np.ndarray:
    """Rescale a CP map to ``A -> Q^{-1/2} Psi(A) Q^{-1/2}`` with ``Q = Psi(I)``."""
    j = np.asarray(choi, dtype=complex)
    d = int(round(np.sqrt(j.shape[0])))
    # Psi(I) = sum_k Psi(E_kk) is the partial trace over the first factor.
    q = np.einsum("kakb->ab", j.reshape(d, d, d, d))
    w, v = np.linalg.eigh((q + dag(q)) / 2)
    if w.min() <= 0:
        raise NotCP("Psi(I) is singular; cannot restore unitality")
    q_inv_sqrt = (v / np.sqrt(w)) @ dag(v)
    t = np.kron(np.eye(d), q_inv_sqrt)
    return t @ j @ t


def _base_kraus(base, t: float) -> np.ndarray:
    if isinstance(base, GkslGenerator):
        return kraus_from_choi(choi_from_super(channel_at(base, t)))
    return as_kraus(base)


def closeness_experiment(base, epsilons, seed: int, t: float = 1.0) -> dict:
    """Aligned Kraus distance between ``Psi`` and ``(1 - eps) Psi + eps Psi_rand``.

    ``base`` is a Kraus set or a generator (then ``Psi = exp(tL)``). The
    random CP map has ``d^2`` Gaussian Kraus operators drawn from ``seed``.
    Mixing happens at the Choi level; when ``Psi`` is unital the mixture is
    projected back onto unital maps. The table rows are
    ``(eps, channel_distance, distance_before, distance_after)``, and
    ``exponent`` is the log-log slope of ``distance_after`` against ``eps``;
    ``sqrt_constant`` bounds ``distance_after / sqrt(channel_distance)``.
    """
    eps = [float(e) for e in epsilons]
    if any(e < 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be non-negative and strictly decreasing")
    ref = _base_kraus(base, t)
    d = ref.shape[1]
    unital = is_unital(ref, 1e-9)[0]
    rng = np.random.default_rng(seed)
    j_base = choi_from_kraus(ref)
    j_rand = choi_from_kraus(random_kraus(rng, d, d * d))
    if unital:
        j_rand = unital_projection(j_rand)
    reference = kraus_from_choi(j_base)
    s_base = super_from_kraus(reference)
    rows = []
    for e in eps:
        j = (1 - e) * j_base + e * j_rand
        if unital:
            j = unital_projection(j)
        target = kraus_from_choi(j)
        result = align(reference, target)
        rows.append({
            "eps": e,
            "channel_distance": float(np.linalg.norm(super_from_kraus(target) - s_base)),
            "distance_before": result.distance_before,
            "distance_after": result.distance_after,
        })
    positive = [r for r in rows if r["eps"] > 0 and r["distance_after"] > 0]
    exponent = None
    if len(positive) >= 2:
        exponent = loglog_slope([r["eps"] for r in positive], [r["distance_after"] for r in positive])
    after = [r["distance_after"] for r in rows]
    # Smallest C with distance_after <= C * sqrt(channel_distance) on this grid.
    ratios = [r["distance_after"] / np.sqrt(r["channel_distance"]) for r in rows if r["channel_distance"] > 0]
    return {
        "dim": d,
        "unital": unital,
        "seed": seed,
        "rows": rows,
        "exponent": exponent,
        "sqrt_constant": float(max(ratios)) if ratios else None,
        "strictly_decreasing": all(b < a for a, b in zip(after, after[1:])),
    }
