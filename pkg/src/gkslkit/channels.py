"""Kraus, Choi and superoperator representations of maps on L(H).

Conventions used throughout the package:

* Kraus sets act in the Heisenberg picture, ``Psi(A) = sum_j M_j^dag A M_j``,
  and are stored as arrays of shape ``(N, d, d)``.
* ``vec`` stacks columns, so the superoperator of ``A -> M^dag A M`` is
  ``kron(M.T, M^dag)``.
* The Choi matrix is ``J = sum_{k,l} E_kl (x) Psi(E_kl)`` in the standard
  basis. A Kraus operator ``M`` contributes the rank-one term ``|w><w|`` with
  ``w = conj(M).ravel()``.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotCP, NotUnitary
from .operator_core import as_operator, dag, eigh_sorted

__all__ = [
    "as_kraus",
    "vec",
    "unvec",
    "identity_super",
    "apply",
    "choi_from_kraus",
    "kraus_from_choi",
    "choi_from_super",
    "super_from_choi",
    "super_from_kraus",
    "super_compose",
    "super_apply",
    "super_trace",
    "super_trace_basis",
    "choi_min_eig",
    "is_unital",
    "mix_kraus",
    "super_dim",
]


def as_kraus(ops, dim: int | None = None) -> np.ndarray:
    """Stack a sequence of operators into a ``(N, d, d)`` complex array."""
    arr = np.asarray(ops, dtype=complex)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty list of square matrices, got {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Kraus operators have non-finite entries")
    return arr


def super_dim(s: np.ndarray) -> int:
    s = np.asarray(s)
    d = int(round(np.sqrt(s.shape[0])))
    if s.ndim != 2 or s.shape[0] != s.shape[1] or d * d != s.shape[0]:
        raise DimensionMismatch(f"not a d^2 x d^2 matrix: {s.shape}")
    return d


def vec(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(d, d, order="F")


def identity_super(d: int) -> np.ndarray:
    return np.eye(d * d, dtype=complex)


def apply(kraus, a) -> np.ndarray:
    k = as_kraus(kraus)
    a = as_operator(a, k.shape[1])
    return np.einsum("jba,bc,jcd->ad", k.conj(), a, k)


def choi_from_kraus(kraus) -> np.ndarray:
    k = as_kraus(kraus)
    w = k.conj().reshape(k.shape[0], -1)
    return w.T @ w.conj()


def kraus_from_choi(choi, tol: float = 1e-10) -> np.ndarray:
    """Kraus operators from the eigendecomposition of a Choi matrix.

    Eigenvalues above ``tol * ||J||_inf`` yield ``sqrt(lam) * conj(unvec_rows(v))``
    in descending order; anything below ``-tol * ||J||_inf`` raises
    :class:`NotCP`. A map whose Choi matrix vanishes returns a single zero
    operator.
    """
    j = np.asarray(choi, dtype=complex)
    d = super_dim(j)
    w, v = eigh_sorted(j)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    cut = tol * scale
    if w[-1] < -cut:
        raise NotCP(f"Choi matrix has eigenvalue {w[-1]:.6g} < -{cut:.3e}")
    keep = w > cut
    if not np.any(keep):
        return np.zeros((1, d, d), dtype=complex)
    vecs = v[:, keep].T * np.sqrt(w[keep])[:, None]
    return vecs.conj().reshape(-1, d, d)


def _reshuffle(m: np.ndarray) -> np.ndarray:
    # Involution exchanging Choi and column-stacked superoperator layouts:
    # J[(k,m),(l,n)] = Psi(E_kl)[m,n] = S[(n,m),(l,k)] with row-major pairs.
    d = super_dim(m)
    return np.asarray(m, dtype=complex).reshape(d, d, d, d).transpose(3, 1, 2, 0).reshape(d * d, d * d)


def choi_from_super(s) -> np.ndarray:
    return _reshuffle(s)


def super_from_choi(j) -> np.ndarray:
    return _reshuffle(j)


def super_from_kraus(kraus) -> np.ndarray:
    k = as_kraus(kraus)
    return sum(np.kron(m.T, dag(m)) for m in k)


def super_compose(s1, s2) -> np.ndarray:
    """Superoperator of ``A -> s1(s2(A))``."""
    s1 = np.asarray(s1, dtype=complex)
    s2 = np.asarray(s2, dtype=complex)
    if s1.shape != s2.shape:
        raise DimensionMismatch(f"superoperator shapes differ: {s1.shape} vs {s2.shape}")
    return s1 @ s2


def super_apply(s, a) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    d = super_dim(s)
    a = as_operator(a, d)
    return unvec(s @ vec(a))


def super_trace(s) -> complex:
    return complex(np.trace(np.asarray(s, dtype=complex)))


def super_trace_basis(s) -> complex:
    """Trace as ``sum_{k,l} <e_k| Psi(|e_k><e_l|) e_l>``, computed map-wise."""
    s = np.asarray(s, dtype=complex)
    d = super_dim(s)
    total = 0j
    for k in range(d):
        for l in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[k, l] = 1.0
            total += super_apply(s, e)[k, l]
    return complex(total)


def choi_min_eig(choi) -> float:
    j = np.asarray(choi, dtype=complex)
    return float(np.linalg.eigvalsh((j + dag(j)) / 2)[0])


def is_unital(kraus, tol: float = 1e-10) -> tuple[bool, float]:
    """Completeness check ``sum_j M_j^dag M_j = I``; returns ``(ok, residual)``."""
    k = as_kraus(kraus)
    total = np.einsum("jba,jbc->ac", k.conj(), k)
    residual = float(np.linalg.norm(total - np.eye(k.shape[1])))
    return residual <= tol, residual


def mix_kraus(kraus, u, tol: float = 1e-10) -> np.ndarray:
    """Unitary gauge action ``C_j = sum_k u_jk B_k``.

    ``kraus`` is zero-padded when ``u`` is larger than the set.
    """
    k = as_kraus(kraus)
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    if u.ndim != 2 or u.shape[1] != n:
        raise DimensionMismatch(f"mixing matrix must be square, got {u.shape}")
    if n < k.shape[0]:
        raise DimensionMismatch(f"mixing matrix of size {n} is smaller than the Kraus set ({k.shape[0]})")
    residual = float(np.linalg.norm(u @ dag(u) - np.eye(n)))
    if residual > tol:
        raise NotUnitary(f"mixing matrix is not unitary (residual {residual:.3e})")
    if n > k.shape[0]:
        k = np.concatenate([k, np.zeros((n - k.shape[0],) + k.shape[1:], dtype=complex)])
    return np.einsum("jk,kab->jab", u, k)
