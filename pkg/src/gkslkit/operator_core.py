"""Dense operator algebra on a fixed small Hilbert space.

Operators are plain ``complex128`` numpy arrays of shape ``(d, d)``. Nothing
here mutates its inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotPSD

__all__ = [
    "as_operator",
    "dag",
    "comm",
    "anticomm",
    "hs_inner",
    "hs_norm",
    "traceless_part",
    "herm_split",
    "psd_sqrt",
    "op_norms",
    "eigh_sorted",
    "expm",
]


def as_operator(a, dim: int | None = None) -> np.ndarray:
    """Coerce ``a`` to a finite square complex matrix, optionally of size ``dim``."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("operator has non-finite entries")
    return arr


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticomm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``tr[a^dagger b]``, antilinear in ``a``."""
    a, b = _pair(a, b)
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def traceless_part(a) -> tuple[np.ndarray, complex]:
    """Split ``a = m + alpha * I`` with ``tr m = 0``; returns ``(m, alpha)``."""
    a = as_operator(a)
    d = a.shape[0]
    alpha = complex(np.trace(a)) / d
    return a - alpha * np.eye(d), alpha


def herm_split(x) -> tuple[np.ndarray, np.ndarray]:
    """Return Hermitian ``(x_r, x_i)`` with ``x = x_r + 1j * x_i``."""
    x = as_operator(x)
    xd = dag(x)
    return (x + xd) / 2, (x - xd) / 2j


def op_norms(a) -> tuple[float, float]:
    """Uniform (largest singular value) and Hilbert-Schmidt norms of ``a``."""
    a = as_operator(a)
    return float(np.linalg.norm(a, 2)), hs_norm(a)


def _phase_fix(vecs: np.ndarray) -> np.ndarray:
    # First significant entry of each column made real and positive.
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-8)
        if idx.size:
            z = col[idx[0]]
            out[:, k] = col * (abs(z) / z)
    return out


def eigh_sorted(a: np.ndarray, tie_tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic Hermitian eigendecomposition.

    Eigenvalues come out in descending order. Each eigenvector is phase-fixed
    so that its first significant entry is real positive. Eigenvalues within
    ``tie_tol`` (relative to the spectral radius) of each other form a tie
    group, ordered by descending lexicographic comparison of the eigenvector
    entries as ``(re, im)`` pairs.
    """
    a = np.asarray(a, dtype=complex)
    w, v = np.linalg.eigh((a + dag(a)) / 2)
    w = w[::-1]
    v = _phase_fix(v[:, ::-1])
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    order: list[int] = []
    i = 0
    n = w.size
    while i < n:
        j = i + 1
        while j < n and w[i] - w[j] <= tie_tol * scale:
            j += 1
        group = list(range(i, j))
        if len(group) > 1:
            def key(k):
                col = np.round(v[:, k], 12)
                return tuple(x for z in col for x in (-z.real, -z.imag))
            group.sort(key=key)
        order.extend(group)
        i = j
    order = np.asarray(order, dtype=int)
    return w[order], v[:, order]


def psd_sqrt(a, tol: float = 1e-10) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-tol * ||a||_inf, 0)`` are treated as rounding and
    clipped to zero; anything more negative raises :class:`NotPSD`.
    """
    a = as_operator(a)
    w, v = np.linalg.eigh((a + dag(a)) / 2)
    cut = tol * (float(np.max(np.abs(w))) if w.size else 0.0)
    if w.size and w.min() < -cut:
        raise NotPSD(f"matrix has eigenvalue {w.min():.3e} below -{cut:.3e}")
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ dag(v)


# Pade coefficients and 1-norm thresholds (Higham 2005, double precision).
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def _pade_uv(a: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE[m]
    ident = np.eye(a.shape[0], dtype=a.dtype)
    a2 = a @ a
    if m == 13:
        a4 = a2 @ a2
        a6 = a4 @ a2
        u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
                 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
             + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
        return u, v
    powers = [ident, a2]
    while len(powers) < (m + 1) // 2:
        powers.append(powers[-1] @ a2)
    u = a @ sum(b[2 * k + 1] * p for k, p in enumerate(powers))
    v = sum(b[2 * k] * p for k, p in enumerate(powers))
    return u, v


def expm(a) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a diagonal Pade core.

    Degree selection follows Higham's 2005 thresholds on the 1-norm, so the
    backward error is at double-precision unit roundoff.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    norm1 = float(np.linalg.norm(a, 1)) if a.size else 0.0
    if norm1 == 0.0:
        return np.eye(a.shape[0], dtype=complex)
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            u, v = _pade_uv(a, m)
            return np.linalg.solve(v - u, v + u)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13]))))
    u, v = _pade_uv(a / 2.0**s, 13)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r
