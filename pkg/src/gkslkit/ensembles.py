"""Seeded random instances: Haar unitaries, generators, Kraus sets."""

from __future__ import annotations

import numpy as np

from .gksl import GkslGenerator, canonicalize

__all__ = [
    "ginibre",
    "haar_unitary",
    "random_traceless_hermitian",
    "random_generator",
    "random_kraus",
    "random_unital_kraus",
]


def ginibre(rng: np.random.Generator, m: int, n: int | None = None) -> np.ndarray:
    """Complex Gaussian matrix with ``E|z|^2 = 1`` per entry."""
    n = m if n is None else n
    return (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(rng, n))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_traceless_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    a = ginibre(rng, d)
    h = (a + a.conj().T) / 2
    h -= np.trace(h).real / d * np.eye(d)
    return scale * h


def random_generator(rng: np.random.Generator, d: int, n_jumps: int | None = None,
                     h_scale: float = 1.0) -> GkslGenerator:
    """Canonical generator with GUE-like ``H`` and Gaussian traceless jumps.

    Jumps have entries of variance ``1/d``; ``n_jumps`` defaults to a uniform
    draw from ``1 .. d^2 - 1``.
    """
    if n_jumps is None:
        n_jumps = int(rng.integers(1, d * d))
    h = random_traceless_hermitian(rng, d, h_scale)
    jumps = [ginibre(rng, d) / np.sqrt(d) for _ in range(n_jumps)]
    return canonicalize(GkslGenerator(h, np.asarray(jumps).reshape(-1, d, d)))


def random_kraus(rng: np.random.Generator, d: int, n: int) -> np.ndarray:
    """Gaussian Kraus list without a completeness constraint."""
    return np.asarray([ginibre(rng, d) / np.sqrt(n * d) for _ in range(n)])


def random_unital_kraus(rng: np.random.Generator, d: int, n: int) -> np.ndarray:
    """Kraus set with ``sum_j M_j^dag M_j = I``, cut from a Haar isometry."""
    iso = haar_unitary(rng, n * d)[:, :d]
    return iso.reshape(n, d, d)
