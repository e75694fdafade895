"""Hypervector algebras.

Two algebras live here:

* MAP (multiply-add-permute) over integer vectors. Codebook entries are
  drawn from {-1, +1}; bundles are raw integer sums and are never
  thresholded, so every MAP identity holds exactly.
* The unitary / circular-convolution algebra used by spatial semantic
  pointers. A unitary vector has a flat magnitude spectrum; DC and Nyquist
  are pinned to +1 so that fractional powers stay real.

Vectors are plain 1-D numpy arrays. All randomness goes through
``numpy.random.Generator`` backed by PCG64 (see :func:`make_rng`).
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

DEFAULT_DIM = 10_000

# Sub-stream ids passed to make_rng so that each consumer of a run seed
# draws from its own independent sequence.
STREAM_MAP_CODEBOOK = 1
STREAM_SSP_CODEBOOK = 2
STREAM_SSP_BASIS = 3
STREAM_RESERVOIR = 4
STREAM_SPLIT = 5
STREAM_SGD = 6

UNITARY_ATOL = 1e-6


class DimensionError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for ``seed``.

    Extra ``stream`` integers select an independent sub-stream, e.g.
    ``make_rng(seed, 1)`` for the split and ``make_rng(seed, 2)`` for the
    codebook, so that consumers never shift each other's draws.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    entropy = [int(seed), *map(int, stream)] if stream else int(seed)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


# --------------------------------------------------------------------------
# MAP algebra
# --------------------------------------------------------------------------

def sample_map(rng: np.random.Generator, d: int = DEFAULT_DIM) -> np.ndarray:
    """Random bipolar hypervector, each entry +1 or -1 with probability 1/2."""
    if d < 2:
        raise DimensionError(f"dimension must be >= 2, got {d}")
    return rng.integers(0, 2, size=d, dtype=np.int64) * 2 - 1


def bind_map(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    _check_same_dim(a, b)
    return a * b


def bundle(vs: Sequence[np.ndarray]) -> np.ndarray:
    """Component-wise sum without thresholding."""
    if len(vs) == 0:
        raise ValueError("cannot bundle an empty list")
    first = np.asarray(vs[0])
    for v in vs[1:]:
        _check_same_dim(first, np.asarray(v))
    return np.sum(np.stack([np.asarray(v) for v in vs]), axis=0)


def permute(a: np.ndarray, k: int) -> np.ndarray:
    """Right cyclic shift: ``out[i] = a[(i - k) % D]``."""
    return np.roll(np.asarray(a), int(k))


# --------------------------------------------------------------------------
# Unitary / circular-convolution algebra
# --------------------------------------------------------------------------

def unit_impulse(d: int) -> np.ndarray:
    e = np.zeros(d)
    e[0] = 1.0
    return e


def sample_unitary(rng: np.random.Generator, d: int = DEFAULT_DIM) -> np.ndarray:
    """Random real vector with unit-magnitude DFT coefficients.

    The d/2 - 1 free coefficients get independent uniform phases; DC and
    Nyquist are +1. Under numpy's 1/D inverse-DFT convention the result
    has unit Euclidean norm.
    """
    if d < 4 or d % 2:
        raise DimensionError(f"unitary vectors need an even dimension >= 4, got {d}")
    phases = rng.uniform(-np.pi, np.pi, size=d // 2 - 1)
    coeffs = np.ones(d // 2 + 1, dtype=complex)
    coeffs[1:-1] = np.exp(1j * phases)
    return np.fft.irfft(coeffs, n=d)


def spectrum(a: np.ndarray) -> np.ndarray:
    """Half spectrum (``rfft``) of a real vector."""
    return np.fft.rfft(np.asarray(a, dtype=float))


def is_unitary(a: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    return bool(np.all(np.abs(np.abs(spectrum(a)) - 1.0) <= atol))


def _check_unitary(a: np.ndarray) -> np.ndarray:
    f = spectrum(a)
    dev = np.max(np.abs(np.abs(f) - 1.0))
    if dev > UNITARY_ATOL:
        raise NotUnitaryError(f"spectrum magnitude deviates from 1 by {dev:.3g}")
    return f


def circ_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Circular convolution ``out[n] = sum_k a[k] b[(n - k) % D]`` via the DFT."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    _check_same_dim(a, b)
    return np.fft.irfft(np.fft.rfft(a) * np.fft.rfft(b), n=a.shape[-1])


def frac_power(a: np.ndarray, e: float) -> np.ndarray:
    """Raise a unitary vector to a real power by scaling its spectral phases.

    Phases are taken on the principal branch (-pi, pi] and multiplied by
    ``e`` before exponentiating, so ``frac_power(a, x) (*) frac_power(a, y)``
    equals ``frac_power(a, x + y)`` without any branch-cut wrapping.
    """
    f = _check_unitary(a)
    return np.fft.irfft(np.exp(1j * e * np.angle(f)), n=len(a))


def invert(a: np.ndarray) -> np.ndarray:
    """Exact inverse of a unitary vector under circular convolution."""
    f = _check_unitary(a)
    return np.fft.irfft(np.conj(f), n=len(a))


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    _check_same_dim(a, b)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("cosine similarity undefined for a zero vector")
    return float(np.dot(a, b) / (na * nb))
