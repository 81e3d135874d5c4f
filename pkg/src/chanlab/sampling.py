"""Seeded samplers for unitaries, isometries, Hermitian matrices and channels.

All randomness is explicit: every function takes a seed (or a
``numpy.random.Generator``) and never touches global state.
"""

from __future__ import annotations

import numpy as np

SeedLike = int | np.random.Generator | np.random.SeedSequence | None


def rng_from(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("a seed is required; ambient randomness is not allowed")
    return np.random.default_rng(seed)


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent named sub-stream ``index`` of a master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_isometry(d_in: int, d_out: int, seed: SeedLike) -> np.ndarray:
    """Haar-distributed isometry ``d_in -> d_out`` (columns orthonormal).

    QR of a complex Ginibre matrix with the R-diagonal phases absorbed, which
    makes the distribution exactly unitarily invariant.
    """
    if d_in > d_out:
        raise ValueError(f"no isometry from dimension {d_in} into {d_out}")
    rng = rng_from(seed)
    z = complex_gaussian(rng, (d_out, d_in))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_unitary(d: int, seed: SeedLike) -> np.ndarray:
    return random_isometry(d, d, seed)


def random_hermitian(d: int, seed: SeedLike) -> np.ndarray:
    z = complex_gaussian(rng_from(seed), (d, d))
    return (z + z.conj().T) / 2


def random_kraus(d_in: int, d_out: int, n_kraus: int, seed: SeedLike) -> list[np.ndarray]:
    """Kraus operators of a random channel via a Haar isometry into out x env."""
    v = random_isometry(d_in, d_out * n_kraus, seed)
    v = v.reshape(d_out, n_kraus, d_in)
    return [v[:, j, :] for j in range(n_kraus)]
