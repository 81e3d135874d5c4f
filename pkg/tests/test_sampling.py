import numpy as np
import pytest
from hypothesis import given, strategies as st

from chanlab.sampling import (
    random_hermitian,
    random_isometry,
    random_kraus,
    random_unitary,
    rng_from,
    substream,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_rng_requires_explicit_seed():
    with pytest.raises((TypeError, ValueError)):
        rng_from(None)
    g = np.random.default_rng(1)
    assert rng_from(g) is g


def test_substreams_are_reproducible_and_distinct():
    a = substream(7, 0).random(4)
    np.testing.assert_array_equal(a, substream(7, 0).random(4))
    assert not np.array_equal(a, substream(7, 1).random(4))
    assert not np.array_equal(a, substream(8, 0).random(4))


@given(seeds, st.integers(1, 4), st.integers(0, 3))
def test_random_isometry(seed, d_in, extra):
    v = random_isometry(d_in, d_in + extra, seed)
    assert v.shape == (d_in + extra, d_in)
    assert np.allclose(v.conj().T @ v, np.eye(d_in), atol=1e-12)


def test_isometry_needs_room():
    with pytest.raises(ValueError):
        random_isometry(3, 2, 0)


@given(seeds)
def test_unitary_and_hermitian(seed):
    u = random_unitary(3, seed)
    assert np.allclose(u @ u.conj().T, np.eye(3), atol=1e-12)
    h = random_hermitian(4, seed)
    assert np.allclose(h, h.conj().T)


@given(seeds)
def test_random_kraus_is_complete(seed):
    ks = random_kraus(2, 3, 2, seed)
    total = sum(k.conj().T @ k for k in ks)
    assert np.allclose(total, np.eye(2), atol=1e-12)


def test_haar_unitary_first_moment():
    # E|U_00|^2 = 1/d for Haar unitaries
    rng = np.random.default_rng(3)
    vals = [abs(random_unitary(3, rng)[0, 0]) ** 2 for _ in range(3000)]
    assert np.mean(vals) == pytest.approx(1 / 3, abs=0.02)
