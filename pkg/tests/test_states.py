import numpy as np
import pytest
from hypothesis import given, strategies as st

from chanlab.entropy import von_neumann_entropy
from chanlab.states import (
    HermiticityViolation,
    PositivityViolation,
    PureState,
    TraceViolation,
    basis_state,
    check_density,
    make_density,
    max_entangled,
    partial_trace,
    purify,
    random_density,
    random_pure,
    schmidt,
    tensor,
)

from conftest import ket, proj

seeds = st.integers(min_value=0, max_value=2**32 - 1)
BELL = PureState(ket(1, 0, 0, 1), (2, 2))

# Mean purity of random_density(2, 2, .) under the induced (Ginibre) measure:
# (m + n) / (m n + 1) with m = n = 2, cross-checked by direct Gaussian sampling.
MEAN_PURITY_2x2 = 0.8


def test_maximally_mixed_qubit():
    rho = make_density(np.eye(2) / 2)
    assert rho.validated
    np.testing.assert_allclose(rho.eigenvalues(), [0.5, 0.5])


def test_pure_projector_is_valid():
    rho = make_density(proj([1, 0]))
    assert rho.purity() == pytest.approx(1)


def test_trace_violation_amount():
    v = check_density(np.diag([0.6, 0.6]))
    assert v.axiom == "trace" and v.amount == pytest.approx(0.2)
    with pytest.raises(TraceViolation) as err:
        make_density(np.diag([0.6, 0.6]))
    assert err.value.violation.amount == pytest.approx(0.2)


def test_other_violations():
    with pytest.raises(HermiticityViolation):
        make_density(np.array([[0.5, 0.3], [0.0, 0.5]]))
    with pytest.raises(PositivityViolation):
        make_density(np.diag([1.5, -0.5]))


def test_tensor_products():
    mixed = make_density(np.eye(2) / 2)
    both = tensor(mixed, mixed)
    assert both.dims == (2, 2)
    np.testing.assert_allclose(both.matrix, np.eye(4) / 4)
    zero, one = make_density(proj([1, 0])), make_density(proj([0, 1]))
    np.testing.assert_allclose(tensor(zero, one).matrix, proj(basis_state((0, 1), (2, 2)).amplitudes))


def test_entropy_adds_over_tensor_products():
    rng = np.random.default_rng(3)
    a, b = random_density(2, 2, rng), random_density(3, 3, rng)
    total = von_neumann_entropy(tensor(a, b))
    assert total == pytest.approx(von_neumann_entropy(a) + von_neumann_entropy(b), abs=1e-10)


def test_partial_trace_of_product_and_bell():
    a, b = random_density(2, 2, 1), random_density(3, 2, 2)
    np.testing.assert_allclose(partial_trace(tensor(a, b), [0]).matrix, a.matrix, atol=1e-14)
    bell = BELL.density()
    for keep in ([0], [1]):
        np.testing.assert_allclose(partial_trace(bell, keep).matrix, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_matches_index_sum():
    # (rho_A)_{ij} = sum_mu rho_{i mu, j mu}
    rho = random_density((2, 3), 6, 8)
    t = rho.matrix.reshape(2, 3, 2, 3)
    by_hand = np.array([[sum(t[i, m, j, m] for m in range(3)) for j in range(2)] for i in range(2)])
    np.testing.assert_allclose(partial_trace(rho, [0]).matrix, by_hand, atol=1e-15)


def test_schmidt_of_product_and_bell():
    prod_state = PureState(np.kron(ket(1, 0), ket(1, 1)), (2, 2))
    np.testing.assert_allclose(schmidt(prod_state).coefficients, [1.0])
    np.testing.assert_allclose(schmidt(BELL).coefficients, [2**-0.5, 2**-0.5])


def test_schmidt_coefficients_match_reduced_spectrum():
    psi = random_pure((3, 4), 11)
    sd = schmidt(psi)
    w = np.sort(np.linalg.eigvalsh(partial_trace(psi.density(), [0]).matrix))[::-1]
    np.testing.assert_allclose(sd.coefficients**2, w, atol=1e-12)


def test_entanglement_entropy_equal_on_both_sides():
    rho = random_pure((3, 4), 11).density()
    sa = von_neumann_entropy(partial_trace(rho, [0]))
    sb = von_neumann_entropy(partial_trace(rho, [1]))
    assert abs(sa - sb) <= 1e-9


@given(seeds, st.sampled_from([(2, 2), (2, 3), (3, 4), (4, 2)]))
def test_schmidt_reconstruction(seed, dims):
    psi = random_pure(dims, seed)
    sd = schmidt(psi)
    assert np.max(np.abs(sd.reconstruct() - psi.amplitudes)) <= 1e-9
    assert np.sum(sd.coefficients**2) == pytest.approx(1)
    assert np.allclose(sd.left_vectors.conj().T @ sd.left_vectors, np.eye(sd.coefficients.size))


def test_max_entangled():
    np.testing.assert_allclose(max_entangled(1).amplitudes, [1])
    np.testing.assert_allclose(max_entangled(2, normalize=True).amplitudes, BELL.amplitudes)
    gamma = max_entangled(5).amplitudes
    assert np.vdot(gamma, gamma).real == pytest.approx(5)


def test_purify_pure_input():
    v = ket(1, 1j)
    psi = purify(make_density(proj(v)))
    assert psi.factor_dims == (2, 1)
    assert abs(np.vdot(v, psi.amplitudes)) == pytest.approx(1)


def test_purify_maximally_mixed_gives_bell_marginals():
    psi = purify(make_density(np.eye(2) / 2))
    for keep in ([0], [1]):
        np.testing.assert_allclose(partial_trace(psi.density(), keep).matrix, np.eye(2) / 2, atol=1e-12)


@given(seeds)
def test_purify_round_trip(seed):
    rho = random_density(4, 3, seed)
    psi = purify(rho)
    assert np.max(np.abs(partial_trace(psi.density(), [0]).matrix - rho.matrix)) <= 1e-9


def test_random_state_determinism():
    a, b = random_density(3, 2, 99), random_density(3, 2, 99)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    np.testing.assert_array_equal(random_pure(4, 5).amplitudes, random_pure(4, 5).amplitudes)


def test_rank_one_random_density_is_pure():
    rho = random_density(4, 1, 12)
    assert von_neumann_entropy(rho) <= 1e-9


def test_random_density_rank_bounds():
    with pytest.raises(ValueError):
        random_density(2, 3, 0)
    w = random_density(4, 2, 0).eigenvalues()
    assert np.sum(w > 1e-10) == 2


def test_gaussian_oracle_for_mean_purity():
    rng = np.random.default_rng(2024)
    g = rng.normal(size=(4000, 2, 2)) + 1j * rng.normal(size=(4000, 2, 2))
    r = g @ g.conj().transpose(0, 2, 1)
    r /= np.trace(r, axis1=1, axis2=2).real[:, None, None]
    purities = np.einsum("kij,kji->k", r, r).real
    assert purities.mean() == pytest.approx(MEAN_PURITY_2x2, abs=0.02)


def test_mean_purity_of_random_qubit_states():
    mean = np.mean([random_density(2, 2, s).purity() for s in range(1000)])
    assert mean == pytest.approx(MEAN_PURITY_2x2, abs=0.02)
