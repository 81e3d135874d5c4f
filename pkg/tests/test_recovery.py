import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chanlab.channels import KrausChannel, apply_map, random_channel, unitary_channel
from chanlab.entropy import BITS, SupportError, relative_entropy
from chanlab.operators import trace_norm
from chanlab.recovery import (
    GridMassError,
    beta0,
    erasure_example,
    make_grid,
    petz_map,
    random_code_state,
    recoverability_gap,
    recovery_report,
    universal_recovery,
)
from chanlab.sampling import random_unitary
from chanlab.states import make_density, random_density

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def half_tanh(t):
    """Antiderivative of the recovery weight."""
    return 0.5 * math.tanh(math.pi * t / 2)


def test_beta0_is_derivative_of_half_tanh():
    h = 1e-5
    for t in (-3.0, -0.4, 0.0, 0.7, 2.5):
        numeric = (half_tanh(t + h) - half_tanh(t - h)) / (2 * h)
        assert beta0(t) == pytest.approx(numeric, rel=1e-8)


def test_default_grid_mass():
    grid = make_grid()
    exact = half_tanh(grid.half_width) - half_tanh(-grid.half_width)
    assert abs(grid.mass() - exact) <= 1e-6
    assert abs(grid.mass() - 1) <= 1e-6
    assert grid.tail_mass() <= 1e-15


def test_grid_layout_and_refinement():
    grid = make_grid(10, 3, 4.0)
    assert grid.size == 30
    assert grid.nodes.min() > -4 and grid.nodes.max() < 4
    assert grid.weights.sum() == pytest.approx(8.0)
    assert grid.refined().size == 60
    assert set(grid.to_json()) == {"nodes", "half_width"}


def test_coarse_grid_is_rejected():
    with pytest.raises(GridMassError):
        universal_recovery(random_density(2, 2, 0), random_channel(2, 2, 2, 0), grid=make_grid(3, 1, 1.0))


def test_petz_undoes_unitary_channel():
    u = random_unitary(3, 40)
    sigma = random_density(3, 3, 41)
    p = petz_map(sigma, unitary_channel(u))
    for s in range(3):
        rho = random_density(3, 3, s)
        out = p.apply_matrix(u @ rho.matrix @ u.conj().T)
        assert np.max(np.abs(out - rho.matrix)) <= 1e-9


def test_petz_fixes_reference_state():
    rng = np.random.default_rng(13)
    sigma = random_density(3, 3, rng)
    ch = random_channel(3, 2, 3, rng)
    p = petz_map(sigma, ch)
    assert trace_norm(p.apply_matrix(apply_map(ch, sigma.matrix)) - sigma.matrix) <= 1e-9


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_petz_map_is_a_channel(seed, d_in, d_out):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(-(-d_in // d_out), d_in * d_out + 1))
    ch = random_channel(d_in, d_out, n, rng)
    p = petz_map(random_density(d_in, d_in, rng), ch)
    assert p.channel.completeness_residual() <= 1e-8
    assert p.channel.n_kraus <= d_in * d_out


def test_petz_rejects_inputs_outside_support():
    # erasure to a fixed state: N(sigma) is rank one
    reset = KrausChannel([np.outer([1, 0], [1, 0]), np.outer([1, 0], [0, 1])])
    p = petz_map(random_density(2, 2, 0), reset)
    with pytest.raises(SupportError):
        p(make_density(np.diag([0.0, 1.0])))


def test_gap_examples():
    rng = np.random.default_rng(14)
    rho, sigma = random_density(2, 2, rng), random_density(2, 2, rng)
    assert abs(recoverability_gap(unitary_channel(random_unitary(2, rng)), rho, sigma)) <= 1e-10
    mixing = KrausChannel([np.outer(np.eye(2)[i], np.eye(2)[j]) / np.sqrt(2)
                           for i in range(2) for j in range(2)])
    assert recoverability_gap(mixing, rho, sigma) == pytest.approx(relative_entropy(rho, sigma), abs=1e-10)
    assert relative_entropy(rho, sigma) > 0


def test_universal_recovery_inverts_unitary():
    u = random_unitary(2, 15)
    rec = universal_recovery(random_density(2, 2, 16), unitary_channel(u))
    rho = random_density(2, 2, 17).matrix
    assert np.max(np.abs(rec.apply_matrix(u @ rho @ u.conj().T) - rho)) <= 1e-6


def test_universal_recovery_materialized_channel_agrees():
    rng = np.random.default_rng(18)
    ch = random_channel(2, 3, 2, rng)
    rec = universal_recovery(random_density(2, 2, rng), ch)
    assert rec.materializable
    y = random_density(3, 3, rng).matrix
    assert np.max(np.abs(apply_map(rec.channel, y) - rec.apply_matrix(y))) <= 1e-10
    assert rec.channel.completeness_residual() <= 1e-8
    x = random_density(2, 2, rng).matrix
    assert np.max(np.abs(apply_map(rec.adjoint_map(), x) - rec.adjoint_matrix(x))) <= 1e-10


def test_report_for_random_qubit_channel():
    rng = np.random.default_rng(17)
    ch = random_channel(2, 2, 2, rng)
    rep = recovery_report(ch, random_density(2, 2, rng), make_density(np.eye(2) / 2))
    assert rep.bound_slack >= -1e-6 and rep.bound_passed and rep.fvdg_passed
    keys = {"gap", "fidelity", "bound_slack", "l1_residual", "fvdg_bound", "fvdg_passed",
            "bound_passed", "base", "grid"}
    assert set(json.loads(json.dumps(rep.to_json()))) == keys


def test_report_in_exact_recovery_setting():
    ex = erasure_example()
    rep = recovery_report(ex.channel, random_code_state(2, 3), ex.sigma)
    assert rep.recovery_fidelity == pytest.approx(1, abs=1e-9)
    assert abs(rep.gap) <= 1e-8 and abs(rep.bound_slack) <= 1e-6


def test_report_on_lossy_channel():
    # trace out the second of two qubits; inputs differ only there
    ch = KrausChannel([np.kron(np.eye(2), np.eye(2)[j][None, :]) for j in range(2)])
    rho = make_density(np.kron(np.eye(2) / 2, np.diag([0.9, 0.1])))
    sigma = make_density(np.kron(np.eye(2) / 2, np.diag([0.1, 0.9])))
    rep = recovery_report(ch, rho, sigma)
    assert rep.gap > 0.1
    assert rep.recovery_fidelity < 1 - 1e-3
    assert rep.bound_passed and rep.fvdg_passed


def test_report_bases_agree():
    rng = np.random.default_rng(19)
    ch = random_channel(2, 2, 3, rng)
    rho, sigma = random_density(2, 2, rng), random_density(2, 2, rng)
    nats, bits = recovery_report(ch, rho, sigma), recovery_report(ch, rho, sigma, cfg=BITS)
    assert bits.gap == pytest.approx(nats.gap / math.log(2), abs=1e-12)
    assert bits.bound_slack == pytest.approx(nats.bound_slack / math.log(2), abs=1e-10)
    assert bits.trace_distance_residual == pytest.approx(nats.trace_distance_residual, abs=1e-12)


@given(seeds)
def test_universal_bound_holds(seed):
    rng = np.random.default_rng(seed)
    d_in, d_out = (int(x) for x in rng.integers(1, 4, size=2))
    n = int(rng.integers(-(-d_in // d_out), d_in * d_out + 1))
    ch = random_channel(d_in, d_out, n, rng)
    rep = recovery_report(ch, random_density(d_in, d_in, rng), random_density(d_in, d_in, rng))
    assert rep.bound_passed and rep.fvdg_passed


def test_erasure_example_defaults():
    ex = erasure_example(d_code=2, d2=2, d3=0, d_abar=2)
    assert ex.max_residual <= 1e-8
    assert ex.chi_trace == pytest.approx(1, abs=1e-12)
    assert ex.dims["d_A"] == 4


def test_erasure_output_is_product_form():
    ex = erasure_example(seed=3)
    chi_2 = ex.chi @ ex.chi.conj().T
    rho = random_code_state(2, 4).matrix
    np.testing.assert_allclose(apply_map(ex.channel, rho), np.kron(rho, chi_2), atol=1e-14)


@pytest.mark.parametrize("shape", [(3, 2, 0, 2), (2, 3, 1, 1), (2, 1, 2, 3)])
def test_erasure_example_other_dimensions(shape):
    d_code, d2, d3, d_abar = shape
    ex = erasure_example(d_code=d_code, d2=d2, d3=d3, d_abar=d_abar, seed=1)
    assert ex.max_residual <= 1e-8


def test_erasure_random_code_states_and_gap():
    ex = erasure_example()
    rng = np.random.default_rng(20)
    for _ in range(20):
        rho = random_code_state(2, rng)
        assert trace_norm(ex.petz(apply_map_density(ex, rho)).matrix - rho.matrix) <= 1e-8
        sigma = random_density(2, 2, rng)
        assert abs(recoverability_gap(ex.channel, rho, sigma)) <= 1e-8


def apply_map_density(ex, rho):
    return make_density(apply_map(ex.channel, rho.matrix))


def test_erasure_example_validation():
    with pytest.raises(ValueError):
        erasure_example(d_code=2, d1=3)
    with pytest.raises(ValueError):
        erasure_example(sigma_spectrum=[1.0, 0.0])


@pytest.mark.slow
def test_refined_grid_changes_outputs_little():
    rng = np.random.default_rng(22)
    ch = random_channel(2, 2, 3, rng)
    sigma = random_density(2, 2, rng)
    coarse = universal_recovery(sigma, ch)
    fine = universal_recovery(sigma, ch, grid=coarse.grid.refined(2))
    for _ in range(5):
        y = apply_map(ch, random_density(2, 2, rng).matrix)
        assert np.max(np.abs(coarse.apply_matrix(y) - fine.apply_matrix(y))) <= 1e-6
