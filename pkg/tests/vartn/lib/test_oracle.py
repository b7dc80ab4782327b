import numpy as np
import pytest

from vartn.lib import errors, gaussian, mpo, oracle


def _vacuum(n, kappa=0.0):
    return mpo.HamiltonianSpec(gaussian.CovarianceState(n, np.eye(2 * n) / 2), kappa=kappa)


def _fidelity(a, b):
    return abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2 / (a.norm**2 * b.norm**2)


def test_vacuum_ground_state():
    energy, ground = oracle.dense_ground(oracle.dense_hamiltonian(_vacuum(2), 4))
    assert energy == pytest.approx(0.0, abs=1e-12)
    assert abs(ground.tensor()[0, 0]) == pytest.approx(1.0)


def test_vacuum_spectrum_is_harmonic():
    spectrum = oracle.sorted_spectrum(oracle.dense_hamiltonian(_vacuum(1), 4))
    assert np.allclose(spectrum, [0, 1, 2, 3], atol=1e-12)


def test_dense_hamiltonian_is_hermitian():
    state = gaussian.random_pure_covariance(2, 0.5, seed=7)
    spec = mpo.HamiltonianSpec(state, kappa=0.2)
    assert oracle.dense_hamiltonian(spec, 4).hermiticity_residual() < 1e-12


def test_dense_hamiltonian_respects_cap():
    with pytest.raises(errors.ResourceLimit):
        oracle.dense_hamiltonian(_vacuum(2), 10, cap=50)


def test_squeezed_ground_state_matches_circuit():
    r, D = 0.3, 16
    state = gaussian.random_pure_covariance(1, 0.0, 0, squeezing=[r], interferometer=np.eye(1))
    _, ground = oracle.dense_ground(oracle.dense_hamiltonian(mpo.HamiltonianSpec(state), D))
    circuit = oracle.dense_circuit([("squeeze", (r, 0.0), [0])], 1, D)
    assert _fidelity(ground, circuit) > 1 - 1e-8


def test_displaced_ground_state_matches_circuit():
    alpha, D = 0.3 + 0.1j, 14
    mean = np.sqrt(2) * np.array([alpha.real, alpha.imag])
    spec = mpo.HamiltonianSpec(gaussian.CovarianceState(1, np.eye(2) / 2, mean))
    _, ground = oracle.dense_ground(oracle.dense_hamiltonian(spec, D))
    circuit = oracle.dense_circuit([("displacement", (alpha.real, alpha.imag), [0])], 1, D)
    assert _fidelity(ground, circuit) > 1 - 1e-8


def test_two_mode_squeezed_support_is_diagonal():
    spec = mpo.HamiltonianSpec(gaussian.two_mode_squeezed_covariance(0.3))
    _, ground = oracle.dense_ground(oracle.dense_hamiltonian(spec, 6))
    probs = ground.probabilities()
    assert probs.sum() - np.trace(probs) < 1e-10


def test_global_cz_ground_state_matches_circuit():
    kappa, D = 0.2, 10
    _, ground = oracle.dense_ground(oracle.dense_hamiltonian(_vacuum(2, kappa), D))
    circuit = oracle.dense_circuit([("cz", (kappa,), [0, 1])], 2, D)
    assert _fidelity(ground, circuit) > 1 - 1e-4


def test_beamsplitter_circuit_preserves_norm():
    ops = [("squeeze", (0.2, 0.0), [0]), ("beamsplitter", (0.5, 0.3), [0, 1])]
    state = oracle.dense_circuit(ops, 2, 10)
    assert state.norm == pytest.approx(1.0, abs=1e-6)


def test_dense_circuit_rejects_unknown_operation():
    with pytest.raises(ValueError):
        oracle.dense_circuit([("teleport", (), [0])], 1, 4)


def test_interlacing_on_random_instance():
    state = gaussian.random_pure_covariance(2, 0.4, seed=12)
    assert oracle.interlacing_residual(mpo.HamiltonianSpec(state), 4, 5) <= 1e-10


def test_dense_expectation_of_ground_state():
    op = oracle.dense_hamiltonian(mpo.HamiltonianSpec(gaussian.random_pure_covariance(2, 0.3, 1)), 5)
    energy, ground = oracle.dense_ground(op)
    assert oracle.dense_expectation(op, ground) == pytest.approx(energy, abs=1e-10)


def test_spectral_weights_of_number_state():
    op = oracle.dense_hamiltonian(_vacuum(1), 5)
    state = oracle.DenseState((5,), np.eye(5)[1])
    weights = oracle.spectral_weights(state, op, 3)
    assert weights.harmonic
    assert weights.weights[1] == pytest.approx(1.0)
    assert weights.overflow == pytest.approx(0.0, abs=1e-12)
    assert weights.mean_energy == pytest.approx(1.0)


def test_dense_state_shape_check():
    with pytest.raises(errors.ShapeMismatch):
        oracle.DenseState((2, 2), np.ones(3))


def test_purification_reduces_to_thermal_state():
    state = gaussian.thermal_covariance([0.5])
    pure = oracle.purified_covariance(state)
    assert pure.is_pure()
    assert np.allclose(gaussian.reduced_covariance(pure, 0), state.V, atol=1e-12)


def test_mixed_photon_distribution_of_thermal_state():
    nbar, D = 0.5, 10
    probs = oracle.mixed_photon_distribution(gaussian.thermal_covariance([nbar]), D)
    n = np.arange(D)
    expected = nbar**n / (nbar + 1) ** (n + 1)
    assert np.allclose(probs, expected, atol=1e-7)
    assert probs[-1] == pytest.approx(expected[-1], rel=1e-2)
    assert 1 - probs.sum() == pytest.approx((nbar / (nbar + 1)) ** D, rel=1e-2)
