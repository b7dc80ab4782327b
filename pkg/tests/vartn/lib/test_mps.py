import numpy as np
import pytest

from vartn.lib import errors, gaussian, mpo, mps, oracle


def _random_vector(size, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    psi = rng.normal(size=size) + 1j * rng.normal(size=size)
    return psi / np.linalg.norm(psi)


def test_basis_state_amplitude():
    state = mps.MPS.basis_state([1, 0, 2], [3, 3, 3])
    assert state.amplitude([1, 0, 2]) == pytest.approx(1.0)
    assert state.amplitude([0, 0, 0]) == pytest.approx(0.0)


def test_amplitude_checks_occupation():
    state = mps.MPS.basis_state([0, 0], [2, 2])
    with pytest.raises(errors.ShapeMismatch):
        state.amplitude([0])
    with pytest.raises(IndexError):
        state.amplitude([0, 2])


def test_random_mps_is_normalized_and_canonical():
    state = mps.MPS.random([3, 4, 3], 3, seed=1)
    assert state.center == 0
    assert state.norm() == pytest.approx(1.0)
    assert max(state.isometry_residuals()) < 1e-12
    assert state.bond_dims == [3, 3]


def test_canonicalize_preserves_state():
    state = mps.MPS.random([2, 3, 2, 3], 4, seed=2)
    before = state.to_dense()
    state.canonicalize(2)
    assert state.center == 2
    assert np.allclose(state.to_dense(), before)
    assert max(state.isometry_residuals()) < 1e-12


def test_mps_rejects_bad_bonds():
    with pytest.raises(errors.ShapeMismatch):
        mps.MPS([np.ones((1, 2, 2)), np.ones((3, 2, 1))])


def test_from_dense_is_exact_without_truncation():
    psi = _random_vector(27, seed=3)
    state, report = mps.from_dense(psi, [3, 3, 3], chi_max=9)
    assert np.allclose(state.to_dense(), psi)
    assert report.eps_chi_surrogate == pytest.approx(0.0, abs=1e-12)


def test_compression_error_bounded_by_surrogate():
    for seed in range(10):
        psi = _random_vector(64, seed)
        state, report = mps.from_dense(psi, [4, 4, 4], chi_max=2)
        error = np.linalg.norm(psi - state.to_dense()) ** 2
        assert error <= report.eps_chi_surrogate + 1e-12


def test_from_dense_checks_size():
    with pytest.raises(errors.ShapeMismatch):
        mps.from_dense(np.ones(7), [2, 2, 2], 2)


def test_compress_reports_discarded_weights():
    state = mps.MPS.random([3, 3, 3, 3], 6, seed=4)
    compressed, report = mps.compress(state, 2)
    assert max(compressed.bond_dims) <= 2
    assert len(report.discarded_weights) == 3
    assert report.eps_chi_surrogate == pytest.approx(sum(report.discarded_weights))
    assert 0.0 < mps.normalized_fidelity(state, compressed) <= 1.0 + 1e-12


def test_amplitudes_upto_enumerates_lexicographically():
    state = mps.MPS.random([3, 3], 3, seed=5)
    table = state.amplitudes_upto(1)
    assert [occ for occ, _ in table] == [(0, 0), (0, 1), (1, 0)]
    dense = state.to_dense().reshape(3, 3)
    for occ, amp in table:
        assert amp == pytest.approx(dense[occ])


def test_probability_table_normalizes():
    state = mps.MPS.random([2, 2], 2, seed=6)
    table = state.probability_table(2)
    assert sum(p for _, p in table) == pytest.approx(1.0)


def test_bond_singular_values_of_product_state():
    state = mps.MPS.product_state([np.array([1.0, 0.0]), np.array([0.6, 0.8])])
    assert np.allclose(state.bond_singular_values(1), [1.0])


def test_apply_site_matrices_keeps_bonds():
    state = mps.MPS.random([2, 2, 2], 2, seed=7)
    mats = [np.eye(4)[:, :2]] * 3
    lifted = mps.apply_site_matrices(state, mats)
    assert lifted.phys_dims == [4, 4, 4]
    assert lifted.bond_dims == state.bond_dims
    assert lifted.norm() == pytest.approx(1.0)


def test_apply_site_matrices_checks_shapes():
    state = mps.MPS.random([2, 2], 2, seed=7)
    with pytest.raises(errors.ShapeMismatch):
        mps.apply_site_matrices(state, [np.eye(3)] * 2)


def test_expectation_matches_dense():
    spec = mpo.HamiltonianSpec(gaussian.random_pure_covariance(2, 0.4, seed=8), kappa=0.2)
    H = mpo.full_hamiltonian_mpo(spec, mpo.fock_operators(spec, 4))
    state = mps.MPS.random([4, 4], 4, seed=9)
    psi = state.to_dense()
    dense = np.vdot(psi, H.to_dense() @ psi)
    assert mps.expectation(state, H) == pytest.approx(dense)


def test_energy_report_of_dense_ground_state():
    spec = mpo.HamiltonianSpec(gaussian.random_pure_covariance(2, 0.3, seed=10))
    D = 5
    H = mpo.full_hamiltonian_mpo(spec, mpo.fock_operators(spec, D))
    energy, ground = oracle.dense_ground(oracle.dense_hamiltonian(spec, D))
    state, _ = mps.from_dense(ground.amplitudes, [D, D], chi_max=D)
    report = mps.energy_report(state, H)
    assert report.energy == pytest.approx(energy, abs=1e-10)
    assert report.variance == pytest.approx(0.0, abs=1e-9)


def test_apply_mpo_respects_cap():
    spec = mpo.HamiltonianSpec(gaussian.random_pure_covariance(3, 0.3, seed=11))
    H = mpo.full_hamiltonian_mpo(spec, mpo.fock_operators(spec, 3))
    state = mps.MPS.random([3, 3, 3], 3, seed=12)
    with pytest.raises(errors.ResourceLimit):
        mps.apply_mpo(state, H, cap=2)


def test_checkpoint_round_trip(tmp_path):
    state = mps.MPS.random([2, 3, 2], 3, seed=13)
    path = str(tmp_path / "state.json")
    mps.save_checkpoint(state, path)
    loaded = mps.load_checkpoint(path)
    assert loaded.center == state.center
    assert np.array_equal(loaded.to_dense(), state.to_dense())


def test_truncated_checkpoint_is_rejected(tmp_path):
    state = mps.MPS.random([2, 2], 2, seed=14)
    path = tmp_path / "state.json"
    mps.save_checkpoint(state, str(path))
    payload = tmp_path / "state.bin"
    payload.write_bytes(payload.read_bytes()[:-8])
    with pytest.raises(errors.IntegrityError):
        mps.load_checkpoint(str(path))
