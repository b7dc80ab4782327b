import numpy as np
import pytest

from vartn.lib import errors, gaussian


def test_vacuum_is_pure():
    state = gaussian.CovarianceState(2, np.eye(4) / 2)
    assert state.is_pure()
    assert np.allclose(gaussian.symplectic_eigenvalues(state.V), [0.5, 0.5])


def test_state_rejects_wrong_shape():
    with pytest.raises(errors.ShapeMismatch):
        gaussian.CovarianceState(2, np.eye(3))


def test_state_rejects_asymmetric_matrix():
    V = np.eye(2) / 2
    V[0, 1] = 0.1
    with pytest.raises(errors.IntegrityError):
        gaussian.CovarianceState(1, V)


def test_validate_rejects_unphysical_covariance():
    with pytest.raises(errors.IntegrityError):
        gaussian.CovarianceState(1, np.eye(2) / 4).validate()


def test_williamson_thermal():
    state = gaussian.thermal_covariance([0.0, 1.5])
    result = gaussian.williamson(state.V)
    assert np.allclose(result.nu, [0.5, 2.0])
    assert np.allclose(result.reconstruct(), state.V, atol=1e-12)


def test_williamson_reconstructs_random_mixed_state():
    state = gaussian.apply_loss(gaussian.random_pure_covariance(3, 0.8, seed=4), 0.7)
    result = gaussian.williamson(state.V)
    omega = gaussian.symplectic_form(3)
    assert np.allclose(result.S @ omega @ result.S.T, omega, atol=1e-10)
    assert np.allclose(result.reconstruct(), state.V, atol=1e-10)
    assert np.all(np.diff(result.nu) >= 0)


def test_williamson_fixes_column_signs():
    result = gaussian.williamson(gaussian.random_pure_covariance(2, 0.5, seed=9).V)
    for k in range(2):
        column = result.S[:, k]
        assert column[np.abs(column) > 1e-12][0] > 0


def test_williamson_rejects_singular_matrix():
    with pytest.raises(errors.NonPositiveDefinite):
        gaussian.williamson(np.diag([1.0, 0.0]))


def test_random_pure_covariance_is_pure_and_reproducible():
    a = gaussian.random_pure_covariance(4, 0.6, seed=11)
    b = gaussian.random_pure_covariance(4, 0.6, seed=11)
    assert a.is_pure()
    assert np.array_equal(a.V, b.V)


def test_single_mode_squeezed_vacuum():
    state = gaussian.random_pure_covariance(
        1, 0.0, seed=0, squeezing=[0.3], interferometer=np.eye(1)
    )
    assert np.allclose(np.diag(state.V), [np.exp(-0.6) / 2, np.exp(0.6) / 2])


def test_two_mode_squeezed_marginals_are_thermal():
    r = 0.4
    state = gaussian.two_mode_squeezed_covariance(r)
    assert state.is_pure()
    assert gaussian.mean_photon(state, 0) == pytest.approx(np.sinh(r) ** 2, abs=1e-12)


def test_apply_loss_rejects_bad_transmissivity():
    with pytest.raises(errors.ConfigError):
        gaussian.apply_loss(gaussian.thermal_covariance([0.0]), 1.5)


def test_photon_number_stats_of_thermal_state():
    mean, sigma = gaussian.photon_number_stats(gaussian.thermal_covariance([2.0]))
    assert mean == pytest.approx(2.0)
    assert sigma == pytest.approx(np.sqrt(2.0 * 3.0))


def test_split_noise_reassembles_mixed_state():
    state = gaussian.apply_loss(gaussian.random_pure_covariance(2, 0.5, seed=3), 0.8)
    split = gaussian.split_noise(state.V)
    assert split.Q.is_pure()
    assert np.allclose(split.Q.V + split.C, state.V, atol=1e-12)
    assert np.linalg.eigvalsh(split.C).min() > -1e-12


def test_split_noise_of_pure_state_has_no_noise():
    state = gaussian.random_pure_covariance(2, 0.5, seed=5)
    assert np.allclose(gaussian.split_noise(state.V).C, 0.0, atol=1e-10)


def test_covariance_file_round_trip(tmp_path):
    state = gaussian.CovarianceState(1, np.eye(2) / 2, [0.1, -0.2])
    path = str(tmp_path / "cov.json")
    gaussian.dump_covariance(state, path)
    loaded = gaussian.load_covariance(path)
    assert np.allclose(loaded.V, state.V)
    assert np.allclose(loaded.mean, state.mean)


def test_load_covariance_missing_keys(tmp_path):
    path = tmp_path / "cov.json"
    path.write_text('{"n_modes": 1}')
    with pytest.raises(errors.ConfigError):
        gaussian.load_covariance(str(path))
