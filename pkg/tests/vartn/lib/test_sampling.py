import csv

import numpy as np
import pytest
from scipy import stats

from vartn.lib import errors, gaussian, mpo, mps, oracle, sampling


def _tmsv_mps(r=0.3, D=8):
    spec = mpo.HamiltonianSpec(gaussian.two_mode_squeezed_covariance(r))
    _, ground = oracle.dense_ground(oracle.dense_hamiltonian(spec, D))
    state, _ = mps.from_dense(ground.amplitudes, [D, D], D)
    return state


def test_vacuum_samples_are_zero():
    vacuum = mps.MPS.basis_state([0, 0, 0], [3, 3, 3])
    batch = sampling.noisy_sample(np.eye(6) / 2, vacuum, 20, seed=1)
    assert batch.count == 20
    assert not batch.samples.any()
    assert np.abs(batch.displacements).max() < 1e-6
    assert batch.leaked.max() < 1e-10


def test_two_mode_squeezed_samples_are_paired():
    state = _tmsv_mps()
    samples = sampling.sample_pnr(state, 200, seed=4)
    assert samples.shape == (200, 2)
    assert np.array_equal(samples[:, 0], samples[:, 1])
    assert samples.sum() > 0


def test_sampling_is_deterministic_in_seed():
    state = _tmsv_mps()
    V = gaussian.two_mode_squeezed_covariance(0.3).V
    first = sampling.noisy_sample(V, state, 50, seed=9)
    second = sampling.noisy_sample(V, state, 50, seed=9)
    other = sampling.noisy_sample(V, state, 50, seed=10)
    assert np.array_equal(first.samples, second.samples)
    assert not np.array_equal(first.samples, other.samples)


def test_explicit_zero_noise_skips_displacements():
    state = _tmsv_mps()
    batch = sampling.noisy_sample(np.eye(4), state, 10, seed=0, C=np.zeros((4, 4)))
    assert not batch.displacements.any()


def test_draw_displacements_rejects_non_psd():
    with pytest.raises(errors.NonPSD):
        sampling.draw_displacements(-np.eye(2), 5, seed=0)


def test_draw_displacements_covariance():
    C = np.array([[0.5, 0.2], [0.2, 0.3]])
    draws = sampling.draw_displacements(C, 20000, seed=2)
    assert np.cov(draws.T) == pytest.approx(C, abs=0.02)


def test_thermal_mean_photon_number():
    nbar, D = 0.3, 10
    state = gaussian.thermal_covariance([nbar])
    vacuum = mps.MPS.basis_state([0], [D])
    batch = sampling.noisy_sample(state.V, vacuum, 1000, seed=3)
    assert sampling.empirical_mean_photons(batch.samples)[0] == pytest.approx(nbar, abs=0.1)
    assert batch.leaked.max() < 1e-3


def test_leaked_weight_is_norm_loss_of_displaced_state():
    state = _tmsv_mps(D=4)
    C = np.diag([0.4, 0.4, 0.4, 0.4])
    batch = sampling.noisy_sample(np.eye(4), state, 5, seed=6, C=C)

    for d, leak in zip(batch.displacements, batch.leaked):
        displaced = mps.apply_site_matrices(state, sampling.displacement_matrices(d, state.phys_dims))
        expected = 1 - np.linalg.norm(displaced.to_dense()) ** 2 / np.linalg.norm(state.to_dense()) ** 2
        assert leak == pytest.approx(max(expected, 0.0), abs=1e-10)
    assert batch.leaked.max() > 0


def test_displacement_matrices_shapes():
    mats = sampling.displacement_matrices(np.array([0.1, 0.2, 0.0, -0.1]), [3, 5])
    assert [m.shape for m in mats] == [(3, 3), (5, 5)]


def test_csv_writers(tmp_path):
    state = _tmsv_mps()
    batch = sampling.noisy_sample(np.eye(4) / 2, state, 3, seed=0, C=np.diag([0.1, 0.1, 0.1, 0.1]))

    samples_path = tmp_path / "samples.csv"
    sampling.write_samples_csv(batch, str(samples_path))
    with open(samples_path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["seed_index", "n_1", "n_2", "leaked_weight"]
    assert len(rows) == 4

    displacements_path = tmp_path / "displacements.csv"
    sampling.write_displacements_csv(batch, str(displacements_path))
    with open(displacements_path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["seed_index", "d_1", "d_2", "d_3", "d_4"]
    assert float(rows[1][1]) == pytest.approx(batch.displacements[0, 0])


def test_pnr_sampling_follows_born_rule():
    state = _tmsv_mps(r=0.5)
    counts = np.bincount(sampling.sample_pnr(state, 100000, seed=7)[:, 0], minlength=8)[:4]
    table = dict(state.probability_table(8))
    expected = np.array([table[(n, n)] for n in range(4)])
    expected = expected / expected.sum() * counts.sum()
    assert stats.chisquare(counts, expected).pvalue > 1e-3


def test_noisy_sampling_matches_mixed_state_distribution():
    D = 8
    state = gaussian.apply_loss(
        gaussian.random_pure_covariance(1, 0.0, 0, squeezing=[0.4], interferometer=np.eye(1)), 0.7
    )
    split = gaussian.split_noise(state.V, state.mean)
    _, ground = oracle.dense_ground(oracle.dense_hamiltonian(mpo.HamiltonianSpec(split.Q), D))
    pure, _ = mps.from_dense(ground.amplitudes, [D], D)

    batch = sampling.noisy_sample(state.V, pure, 100000, seed=11, C=split.C)
    counts = np.bincount(batch.samples[:, 0], minlength=D)
    observed = np.append(counts[:4], counts[4:].sum())

    probs = oracle.mixed_photon_distribution(state, D)
    expected = np.append(probs[:4], probs[4:].sum()) * batch.count
    assert stats.chisquare(observed, expected / expected.sum() * observed.sum()).pvalue > 1e-3
