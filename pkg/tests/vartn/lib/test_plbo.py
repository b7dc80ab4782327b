from unittest.mock import patch

import numpy as np
import pytest

from vartn.lib import dmrg, errors, gaussian, mpo, mps, plbo
from vartn.lib.fock import BasisParams


def _squeezed_spec(kappa=0.0):
    state = gaussian.random_pure_covariance(2, 0.0, 0, squeezing=[0.6, 0.4], interferometer=np.eye(2))
    return mpo.HamiltonianSpec(state, kappa=kappa)


def _small_config(**kwargs):
    settings = dict(
        local_dim=4,
        steps_per_site=3,
        sweeps=1,
        warmup_chi=2,
        final_chi=4,
        dmrg=dmrg.DmrgOptions(sweeps=6),
    )
    settings.update(kwargs)
    return plbo.PlboConfig(**settings)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"fd_step": 0.0},
        {"fd_step": 0.1},
        {"moment_decays": (0.9, 1.0)},
        {"learn_rate": -1.0},
        {"steps_per_site": -1},
        {"backtracks": -1},
        {"local_dim": 1},
        {"warmup_chi": 0},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(errors.ConfigError):
        plbo.PlboConfig(**kwargs)


def test_site_gradient_of_quadratic_is_exact():
    center = np.linspace(-0.3, 0.4, len(BasisParams.names()))

    def energy(params):
        return float(np.sum((params.as_array() - center) ** 2))

    params = BasisParams.from_array(np.zeros(center.size))
    grad, norm = plbo.site_gradient(energy, params, 1e-5)
    assert grad == pytest.approx(-2 * center, abs=1e-8)
    assert norm == pytest.approx(np.linalg.norm(2 * center), abs=1e-8)


def test_site_energy_needs_center():
    spec = _squeezed_spec()
    state = mps.MPS.random([4, 4], 2, seed=0)
    with pytest.raises(errors.IntegrityError):
        plbo.site_energy(spec, [BasisParams()] * 2, state, 1)


def test_site_energy_matches_energy_report():
    spec = _squeezed_spec()
    params = [BasisParams(r=0.2), BasisParams(theta=0.1)]
    state = mps.MPS.random([4, 4], 2, seed=3)
    expected = mps.energy_report(state, plbo.plbo_mpo(spec, params, 4)).energy
    assert plbo.site_energy(spec, params, state, 0) == pytest.approx(expected, abs=1e-10)


def test_optimize_site_never_increases_energy():
    spec = _squeezed_spec()
    params = [BasisParams(), BasisParams()]
    state = mps.MPS.random([4, 4], 2, seed=5)
    cfg = _small_config()

    before = plbo.site_energy(spec, params, state, 0)
    params[0] = plbo.optimize_site(spec, params, state, 0, cfg)
    after = plbo.site_energy(spec, params, state, 0)
    assert after <= before + 1e-12


def test_run_plbo_is_not_worse_than_fock():
    spec = _squeezed_spec()
    result = plbo.run_plbo(spec, _small_config())

    assert result.report.energy <= result.fock_energy + plbo.FALLBACK_SLACK
    assert set(result.phase_energies) == {"warmup", "learning", "final"}
    assert len(result.params) == 2
    assert len(result.effective_cutoffs) == 2
    assert result.mps.phys_dims == [4, 4]


def test_run_plbo_learns_squeezing():
    spec = _squeezed_spec()
    result = plbo.run_plbo(spec, _small_config(steps_per_site=20, sweeps=2))

    assert not result.fell_back
    assert result.report.energy < result.fock_energy
    assert any(abs(p.r) > 1e-3 for p in result.params)
    assert max(result.effective_cutoffs) > 4


@pytest.mark.parametrize("kappa", [0.3, 0.5])
def test_run_plbo_beats_fock_on_cz_vacuum(kappa):
    vacuum = gaussian.CovarianceState(3, np.eye(6) / 2)
    cfg = plbo.PlboConfig(local_dim=6, steps_per_site=10, sweeps=2, warmup_chi=6, final_chi=6)
    result = plbo.run_plbo(mpo.HamiltonianSpec(vacuum, kappa=kappa), cfg)

    assert not result.fell_back
    assert result.report.energy < result.fock_energy * (1 - 1e-2)
    assert max(result.effective_cutoffs) > cfg.local_dim


def test_optimize_site_moves_off_zero_on_cz_vacuum():
    vacuum = gaussian.CovarianceState(3, np.eye(6) / 2)
    spec = mpo.HamiltonianSpec(vacuum, kappa=0.5)
    cfg = plbo.PlboConfig(local_dim=6, steps_per_site=5)
    params = [BasisParams()] * 3
    ground = dmrg.dmrg(plbo.plbo_mpo(spec, params, 6), 6)
    state = ground.mps
    state.canonicalize(0)

    before = plbo.site_energy(spec, params, state, 0)
    learned = plbo.optimize_site(spec, params, state, 0, cfg)
    after = plbo.site_energy(spec, [learned] + params[1:], state, 0)
    assert np.any(learned.as_array() != 0)
    assert after < before


def test_fock_warmup_grows_bond_dimension():
    spec = _squeezed_spec()
    with patch("vartn.lib.plbo.dmrg", wraps=dmrg.dmrg) as spy:
        plbo.run_plbo(spec, _small_config(warmup_chi=4, steps_per_site=0))
    chis = [c.args[1] for c in spy.call_args_list]
    assert chis[:2] == [2, 4]


def test_run_plbo_on_cz_instance():
    spec = _squeezed_spec(kappa=0.2)
    result = plbo.run_plbo(spec, _small_config())
    assert np.isfinite(result.report.energy)
    assert result.report.energy <= result.fock_energy + plbo.FALLBACK_SLACK


def test_result_serializes():
    spec = _squeezed_spec()
    data = plbo.run_plbo(spec, _small_config(steps_per_site=0)).to_dict()
    assert {"energy", "fock_energy", "phase_energies", "params", "effective_cutoffs"} <= set(data)
