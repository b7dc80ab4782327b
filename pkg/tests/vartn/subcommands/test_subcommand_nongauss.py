import json

import pytest

from vartn.subcommands import nongauss


@pytest.mark.asyncio
async def test_nongauss_reports_kappa(tmp_path, write_run_config):
    config = write_run_config(n_modes=2, cutoff=4, chi_max=4, kappa=0.1, oracle=True)
    out = tmp_path / "out"
    await nongauss.call({"config": config, "out": str(out), "grid_style": "plain"})

    [report] = json.loads((out / "report.json").read_text())
    assert report["kind"] == "nongauss"
    assert report["kappa"] == pytest.approx(0.1)
    assert report["energy"] == pytest.approx(report["oracle_energy"], abs=1e-7)


@pytest.mark.asyncio
async def test_nongauss_numbers_files_per_instance(tmp_path, write_run_config):
    config = write_run_config(n_modes=2, cutoff=3, chi_max=3, kappa=0.1, instances=2)
    out = tmp_path / "out"
    await nongauss.call({"config": config, "out": str(out), "grid_style": "plain"})

    assert len(json.loads((out / "report.json").read_text())) == 2
    assert (out / "amplitudes_0.csv").exists()
    assert (out / "amplitudes_1.csv").exists()
