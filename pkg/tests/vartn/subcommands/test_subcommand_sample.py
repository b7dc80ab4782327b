import csv
import json

import pytest

from vartn.subcommands import sample


@pytest.mark.asyncio
async def test_sample_writes_samples(tmp_path, write_run_config):
    config = write_run_config(n_modes=2, cutoff=4, chi_max=4, loss=0.1, samples=10)
    out = tmp_path / "out"
    await sample.call({"config": config, "out": str(out), "grid_style": "plain"})

    [report] = json.loads((out / "report.json").read_text())
    assert report["sampling"]["count"] == 10
    with open(out / "samples.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert len(rows) == 11
    assert (out / "displacements.csv").exists()


@pytest.mark.asyncio
async def test_sample_is_reproducible(tmp_path, write_run_config):
    config = write_run_config(n_modes=2, cutoff=4, chi_max=4, loss=0.1, samples=10, seed=3)
    first, second = tmp_path / "a", tmp_path / "b"
    await sample.call({"config": config, "out": str(first), "grid_style": "plain"})
    await sample.call({"config": config, "out": str(second), "grid_style": "plain"})
    assert (first / "samples.csv").read_text() == (second / "samples.csv").read_text()
