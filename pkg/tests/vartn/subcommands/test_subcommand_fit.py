import json

import pytest

from vartn.lib import errors
from vartn.subcommands import fit


@pytest.mark.asyncio
async def test_fit_from_input(tmp_path):
    pairs = tmp_path / "pairs.csv"
    pairs.write_text("x,y\n1,2\n2,16\n4,128\n")
    out = tmp_path / "out"
    await fit.call({"input": str(pairs), "config": None, "out": str(out), "grid_style": "plain"})

    result = json.loads((out / "fit.json").read_text())
    assert result["exponent"] == pytest.approx(3.0)
    assert result["prefactor"] == pytest.approx(2.0)


@pytest.mark.asyncio
async def test_fit_input_from_config(tmp_path, write_run_config):
    pairs = tmp_path / "pairs.json"
    pairs.write_text(json.dumps([[1, 1], [10, 100]]))
    config = write_run_config(fit_input=str(pairs))
    out = tmp_path / "out"
    await fit.call({"input": None, "config": config, "out": str(out), "grid_style": "plain"})
    assert json.loads((out / "fit.json").read_text())["exponent"] == pytest.approx(2.0)


@pytest.mark.asyncio
async def test_fit_without_source_exits(tmp_path):
    with pytest.raises(SystemExit) as e:
        await fit.call({"input": None, "config": None, "out": str(tmp_path), "grid_style": "plain"})
    assert e.value.code == errors.ERROR_VALIDATION
