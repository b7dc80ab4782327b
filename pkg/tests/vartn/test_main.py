from unittest.mock import patch

import pytest

from vartn import __main__ as cli


@pytest.mark.asyncio
async def test_version(capsys):
    with patch("sys.argv", ["vartn", "--version"]):
        with pytest.raises(SystemExit) as e:
            await cli.run()
    assert e.value.code == 0
    assert capsys.readouterr().out.startswith("vartn v")


@pytest.mark.asyncio
async def test_missing_subcommand_prints_help():
    with patch("sys.argv", ["vartn"]):
        with pytest.raises(SystemExit) as e:
            await cli.run()
    assert e.value.code == 1


@pytest.mark.asyncio
async def test_dispatches_to_subcommand(tmp_path, monkeypatch):
    monkeypatch.setenv("VARTN_CONFIG", str(tmp_path / "dotfile"))
    pairs = tmp_path / "pairs.csv"
    pairs.write_text("1,3\n2,6\n")
    with patch("sys.argv", ["vartn", "fit", "-i", str(pairs), "-o", str(tmp_path / "out")]):
        await cli.run()
    assert (tmp_path / "out" / "fit.json").exists()
