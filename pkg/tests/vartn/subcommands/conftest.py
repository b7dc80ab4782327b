import json

import pytest


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("VARTN_CONFIG", str(tmp_path / "vartn_config"))
    monkeypatch.setenv("VARTN_THREADS", "1")


@pytest.fixture
def write_run_config(tmp_path):
    def _write(**values):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(values))
        return str(path)

    return _write
