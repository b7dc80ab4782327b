import json

import numpy as np
import pytest

from vartn.lib import errors, utils


def test_jsonable_converts_numpy_and_complex():
    data = {"a": np.arange(2), "b": np.float64(0.5), "c": 1 + 2j, "d": (np.bool_(True),), 3: np.int64(4)}
    assert utils.jsonable(data) == {
        "a": [0, 1],
        "b": 0.5,
        "c": {"re": 1.0, "im": 2.0},
        "d": [True],
        "3": 4,
    }


def test_config_hash_ignores_key_order():
    assert utils.config_hash({"a": 1, "b": 2}) == utils.config_hash({"b": 2, "a": 1})
    assert utils.config_hash({"a": 1}) != utils.config_hash({"a": 2})
    assert len(utils.config_hash({})) == 64


def test_write_json(tmp_path):
    path = tmp_path / "out.json"
    utils.write_json({"x": np.array([1.5])}, str(path))
    assert json.loads(path.read_text()) == {"x": [1.5]}


def test_ensure_dir(tmp_path):
    target = tmp_path / "a" / "b"
    assert utils.ensure_dir(str(target)) == str(target)
    assert target.is_dir()


def test_thread_count_default(monkeypatch):
    monkeypatch.delenv("VARTN_THREADS", raising=False)
    assert utils.thread_count(3) == 3


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv("VARTN_THREADS", "2")
    assert utils.thread_count(8) == 2


@pytest.mark.parametrize("value", ["many", "0"])
def test_thread_count_rejects(monkeypatch, value):
    monkeypatch.setenv("VARTN_THREADS", value)
    with pytest.raises(errors.ConfigError):
        utils.thread_count()
