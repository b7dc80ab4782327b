import pytest

from vartn.lib import batch


def _square(x):
    return x * x


@pytest.mark.asyncio
async def test_inline_map_preserves_order():
    assert await batch.map_instances(_square, [3, 1, 2], workers=1) == [9, 1, 4]


@pytest.mark.asyncio
async def test_process_pool_map_preserves_order():
    assert await batch.map_instances(_square, list(range(6)), workers=2) == [0, 1, 4, 9, 16, 25]


@pytest.mark.asyncio
async def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("VARTN_THREADS", "1")
    assert await batch.map_instances(_square, [4]) == [16]
