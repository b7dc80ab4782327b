"""Runs independent instances side by side in worker processes."""

import asyncio

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, TypeVar

from logzero import logger

from . import utils

T = TypeVar("T")


async def map_instances(
    func: Callable[[Any], T], items: Sequence[Any], workers: Optional[int] = None
) -> List[T]:
    """Applies `func` to every item, preserving order.

    Args:
        func (Callable): a picklable, module-level function.
        items (Sequence): arguments, one per instance.
        workers (int, optional): process count. Defaults to utils.thread_count().

    Returns:
        List: results in the order of `items`.
    """

    if workers is None:
        workers = utils.thread_count()
    workers = min(workers, len(items))

    if workers <= 1:
        return [func(item) for item in items]

    logger.info("Running %d instances on %d workers.", len(items), workers)
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [loop.run_in_executor(pool, func, item) for item in items]
        return list(await asyncio.gather(*futures))
