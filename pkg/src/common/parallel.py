"""
Worker pool for sweeps.

Sweep points are independent; results always come back in input order so
serial and threaded runs write identical reports.
"""

from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from common.logging_config import get_logger

logger = get_logger("common_parallel")

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """
    Apply fn to every item, optionally on a thread pool.

    Args:
        fn: Worker function
        items: Inputs
        threads: Worker count; 1 runs serially in the calling thread

    Returns:
        Results in input order
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug(f"Running {len(items)} sweep points on {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
