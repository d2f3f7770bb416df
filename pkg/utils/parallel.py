from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from utils.common import debug_print, default_workers

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], max_workers: Optional[int] = None) -> list[R]:
    """
    Apply ``fn`` to every item, results in submission order.

    ``fn`` must be a module-level function and items must pickle. With one
    worker (or one item) everything runs in this process.
    """
    items = list(items)
    workers = default_workers() if max_workers is None else max(1, int(max_workers))
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    debug_print(f"ordered_map: {len(items)} tasks on {workers} workers")
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as executor:
        futures = [executor.submit(fn, item) for item in items]
        return [future.result() for future in futures]
