"""
Process-pool helper.

Work is split into an ordered list of tasks; results are merged back in task
order so the outcome never depends on the worker count or scheduling.
"""
import multiprocessing
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Callable, Iterable, List, Optional, Sequence

from .logger import get_logger

logger = get_logger(__name__)


def ordered_map(
    fn: Callable[[Any], Any],
    tasks: Sequence[Any],
    workers: int = 1,
    initializer: Optional[Callable[..., None]] = None,
    initargs: Iterable[Any] = (),
    label: str = "tasks",
) -> List[Any]:
    """
    Apply fn to every task, in-process when workers == 1, otherwise on a
    fork-based process pool. Returns results in task order.
    """
    if workers <= 1 or len(tasks) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [fn(task) for task in tasks]

    results: List[Any] = [None] * len(tasks)
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(
        max_workers=workers, mp_context=ctx, initializer=initializer, initargs=tuple(initargs)
    ) as ex:
        futures = {ex.submit(fn, task): i for i, task in enumerate(tasks)}
        done = 0
        for fut in as_completed(futures):
            results[futures[fut]] = fut.result()
            done += 1
            if done % max(1, len(tasks) // 10) == 0:
                logger.info("pool_progress", label=label, done=done, total=len(tasks))
    return results
