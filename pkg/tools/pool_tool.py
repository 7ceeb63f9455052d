import logging
from multiprocessing import Pool
from typing import Any, Callable, List, Sequence

logger = logging.getLogger(__name__)


def map_blocks(worker: Callable[[Any], Any], tasks: Sequence[Any], workers: int = 1) -> List[Any]:
    """Run worker over tasks, returning results in task order."""
    if workers <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    processes = min(workers, len(tasks))
    logger.debug(f"Dispatching {len(tasks)} blocks to {processes} workers")
    with Pool(processes=processes) as pool:
        return pool.map(worker, tasks)
