from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Sequence, TypeVar

T = TypeVar("T")


def run_cells(
    tasks: Sequence[Callable[[], T]],
    max_workers: int = 1,
    show_progress: bool = True
) -> List[T]:
    """
    Run independent cells, possibly on a thread pool.

    Each task must own every mutable object it touches (model, anchor,
    optimizer); nothing is shared between cells.

    Args:
        tasks: Zero-argument callables, one per cell
        max_workers: Maximum number of threads; 1 runs inline
        show_progress: Whether to log start/completion messages

    Returns:
        List of results in the same order as tasks
    """
    from .logging import get_logger
    logger = get_logger("concurrent")

    if show_progress:
        logger.info(f"Running {len(tasks)} cells with {max_workers} worker(s)")

    if max_workers <= 1 or len(tasks) <= 1:
        results = [task() for task in tasks]
    else:
        def guarded(idx: int, task: Callable[[], T]) -> T:
            try:
                return task()
            except Exception as e:
                logger.error(f"Cell {idx} failed: {str(e)}")
                raise

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(guarded, idx, task) for idx, task in enumerate(tasks)]
            results = [future.result() for future in futures]

    if show_progress:
        logger.info(f"Completed all {len(tasks)} cells")

    return results
