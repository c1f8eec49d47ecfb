# parallel_runner.py

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from typing import AsyncGenerator, Callable, Dict, List

from .. import settings

logger = logging.getLogger(__name__)


async def run_job(executor, fn, payload, semaphore, index):
    """
    Runs a single job in the executor while holding a semaphore slot.

    Args:
        executor (concurrent.futures.Executor): Pool the job runs in.
        fn (Callable): Module-level function taking the payload; must be picklable.
        payload (dict): Job parameters.
        semaphore (asyncio.Semaphore): Limits the number of jobs in flight.
        index (int): Position of the payload in the input list.

    Returns:
        dict: The payload, the result (or None) and an error message (or None),
              tagged with the original index.
    """
    await semaphore.acquire()
    try:
        loop = asyncio.get_running_loop()
        result = await loop.run_in_executor(executor, fn, payload)
        return {"index": index, "payload": payload, "result": result, "error": None}
    except asyncio.CancelledError:
        raise
    except Exception as e:
        logger.error(f"Job {index} failed: {type(e).__name__}: {e}")
        return {"index": index, "payload": payload, "result": None, "error": f"{type(e).__name__}: {e}"}
    finally:
        semaphore.release()


async def run_concurrently(
    fn: Callable[[Dict], Dict],
    payloads: List[Dict],
    jobs: int = settings.DEFAULT_JOBS,
    indices: List[int] = None,
) -> AsyncGenerator[Dict, None]:
    """Yield job results in completion order; each carries its ``"index"``."""
    indices = list(range(len(payloads))) if indices is None else indices
    if not payloads:
        return
    # A single worker runs in-process; it also keeps unpicklable callables usable.
    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else ThreadPoolExecutor(max_workers=1)
    semaphore = asyncio.Semaphore(jobs)
    try:
        tasks = [
            asyncio.ensure_future(run_job(executor, fn, payload, semaphore, index))
            for index, payload in zip(indices, payloads)
        ]
        for future in asyncio.as_completed(tasks):
            try:
                yield await future
            except asyncio.CancelledError:
                logger.info("A job was cancelled. Propagating cancellation.")
                for task in tasks:
                    task.cancel()
                raise
    finally:
        executor.shutdown(wait=False, cancel_futures=True)
