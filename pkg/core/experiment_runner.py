"""
Threaded experiment runner.
Worker threads drain a task queue; results are stored by task index so the
assembled output never depends on thread count or finishing order.
"""
import gc
import logging
import os
import threading
import time
from queue import Empty, Queue
from typing import Any, Callable, List, Optional, Sequence

import psutil

from core.errors import ConfigurationError, InvalidParameterError

logger = logging.getLogger(__name__)

try:
    from hankellab_config import EXPERIMENT_CONFIG
except ImportError:
    logger.error("[RUNNER] hankellab_config.py not found on the import path")
    raise ConfigurationError("EXPERIMENT_CONFIG unavailable")


def resolve_threads(threads: Optional[int] = None) -> int:
    """--threads, else HANKELLAB_THREADS, else the config default"""
    if threads is None:
        env = os.environ.get(EXPERIMENT_CONFIG["threads_env"])
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigurationError(f"{EXPERIMENT_CONFIG['threads_env']}={env!r} is not an integer")
        else:
            threads = EXPERIMENT_CONFIG["threads"]
    threads = int(threads)
    if threads < 1:
        raise InvalidParameterError(f"thread count must be >= 1, got {threads}")
    return threads


class ExperimentRunner:

    def __init__(self, threads: Optional[int] = None, resource_logging: Optional[bool] = None):
        self.threads = resolve_threads(threads)
        self.resource_logging = (EXPERIMENT_CONFIG["resource_logging"]
                                 if resource_logging is None else resource_logging)
        self.process = psutil.Process()
        self.results_lock = threading.Lock()
        self.completed = 0
        logger.info(f"[RUNNER] Experiment runner initialized with {self.threads} thread(s)")

    def _log_resources(self, label: str):
        if not self.resource_logging:
            return
        cpu_percent = self.process.cpu_percent()
        memory_mb = self.process.memory_info().rss / 1024 / 1024
        logger.info(f"[CPU MONITOR] {label}: CPU={cpu_percent:.1f}%, Memory={memory_mb:.1f}MB")

    def _worker(self, label: str, fn: Callable, tasks: Queue, results: List, errors: List):
        logger.debug(f"[THREAD] {threading.current_thread().name} started")
        while True:
            try:
                index, item = tasks.get_nowait()
            except Empty:
                break
            try:
                start_time = time.time()
                value = fn(item)
                elapsed = time.time() - start_time
                with self.results_lock:
                    results[index] = value
                    self.completed += 1
                logger.debug(f"[PERFORMANCE] {label}[{index}] finished in {elapsed:.2f}s")
                self._log_resources(f"{label}[{index}]")
            except Exception as e:
                with self.results_lock:
                    errors.append((index, e))
                logger.debug(f"[THREAD ERROR] {label}[{index}] failed: {e}")
            finally:
                tasks.task_done()
        logger.debug(f"[THREAD] {threading.current_thread().name} stopped")

    def map(self, fn: Callable[[Any], Any], items: Sequence[Any], label: str = "task") -> List[Any]:
        """
        fn applied to every item, results in item order

        The first failure (by item index) is re-raised after all workers finish.
        """
        items = list(items)
        results: List[Any] = [None] * len(items)
        errors: List = []
        if not items:
            return results

        tasks: Queue = Queue()
        for index, item in enumerate(items):
            tasks.put((index, item))

        workers = min(self.threads, len(items))
        logger.info(f"[RUNNER] {label}: {len(items)} task(s) on {workers} thread(s)")
        if workers == 1:
            self._worker(label, fn, tasks, results, errors)
        else:
            pool = [threading.Thread(target=self._worker, args=(label, fn, tasks, results, errors),
                                     name=f"{label}-{k}", daemon=True)
                    for k in range(workers)]
            for thread in pool:
                thread.start()
            for thread in pool:
                thread.join()

        collected = gc.collect()
        if collected > 0:
            logger.debug(f"[GC] Collected {collected} objects")
        if errors:
            index, error = min(errors, key=lambda e: e[0])
            logger.error(f"[RUNNER] {label}[{index}] failed: {error}")
            raise error
        return results
