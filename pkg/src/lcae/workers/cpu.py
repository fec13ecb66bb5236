"""
CPU-side helpers for the compute workers.
Worker-count detection, fixed-width column chunking over a thread pool,
and single-CPU pinning for timing runs.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Callable, Iterator

import numpy as np
import psutil

from lcae.utils.errors import ConfigError

logger = logging.getLogger(__name__)

# Chunk boundaries depend only on the column count, so results never
# depend on how many threads ran them.
COLUMN_CHUNK = 256


def detect_optimal_threads() -> int:
    """
    Detect a sensible thread count from system resources.

    Rules:
    - 1 worker per 256MB of memory left after a 1GB reserve
    - Cap at physical CPU cores
    - Minimum: 1, Maximum: 16
    """
    try:
        memory = psutil.virtual_memory()
        available_gb = memory.available / (1024 ** 3)
        usable_memory = max(0.0, available_gb - 1)
        memory_based_workers = max(1, int(usable_memory / 0.25))

        cpu_count = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1

        optimal = min(memory_based_workers, cpu_count)
        return max(1, min(16, optimal))
    except Exception:
        return 1


def resolve_threads(threads: int) -> int:
    """Map the --threads value onto a worker count (0 means auto)."""
    if threads < 0:
        raise ConfigError(f"threads must be >= 0, got {threads}")
    if threads == 0:
        detected = detect_optimal_threads()
        logger.info(f"Auto-detected {detected} worker thread(s)")
        return detected
    return threads


def map_column_chunks(
    fn: Callable[[np.ndarray], np.ndarray],
    C: np.ndarray,
    threads: int = 1,
) -> np.ndarray:
    """
    Apply fn to fixed-width column blocks of C and stitch the outputs back
    together in column order. fn must treat columns independently.
    """
    n_cols = C.shape[1]
    if n_cols <= COLUMN_CHUNK:
        return fn(C)

    bounds = [(start, min(start + COLUMN_CHUNK, n_cols))
              for start in range(0, n_cols, COLUMN_CHUNK)]

    def run_chunk(span):
        a, b = span
        return fn(C[:, a:b])

    if threads <= 1:
        parts = [run_chunk(span) for span in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_chunk, bounds))
    return np.hstack(parts)


@contextmanager
def pinned_to_single_cpu() -> Iterator[None]:
    """
    Pin the current process to one CPU for the duration of the block.
    Platforms without affinity support (macOS) run unpinned.
    """
    proc = psutil.Process()
    if not hasattr(proc, "cpu_affinity"):
        logger.debug("CPU affinity not supported here, timing unpinned")
        yield
        return

    try:
        original = proc.cpu_affinity()
        proc.cpu_affinity([original[0]])
    except (psutil.Error, OSError, IndexError) as e:
        logger.warning(f"Could not pin to a single CPU: {e}")
        yield
        return

    try:
        yield
    finally:
        try:
            proc.cpu_affinity(original)
        except (psutil.Error, OSError) as e:
            logger.warning(f"Could not restore CPU affinity: {e}")
