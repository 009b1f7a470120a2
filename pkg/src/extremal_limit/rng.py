"""Reproducible random streams and block-parallel replicate execution.

Every stream is a pure function of ``(master_seed, stream, replicate_index)``
through :class:`numpy.random.SeedSequence` spawn keys.  Batch samplers split
``n`` replicates into fixed-size blocks, and each block gets its own stream.
Block boundaries never depend on the number of worker threads, so results are
bit-identical for any ``EXTREMAL_LIMIT_THREADS`` setting.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

THREADS_ENV = "EXTREMAL_LIMIT_THREADS"
BLOCK_SIZE = 8192


@dataclass(frozen=True)
class RngSpec:
    master_seed: int
    replicate_index: int = 0
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if isinstance(self.master_seed, float) and not self.master_seed.is_integer():
            raise ValueError("master_seed must be an integer")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if int(self.replicate_index) < 0:
            raise ValueError("replicate_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            int(self.master_seed),
            spawn_key=(*self.stream, int(self.replicate_index)),
        )
        return np.random.Generator(np.random.PCG64(seq))


def stream_tag(name: str) -> int:
    """Stable integer tag for a named experiment stream."""
    return zlib.crc32(name.encode("utf-8"))


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer") from None
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer")
        return value
    return os.cpu_count() or 1


def block_sizes(n: int, block_size: int = BLOCK_SIZE) -> list[int]:
    if n < 0:
        raise ValueError("sample count must be nonnegative")
    full, rest = divmod(n, block_size)
    return [block_size] * full + ([rest] if rest else [])


def run_blocks(fn, n, master_seed, stream=(), *, threads=None,
               block_size=BLOCK_SIZE):
    """Call ``fn(generator, size)`` once per block and return results in order.

    Block ``b`` draws from ``RngSpec(master_seed, b, stream)``.
    """
    sizes = block_sizes(n, block_size)
    specs = [RngSpec(master_seed, b, tuple(stream)) for b in range(len(sizes))]

    def work(job):
        spec, size = job
        return fn(spec.generator(), size)

    jobs = list(zip(specs, sizes))
    workers = min(threads or thread_count(), max(len(jobs), 1))
    if workers <= 1:
        return [work(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, jobs))


def parallel_map(fn, items, *, threads=None):
    """Order-preserving thread map for deterministic per-item work."""
    items = list(items)
    workers = min(threads or thread_count(), max(len(items), 1))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
