"""Replicate bookkeeping shared by the estimators and structure modules.

Replicate ``r`` of an experiment always draws from the stream
``seed_derivation(master_seed, tag, r)``. Work is cut into chunks of a fixed
size that does not depend on the worker count, and chunk results are joined
in replica order, so the output is identical for any number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .rng import seed_derivation

CHUNK = 2048
_default_workers = 1


def set_default_workers(k: int) -> None:
    global _default_workers
    if k < 1:
        raise ValueError("worker count must be positive")
    _default_workers = int(k)


def default_workers() -> int:
    return _default_workers


@dataclass(frozen=True)
class EstimateCI:
    mean: float
    stderr: float
    replicates: int
    master_seed: int
    label: str = ""

    @classmethod
    def from_samples(cls, x, master_seed: int, label: str = "") -> "EstimateCI":
        x = np.asarray(x, dtype=float)
        r = len(x)
        if r == 0:
            raise ValueError("no samples")
        mean = float(np.mean(x))
        stderr = float(np.std(x, ddof=1) / math.sqrt(r)) if r >= 2 else math.nan
        return cls(mean, stderr, r, int(master_seed), label)

    def z(self, target: float) -> float:
        """Signed z-score of the mean against ``target`` (0 when both gaps vanish)."""
        diff = self.mean - target
        if self.stderr == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.stderr

    def as_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "replicates": self.replicates,
                "master_seed": self.master_seed, "label": self.label}


def stream_words(master_seed: int, tag: str, start: int, stop: int) -> np.ndarray:
    return np.array([seed_derivation(master_seed, tag, r).word for r in range(start, stop)],
                    dtype=np.uint64)


def _run_chunk(job):
    fn, payload, master_seed, tag, start, stop = job
    return fn(payload, stream_words(master_seed, tag, start, stop))


def run_replicates(fn: Callable, payload, master_seed: int, tag: str, replicates: int,
                   workers: int | None = None, chunk: int = CHUNK) -> np.ndarray:
    """Evaluate ``fn(payload, words)`` over replicate chunks; concatenate in replica order.

    ``fn`` must be a module-level function (it is pickled for worker
    processes) returning an array whose first axis matches ``len(words)``.
    """
    if replicates < 1:
        raise ValueError("need at least one replicate")
    workers = default_workers() if workers is None else int(workers)
    jobs = [(fn, payload, master_seed, tag, s, min(s + chunk, replicates))
            for s in range(0, replicates, chunk)]
    if workers <= 1 or len(jobs) == 1:
        parts = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            parts = list(ex.map(_run_chunk, jobs))
    return np.concatenate(parts, axis=0)


__all__ = ["EstimateCI", "run_replicates", "stream_words", "set_default_workers", "default_workers"]
