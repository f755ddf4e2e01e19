"""Time the compiled core against the pure-Python fallback.

Run from the repository root after an editable install::

    python3 benchmarks/bench_core.py [--repeat 3] [--quick]

Each kernel is fed identical inputs on both backends; the script checks that
the outputs agree before reporting timings, so a speedup never hides a
divergence.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from lrperc import core
from lrperc.kernel import KernelSpec
from lrperc.sampler import class_probabilities, half_space_deltas
from lrperc.stats import stream_words


def _setup(d, n, beta):
    return half_space_deltas(d, n), class_probabilities(KernelSpec.exact(beta), d, n)


def _cases(quick: bool):
    """``(label, callable(backend))`` pairs; sizes shrink with ``--quick``."""
    s = 4 if quick else 1
    cases = []

    def sample(d, n, beta):
        deltas, probs = _setup(d, n, beta)
        return lambda b: b.sample_edges_skip(n, d, deltas, probs, 12345)

    def replicate(d, n, beta, reps):
        deltas, probs = _setup(d, n, beta)
        words = stream_words(1, "bench", 0, reps)
        src = np.zeros(1, dtype=np.int64)
        tgt = np.array([n - 1, n**d - 1], dtype=np.int64)
        return lambda b: b.replicate_bfs(n, d, deltas, probs, words, src, tgt)

    def diameter(d, n, beta, reps):
        deltas, probs = _setup(d, n, beta)
        words = stream_words(1, "bench-dia", 0, reps)
        return lambda b: b.replicate_diameter(n, d, deltas, probs, words)

    cases.append((f"sample d=1 n={4096 // s}", sample(1, 4096 // s, 1.0)))
    cases.append((f"sample d=2 n={64 // s}", sample(2, 64 // s, 1.0)))
    cases.append((f"corner bfs d=1 n=256 x{200 // s}", replicate(1, 256, 1.0, 200 // s)))
    cases.append((f"corner bfs d=2 n=32 x{50 // s}", replicate(2, 32, 1.0, 50 // s)))
    cases.append((f"diameter d=1 n=32 x{20 // s}", diameter(1, 32, 1.0, 20 // s)))
    return cases


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args(argv)
    if core.compiled is None:
        print("compiled extension unavailable; only the pure-Python backend can be timed")
        return 1
    print(f"{'kernel':32s} {'compiled [s]':>13s} {'python [s]':>11s} {'speedup':>8s}")
    ok = True
    for label, case in _cases(args.quick):
        tc, out_c = _time(lambda: case(core.compiled), args.repeat)
        tp, out_p = _time(lambda: case(core.pure), 1)
        same = _same(out_c, out_p)
        ok &= same
        print(f"{label:32s} {tc:13.4f} {tp:11.4f} {tp / tc:7.1f}x" + ("" if same else "  MISMATCH"))
    return 0 if ok else 2


if __name__ == "__main__":
    raise SystemExit(main())
