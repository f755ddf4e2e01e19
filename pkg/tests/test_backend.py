"""The compiled core and its pure-Python twin must agree bit for bit."""
import importlib
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lrperc import core
from lrperc.kernel import KernelSpec
from lrperc.sampler import class_probabilities, half_space_deltas
from lrperc.stats import stream_words

pytestmark = pytest.mark.skipif(core.compiled is None, reason="compiled extension not built")
C, P = core.compiled, core.pure

shapes = st.sampled_from([(1, 3), (1, 17), (1, 40), (2, 3), (2, 6), (3, 3)])
seeds = st.integers(0, 2**64 - 1)
betas = st.floats(0.05, 8.0)


def _setup(shape, beta):
    d, n = shape
    return n, d, half_space_deltas(d, n), class_probabilities(KernelSpec.exact(beta), d, n)


def _graph(backend, n, d, deltas, probs, word):
    a, b = backend.sample_edges_skip(n, d, deltas, probs, word)
    return backend.build_csr(n**d, a, b)


@given(shapes, betas, seeds)
def test_skip_sampler(shape, beta, word):
    n, d, deltas, probs = _setup(shape, beta)
    for x, y in zip(C.sample_edges_skip(n, d, deltas, probs, word), P.sample_edges_skip(n, d, deltas, probs, word)):
        np.testing.assert_array_equal(x, y)


@given(shapes, betas, betas, seeds)
def test_pairwise_sampler(shape, b1, b2, word):
    d, n = shape
    deltas = half_space_deltas(d, n)
    probs = np.ascontiguousarray(np.stack([class_probabilities(KernelSpec.exact(b), d, n) for b in (b1, b2)], 1))
    origin = np.arange(d, dtype=np.int64) - 3
    for x, y in zip(C.sample_edges_pairwise(n, d, origin, deltas, probs, word),
                    P.sample_edges_pairwise(n, d, origin, deltas, probs, word)):
        np.testing.assert_array_equal(x, y)


@given(shapes, betas, seeds, st.data())
def test_bfs_variants(shape, beta, word, data):
    n, d, deltas, probs = _setup(shape, beta)
    nv = n**d
    ip, ix = _graph(C, n, d, deltas, probs, word)
    ip2, ix2 = _graph(P, n, d, deltas, probs, word)
    np.testing.assert_array_equal(ip, ip2)
    np.testing.assert_array_equal(ix, ix2)
    src = np.array([data.draw(st.integers(0, nv - 1))], dtype=np.int64)
    allowed = np.array(data.draw(st.lists(st.sampled_from([0, 1]), min_size=nv, max_size=nv)), dtype=np.uint8)
    allowed[src] = 1
    labels = np.array(data.draw(st.lists(st.sampled_from([0, 1, 2]), min_size=nv, max_size=nv)), dtype=np.uint8)
    labels[src] = 1
    np.testing.assert_array_equal(C.bfs(n, d, ip, ix, src), P.bfs(n, d, ip, ix, src))
    np.testing.assert_array_equal(C.bfs(n, d, ip, ix, src, allowed), P.bfs(n, d, ip, ix, src, allowed))
    np.testing.assert_array_equal(C.bfs(n, d, ip, ix, src, None, labels), P.bfs(n, d, ip, ix, src, None, labels))


@given(shapes, betas, seeds)
def test_diameter_degrees_and_sets(shape, beta, word):
    n, d, deltas, probs = _setup(shape, beta)
    ip, ix = _graph(C, n, d, deltas, probs, word)
    assert C.diameter_exact(n, d, ip, ix) == P.diameter_exact(n, d, ip, ix)
    starts = np.arange(0, n**d, 2, dtype=np.int64)
    np.testing.assert_array_equal(C.eccentricities(n, d, ip, ix, starts), P.eccentricities(n, d, ip, ix, starts))
    deg = C.degrees(n, d, ip)
    np.testing.assert_array_equal(deg, P.degrees(n, d, ip))
    kmax = 4 if d < 3 else 3
    for x, y in zip(C.connected_sets(n, d, ip, ix, deg, 0, kmax), P.connected_sets(n, d, ip, ix, deg, 0, kmax)):
        np.testing.assert_array_equal(x, y)


@given(shapes, betas, seeds, st.booleans())
def test_replicate_kernels(shape, beta, seed, reduce_min):
    n, d, deltas, probs = _setup(shape, beta)
    words = stream_words(seed, "backend", 0, 6)
    src = np.array([0], dtype=np.int64)
    tgt = np.array([n**d - 1, n - 1], dtype=np.int64)
    np.testing.assert_array_equal(C.replicate_bfs(n, d, deltas, probs, words, src, tgt, None, reduce_min),
                                  P.replicate_bfs(n, d, deltas, probs, words, src, tgt, None, reduce_min))
    np.testing.assert_array_equal(C.replicate_diameter(n, d, deltas, probs, words),
                                  P.replicate_diameter(n, d, deltas, probs, words))


def test_replicate_bfs_matches_one_sample_at_a_time():
    n, d, deltas, probs = _setup((2, 6), 2.0)
    words = stream_words(3, "one-by-one", 0, 5)
    src = np.array([0], dtype=np.int64)
    tgt = np.array([35], dtype=np.int64)
    batched = core.replicate_bfs(n, d, deltas, probs, words, src, tgt)
    for i, w in enumerate(words):
        ip, ix = _graph(core, n, d, deltas, probs, int(w))
        assert batched[i, 0] == core.bfs(n, d, ip, ix, src)[35]


def test_environment_variable_forces_the_pure_backend():
    code = "from lrperc import core; print(core.BACKEND_NAME)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={**__import__("os").environ, "LRPERC_PURE": "1"}, check=True)
    assert out.stdout.strip() == "python"
    assert importlib.import_module("lrperc").BACKEND_NAME == "compiled"
