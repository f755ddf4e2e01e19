import itertools
import math
from collections import deque
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lrperc.graph import LatticeGraph
from lrperc.kernel import KernelSpec
from lrperc.oracle import (ExactLaw, brute_force_connected_sets, candidate_edges, cut_point_exponent,
                           exact_cut_point_probability, exact_diameter_law, exact_expected_distance)
from lrperc.sampler import BoxSpec, sample_box
from lrperc.structure import enumerate_connected_sets


def _path_law_d1(n, beta, statistic):
    """Independent enumeration on {0..n-1}: p(k) = 1 - ((k^2-1)/k^2)^beta, plain-dict BFS."""
    pairs = [(i, j) for i in range(n) for j in range(i + 2, n)]
    probs = [1 - (((j - i) ** 2 - 1) / (j - i) ** 2) ** beta for i, j in pairs]
    law = {}
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        w = 1.0
        adj = {v: {u for u in (v - 1, v + 1) if 0 <= u < n} for v in range(n)}
        for on, (i, j), p in zip(bits, pairs, probs):
            w *= p if on else 1 - p
            if on:
                adj[i].add(j)
                adj[j].add(i)

        def bfs(s):
            dist = {s: 0}
            q = deque([s])
            while q:
                x = q.popleft()
                for y in adj[x]:
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        q.append(y)
            return dist

        val = bfs(0)[n - 1] if statistic == "distance" else max(max(bfs(s).values()) for s in range(n))
        law[val] = law.get(val, 0.0) + w
    return law


def test_expected_corner_distance_n4_is_43_over_18():
    law = exact_expected_distance(KernelSpec.exact(1.0), BoxSpec(1, 4), (0,), (3,))
    assert law.expectation == pytest.approx(43 / 18, rel=1e-14)
    # the law as fractions: pairs (0,2),(1,3) open w.p. 1/4, pair (0,3) w.p. 1/9
    q = Fraction(1, 9)
    a = Fraction(3, 4) ** 2  # neither length-2 edge
    ref = {1: q, 2: (1 - q) * (1 - a), 3: (1 - q) * a}
    for k, p in ref.items():
        assert law.probability(k) == pytest.approx(float(p), rel=1e-14)
    assert ref == {1: Fraction(1, 9), 2: Fraction(7, 18), 3: Fraction(1, 2)}


def test_n3_laws():
    kern = KernelSpec.exact(1.0)
    assert exact_expected_distance(kern, BoxSpec(1, 3), (0,), (2,)).to_dict()["support"] == [[1, 0.25], [2, 0.75]]
    assert exact_diameter_law(kern, BoxSpec(1, 3)).to_dict()["support"] == [[1, 0.25], [2, 0.75]]


@pytest.mark.parametrize("n,beta", [(4, 1.0), (5, 1.0), (5, 0.5), (6, 2.0)])
def test_laws_match_independent_enumeration(n, beta):
    kern = KernelSpec.exact(beta)
    for stat in ("distance", "diameter"):
        ref = _path_law_d1(n, beta, stat)
        law = (exact_expected_distance(kern, BoxSpec(1, n), (0,), (n - 1,)) if stat == "distance"
               else exact_diameter_law(kern, BoxSpec(1, n)))
        assert law.total == pytest.approx(1.0, abs=1e-13)
        assert dict(law.support) == pytest.approx(ref, rel=1e-10)


def test_candidate_edges_split_certain_and_random_pairs():
    fixed, rand, probs = candidate_edges(KernelSpec.exact(1.0), BoxSpec(2, 3))
    assert len(fixed) == 0
    assert len(rand) == len(probs) == (9 * 8 // 2) - 20  # all pairs minus the 20 lattice pairs
    assert all(0 < p < 1 for p in probs)


def test_enumeration_cap():
    with pytest.raises(ValueError):
        exact_diameter_law(KernelSpec.exact(1.0), BoxSpec(2, 4))
    with pytest.raises(ValueError):
        exact_diameter_law(KernelSpec.exact(1.0), BoxSpec(1, 6), cap=5)


def test_exact_law_helpers():
    law = ExactLaw.from_weights({2: [0.25, 0.25], 1: [0.25], 3: [0.125, 0.125]})
    assert law.support == ((1, 0.25), (2, 0.5), (3, 0.25))
    assert law.expectation == 2.0
    assert law.second_moment == pytest.approx(4.5)
    assert law.probability(7) == 0.0
    assert '"expectation": 2.0' in law.to_json()


@given(st.integers(4, 300).flatmap(lambda m: st.tuples(st.just(m), st.integers(1, m - 2))),
       st.floats(0.0, 4.0))
def test_cut_point_probability_closed_form(mw, beta):
    m, w = mw
    p = exact_cut_point_probability(beta, m, w, check=False)
    assert p == pytest.approx(((w + 1) * (m - w) / m) ** (-beta), rel=1e-12)
    assert cut_point_exponent(m, w) == pytest.approx(math.log((w + 1) * (m - w) / m), rel=1e-12)


def test_cut_point_reference_values():
    assert exact_cut_point_probability(1.0, 4, 1) == pytest.approx(2 / 3)
    assert exact_cut_point_probability(1.0, 100, 50) == pytest.approx(1 / 25.5)
    with pytest.raises(ValueError):
        exact_cut_point_probability(1.0, 4, 3)


@given(st.sampled_from([(1, 10), (2, 4)]), st.floats(0.2, 4.0), st.integers(0, 2**64 - 1), st.integers(1, 4))
def test_brute_force_connected_sets_agree_with_enumeration(shape, beta, seed, k):
    d, n = shape
    g = LatticeGraph.from_configuration(sample_box(KernelSpec.exact(beta), BoxSpec(d, n), seed))
    root = (n // 2,) * d
    fast = enumerate_connected_sets(g, k, root)[k - 1].count
    assert fast == brute_force_connected_sets(g, k, root)


def test_connected_sets_on_the_bare_path():
    g = LatticeGraph.from_edges(BoxSpec(1, 9), [])
    # sets of k consecutive vertices containing the middle vertex
    assert [r.count for r in enumerate_connected_sets(g, 5, (4,))] == [1, 2, 3, 4, 5]
    assert brute_force_connected_sets(g, 3, (4,)) == 3
