import itertools
import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lrperc.graph import (LatticeGraph, degree_profile, diameter, distance, distance_restricted, distance_sets,
                          indirect_distance)
from lrperc.kernel import KernelSpec
from lrperc.sampler import BoxSpec, sample_box


def naive_adjacency(box, edges):
    """Adjacency from coordinates: every pair at sup distance 1 plus the stored edges."""
    nv = box.num_vertices
    coords = [box.coords(i) for i in range(nv)]
    adj = {i: set() for i in range(nv)}
    for i, j in itertools.combinations(range(nv), 2):
        if max(abs(a - b) for a, b in zip(coords[i], coords[j])) == 1:
            adj[i].add(j)
            adj[j].add(i)
    for a, b in edges:
        adj[int(a)].add(int(b))
        adj[int(b)].add(int(a))
    return adj


def naive_bfs(adj, src, allowed=None):
    dist = {src: 0}
    q = deque([src])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y not in dist and (allowed is None or y in allowed):
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


graphs = st.builds(
    lambda shape, beta, seed: LatticeGraph.from_configuration(
        sample_box(KernelSpec.exact(beta), BoxSpec(*shape), seed)),
    st.sampled_from([(1, 12), (2, 5), (3, 3)]), st.floats(0.2, 6.0), st.integers(0, 2**64 - 1))


def test_beta_zero_distance_is_sup_norm():
    g = LatticeGraph.from_edges(BoxSpec(2, 7), [])
    assert distance(g, (0, 0), (6, 3)) == 6
    assert distance(g, (2, 2), (2, 2)) == 0
    assert diameter(g).value == 6


def test_from_edges_validates():
    box = BoxSpec(1, 5)
    with pytest.raises(ValueError):
        LatticeGraph.from_edges(box, [(0, 1)])
    with pytest.raises(ValueError):
        LatticeGraph.from_edges(box, [(0, 7)])


@given(graphs)
def test_bfs_matches_naive_bfs(g):
    box = g.box
    src = box.num_vertices // 3
    adj = naive_adjacency(box, _edges(g))
    ref = naive_bfs(adj, src)
    got = g.bfs_idx([src])
    for v in range(box.num_vertices):
        assert got[v] == ref.get(v, -1)


def _edges(g):
    src = np.repeat(np.arange(g.box.num_vertices), np.diff(g.indptr))
    keep = src < g.indices
    return list(zip(src[keep], g.indices[keep]))


@given(graphs, st.data())
def test_distance_is_a_metric_dominated_by_the_lattice(g, data):
    box = g.box
    pick = st.integers(0, box.num_vertices - 1)
    u, v, w = (box.coords(data.draw(pick)) for _ in range(3))
    duv = distance(g, u, v)
    assert duv == distance(g, v, u)
    assert duv <= max(abs(a - b) for a, b in zip(u, v))
    assert duv <= distance(g, u, w) + distance(g, w, v)
    assert (duv == 0) == (u == v)


@given(graphs, st.data())
def test_restriction_can_only_lengthen_paths(g, data):
    box = g.box
    nv = box.num_vertices
    keep = np.array(data.draw(st.lists(st.booleans(), min_size=nv, max_size=nv)))
    inside = np.flatnonzero(keep)
    if len(inside) < 2:
        return
    u, v = box.coords(int(inside[0])), box.coords(int(inside[-1]))
    dr = distance_restricted(g, keep, u, v)
    assert dr >= distance(g, u, v)
    ref = naive_bfs(naive_adjacency(box, _edges(g)), int(inside[0]), set(inside.tolist())).get(int(inside[-1]))
    assert dr == (math.inf if ref is None else ref)


def test_restricted_distance_accepts_predicates_and_coordinates():
    g = LatticeGraph.from_edges(BoxSpec(2, 5), [])
    assert distance_restricted(g, lambda c: c[:, 1] == 0, (0, 0), (4, 0)) == 4
    assert distance_restricted(g, [(0, 0), (1, 1), (2, 0)], (0, 0), (2, 0)) == 2
    assert distance_restricted(g, [(0, 0), (2, 0)], (0, 0), (2, 0)) == math.inf
    with pytest.raises(ValueError):
        distance_restricted(g, [(0, 0)], (0, 0), (2, 0))


def test_indirect_distance_forbids_direct_edges():
    box = BoxSpec(1, 9)
    g = LatticeGraph.from_edges(box, [(0, 8)])
    A = [(0,), (1,), (2,)]
    B = [(6,), (7,), (8,)]
    assert distance_sets(g, A, B) == 1
    assert indirect_distance(g, A, B) == 4  # 2 -> 3 -> 4 -> 5 -> 6
    with pytest.raises(ValueError):
        indirect_distance(g, A, [(2,), (3,)])


@given(graphs)
def test_indirect_distance_dominates_set_distance(g):
    nv = g.box.num_vertices
    A = np.zeros(nv, bool)
    B = np.zeros(nv, bool)
    A[: nv // 3] = True
    B[-(nv // 3):] = True
    assert indirect_distance(g, A, B) >= distance_sets(g, A, B)


@given(graphs)
def test_adding_an_edge_never_increases_distances(g):
    nv = g.box.num_vertices
    g2 = g.with_edge(0, nv - 1)
    np.testing.assert_array_less(g2.bfs_idx([0]) - 1, g.bfs_idx([0]))
    assert g2.bfs_idx([0])[nv - 1] == 1 or g.box.n <= 2


@given(graphs)
def test_exact_diameter_matches_all_pairs(g):
    adj = naive_adjacency(g.box, _edges(g))
    ref = max(max(naive_bfs(adj, s).values()) for s in range(g.box.num_vertices))
    res = diameter(g)
    assert res.value == ref and res.label == "exact"
    lb = diameter(g, "sampled_lower_bound", starts=3, seed=1)
    assert lb.value <= ref and lb.label == "lower bound"


def test_diameter_cap_and_mode_validation():
    g = LatticeGraph.from_edges(BoxSpec(2, 20), [])
    with pytest.raises(ValueError):
        diameter(g, cap=100)
    with pytest.raises(ValueError):
        diameter(g, mode="guess")


def test_degree_profile_on_the_bare_lattice():
    prof = degree_profile(LatticeGraph.from_edges(BoxSpec(2, 6), []))
    assert set(prof.degrees[prof.interior]) == {8}
    assert prof.histogram == {3: 4, 5: 16, 8: 16}
