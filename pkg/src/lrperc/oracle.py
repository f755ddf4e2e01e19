"""Exact ground truth on tiny boxes by exhaustive enumeration.

Every subset of the random long edges is visited in a fixed (lexicographic)
order and weighted by its probability, so the resulting laws are exact up to
floating-point summation, which uses :func:`math.fsum`.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import core
from .graph import LatticeGraph
from .kernel import KernelSpec, connection_probabilities
from .sampler import BoxSpec, half_space_deltas

DEFAULT_EDGE_CAP = 22
DEFAULT_SUBSET_CAP = 1_000_000


@dataclass(frozen=True)
class ExactLaw:
    support: tuple  # ((value, probability), ...) sorted by value

    @classmethod
    def from_weights(cls, weights: dict) -> "ExactLaw":
        items = tuple(sorted((int(k), math.fsum(v)) for k, v in weights.items()))
        return cls(tuple((k, p) for k, p in items if p > 0.0))

    @property
    def total(self) -> float:
        return math.fsum(p for _, p in self.support)

    @property
    def expectation(self) -> float:
        return math.fsum(k * p for k, p in self.support)

    @property
    def second_moment(self) -> float:
        return math.fsum(k * k * p for k, p in self.support)

    def probability(self, value: int) -> float:
        return dict(self.support).get(int(value), 0.0)

    def to_dict(self) -> dict:
        return {
            "support": [[k, p] for k, p in self.support],
            "expectation": self.expectation,
            "second_moment": self.second_moment,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def candidate_edges(kernel: KernelSpec, box: BoxSpec):
    """Long pairs of the box in lexicographic order, split by their probability.

    Returns ``(fixed, random, probs)``: pairs open surely, pairs open with
    probability strictly between 0 and 1, and the latter's probabilities.
    """
    deltas = half_space_deltas(box.d, box.n)
    if len(deltas) == 0:
        empty = np.empty((0, 2), dtype=np.int64)
        return empty, empty, np.empty(0)
    p = connection_probabilities(kernel, deltas)
    coords = box.coords_array(np.arange(box.num_vertices)) - np.asarray(box.origin)
    pairs, probs = [], []
    for delta, pk in zip(deltas, p):
        tgt = coords + delta
        ok = np.all((tgt >= 0) & (tgt < box.n), axis=1)
        src = np.flatnonzero(ok)
        dst = box.index_array(tgt[ok] + np.asarray(box.origin))
        for a, b in zip(src, dst):
            pairs.append((int(a), int(b)))
            probs.append(float(pk))
    order = sorted(range(len(pairs)), key=lambda i: pairs[i])
    pairs = np.array([pairs[i] for i in order], dtype=np.int64).reshape(-1, 2)
    probs = np.array([probs[i] for i in order])
    fixed = pairs[probs >= 1.0]
    rnd = (probs > 0.0) & (probs < 1.0)
    return fixed, pairs[rnd], probs[rnd]


def _enumerate(kernel, box, cap, statistic):
    fixed, rnd, probs = candidate_edges(kernel, box)
    m = len(rnd)
    if m > cap:
        raise ValueError(f"{m} random candidate edges exceed the enumeration cap {cap}")
    weights: dict = {}
    logp = np.log(probs)
    logq = np.log1p(-probs)
    for mask in range(1 << m):
        bits = np.array([(mask >> i) & 1 for i in range(m)], dtype=bool)
        w = math.exp(float(np.sum(np.where(bits, logp, logq)))) if m else 1.0
        edges = np.vstack([fixed, rnd[bits]]) if m else fixed
        indptr, indices = core.build_csr(box.num_vertices, np.ascontiguousarray(edges[:, 0]),
                                         np.ascontiguousarray(edges[:, 1]))
        weights.setdefault(statistic(indptr, indices), []).append(w)
    return ExactLaw.from_weights(weights)


def exact_expected_distance(kernel: KernelSpec, box: BoxSpec, u, v, *,
                            cap: int = DEFAULT_EDGE_CAP) -> ExactLaw:
    """Exact law of ``D(u, v)`` inside ``box``."""
    iu, iv = box.index(tuple(u)), box.index(tuple(v))
    src = np.array([iu], dtype=np.int64)

    def stat(indptr, indices):
        return int(core.bfs(box.n, box.d, indptr, indices, src)[iv])

    return _enumerate(kernel, box, cap, stat)


def exact_diameter_law(kernel: KernelSpec, box: BoxSpec, *, cap: int = DEFAULT_EDGE_CAP) -> ExactLaw:
    def stat(indptr, indices):
        return int(core.diameter_exact(box.n, box.d, indptr, indices))

    return _enumerate(kernel, box, cap, stat)


def brute_force_connected_sets(graph: LatticeGraph, k: int, root=None, *,
                               cap: int = DEFAULT_SUBSET_CAP) -> int:
    """Count connected ``k``-sets containing ``root`` by testing every candidate subset.

    Adjacency is rebuilt here from coordinates, independently of the BFS kernels.
    """
    box = graph.box
    nv = box.num_vertices
    r = 0 if root is None else box.index(tuple(root))
    if k < 1:
        raise ValueError("k must be positive")
    if math.comb(nv - 1, k - 1) > cap:
        raise ValueError(f"C({nv - 1}, {k - 1}) subsets exceed the cap {cap}")
    coords = box.coords_array(np.arange(nv))
    adj = [set() for _ in range(nv)]
    for x in range(nv):
        near = np.flatnonzero(np.abs(coords - coords[x]).max(axis=1) == 1)
        adj[x].update(int(y) for y in near)
        adj[x].update(int(y) for y in graph.long_neighbors(x))
    others = [x for x in range(nv) if x != r]
    count = 0
    for rest in itertools.combinations(others, k - 1):
        members = set(rest)
        members.add(r)
        seen = {r}
        queue = deque([r])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y in members and y not in seen:
                    seen.add(y)
                    queue.append(y)
        count += len(seen) == k
    return count


def cut_point_exponent(m: int, w: int) -> float:
    """``int_0^w int_{w+1}^m (y - x)^(-2) dy dx = ln((w+1)(m-w)/m)``."""
    return math.log((w + 1) * (m - w) / m)


def exact_cut_point_probability(beta: float, m: int, w: int, *, check: bool = True) -> float:
    """Probability that ``w`` is a cut point of ``{0..m-1}`` (d = 1, ExactCube kernel).

    The straddling edges are independent, so the probability is
    ``exp(-beta * I)`` with ``I`` the interaction between ``[0, w)`` and
    ``[w+1, m)``. ``check`` compares the closed form for ``I`` with
    adaptive quadrature to a relative 1e-10.
    """
    if not (1 <= w <= m - 2):
        raise ValueError("need 1 <= w <= m - 2")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    expo = cut_point_exponent(m, w)
    if check:
        val, _ = integrate.dblquad(lambda y, x: (y - x) ** -2.0, 0.0, w, w + 1.0, float(m),
                                   epsabs=0.0, epsrel=1e-13)
        if abs(val - expo) > 1e-10 * expo:
            raise ArithmeticError(f"quadrature {val!r} disagrees with closed form {expo!r}")
    return math.exp(-beta * expo)


__all__ = [
    "ExactLaw",
    "candidate_edges",
    "exact_expected_distance",
    "exact_diameter_law",
    "brute_force_connected_sets",
    "exact_cut_point_probability",
    "cut_point_exponent",
]
