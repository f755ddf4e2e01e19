"""Graph distances on sampled configurations.

A :class:`LatticeGraph` stores long edges in CSR form; the ``3^d - 1``
sup-norm neighbours of a vertex are generated on the fly by the BFS kernels.
Vertices are addressed by absolute coordinates (tuples) or, in the ``*_idx``
helpers, by row-major indices. Unreachable targets give ``math.inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import core
from .sampler import BoxSpec, Configuration

DEFAULT_DIAMETER_CAP = 100_000


@dataclass(frozen=True)
class LatticeGraph:
    box: BoxSpec
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, box: BoxSpec, edges) -> "LatticeGraph":
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(e):
            if e.min() < 0 or e.max() >= box.num_vertices:
                raise ValueError("edge endpoint outside the box")
            coords_a = box.coords_array(e[:, 0])
            coords_b = box.coords_array(e[:, 1])
            if np.any(np.abs(coords_a - coords_b).max(axis=1) < 2):
                raise ValueError("stored edges must have sup-norm length >= 2")
        indptr, indices = core.build_csr(box.num_vertices, np.ascontiguousarray(e[:, 0]),
                                         np.ascontiguousarray(e[:, 1]))
        indptr.setflags(write=False)
        indices.setflags(write=False)
        return cls(box, indptr, indices)

    @classmethod
    def from_configuration(cls, config: Configuration) -> "LatticeGraph":
        return cls.from_edges(config.box, config.edges)

    @property
    def n(self) -> int:
        return self.box.n

    @property
    def d(self) -> int:
        return self.box.d

    def long_neighbors(self, lin: int) -> np.ndarray:
        return self.indices[self.indptr[lin]:self.indptr[lin + 1]]

    def with_edge(self, a: int, b: int) -> "LatticeGraph":
        """A copy with one more edge (row-major indices); lattice pairs are already present."""
        ca, cb = self.box.coords(a), self.box.coords(b)
        if max(abs(x - y) for x, y in zip(ca, cb)) <= 1:
            return self
        m = len(self.indices) // 2
        src = np.repeat(np.arange(self.box.num_vertices), np.diff(self.indptr))
        keep = src < self.indices
        e = np.stack([src[keep], self.indices[keep]], axis=1).reshape(m, 2)
        e = np.vstack([e, [[min(a, b), max(a, b)]]])
        return LatticeGraph.from_edges(self.box, np.unique(e, axis=0))

    def bfs_idx(self, sources, allowed=None, labels=None) -> np.ndarray:
        src = np.ascontiguousarray(np.atleast_1d(sources), dtype=np.int64)
        return core.bfs(self.n, self.d, self.indptr, self.indices, src, allowed, labels)


def _index(graph: LatticeGraph, v) -> int:
    return graph.box.index(tuple(v))


def _as_mask(graph: LatticeGraph, vertices) -> np.ndarray:
    """Boolean mask over row-major indices from a mask, predicate or coordinate iterable."""
    nv = graph.box.num_vertices
    if callable(vertices):
        coords = graph.box.coords_array(np.arange(nv))
        mask = np.asarray(vertices(coords), dtype=bool).reshape(nv)
    elif isinstance(vertices, np.ndarray) and vertices.dtype == bool:
        if vertices.shape != (nv,):
            raise ValueError("mask has the wrong length")
        mask = vertices.copy()
    else:
        mask = np.zeros(nv, dtype=bool)
        for v in vertices:
            mask[_index(graph, v)] = True
    return mask


def _finite(x: int) -> float | int:
    return math.inf if x < 0 else int(x)


def distance(graph: LatticeGraph, u, v) -> int:
    """Hop distance between vertices ``u`` and ``v`` (coordinates)."""
    iu, iv = _index(graph, u), _index(graph, v)
    if iu == iv:
        return 0
    return int(graph.bfs_idx([iu])[iv])


def distance_restricted(graph: LatticeGraph, subset, u, v):
    """Distance using only vertices in ``subset``; ``math.inf`` if disconnected there.

    ``subset`` may be a boolean mask over row-major indices, a predicate on an
    ``(N, d)`` coordinate array, or an iterable of coordinates.
    """
    mask = _as_mask(graph, subset)
    iu, iv = _index(graph, u), _index(graph, v)
    if not (mask[iu] and mask[iv]):
        raise ValueError("both endpoints must lie in the subset")
    dist = graph.bfs_idx([iu], allowed=mask.astype(np.uint8))
    return _finite(dist[iv])


def distance_sets(graph: LatticeGraph, A, B) -> int:
    ma, mb = _as_mask(graph, A), _as_mask(graph, B)
    if not ma.any() or not mb.any():
        raise ValueError("vertex sets must be nonempty")
    dist = graph.bfs_idx(np.flatnonzero(ma))
    return int(dist[mb].min())


def indirect_distance(graph: LatticeGraph, A, B):
    """Shortest A-to-B path avoiding every direct A-B edge, lattice ones included."""
    ma, mb = _as_mask(graph, A), _as_mask(graph, B)
    if not ma.any() or not mb.any():
        raise ValueError("vertex sets must be nonempty")
    if np.any(ma & mb):
        raise ValueError("A and B must be disjoint")
    labels = np.zeros(len(ma), dtype=np.uint8)
    labels[ma] = 1
    labels[mb] = 2
    dist = graph.bfs_idx(np.flatnonzero(ma), labels=labels)
    hit = dist[mb]
    hit = hit[hit >= 0]
    return int(hit.min()) if len(hit) else math.inf


class DiameterResult(NamedTuple):
    value: int
    mode: str
    lower_bound: bool

    @property
    def label(self) -> str:
        return "lower bound" if self.lower_bound else "exact"


def diameter(graph: LatticeGraph, mode: str = "exact", *, cap: int = DEFAULT_DIAMETER_CAP,
             starts: int = 8, seed: int = 0) -> DiameterResult:
    """Inner diameter of the box.

    ``mode="exact"`` runs a BFS from every vertex. ``mode="sampled_lower_bound"``
    runs double sweeps from ``starts`` random vertices (plus the corners) and
    returns the largest eccentricity seen, which can only underestimate.
    """
    nv = graph.box.num_vertices
    if mode == "exact":
        if nv > cap:
            raise ValueError(f"exact diameter needs {nv} BFS runs, above the cap {cap}")
        return DiameterResult(int(core.diameter_exact(graph.n, graph.d, graph.indptr, graph.indices)),
                              mode, False)
    if mode != "sampled_lower_bound":
        raise ValueError(f"unknown diameter mode {mode!r}")
    rng = np.random.default_rng(seed)
    first = np.unique(np.concatenate([[0, nv - 1], rng.integers(0, nv, size=starts)]))
    best = 0
    for s in first:
        dist = graph.bfs_idx([s])
        far = int(np.argmax(dist))
        best = max(best, int(dist[far]), int(graph.bfs_idx([far]).max()))
    return DiameterResult(best, mode, True)


class DegreeProfile(NamedTuple):
    degrees: np.ndarray
    interior: np.ndarray
    histogram: dict


def degree_profile(graph: LatticeGraph) -> DegreeProfile:
    """Per-vertex total degrees; ``interior`` flags vertices away from the box faces."""
    deg = core.degrees(graph.n, graph.d, graph.indptr)
    rel = graph.box.coords_array(np.arange(graph.box.num_vertices)) - np.asarray(graph.box.origin)
    interior = np.all((rel > 0) & (rel < graph.n - 1), axis=1)
    vals, counts = np.unique(deg, return_counts=True)
    return DegreeProfile(deg, interior, {int(v): int(c) for v, c in zip(vals, counts)})


__all__ = [
    "LatticeGraph",
    "DiameterResult",
    "DegreeProfile",
    "distance",
    "distance_restricted",
    "distance_sets",
    "indirect_distance",
    "diameter",
    "degree_profile",
]
