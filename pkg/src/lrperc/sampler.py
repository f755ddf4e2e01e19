"""Sampling percolation configurations on finite boxes.

Two routes produce the ExactCube law:

* :func:`sample_box` sweeps candidate pairs class by class (one class per
  displacement, constant probability within a class) with geometric skipping.
* :func:`sample_poisson_cloud` followed by :func:`discretize_cloud` draws a
  continuum Poisson cloud once and reads off edges at any scale
  ``n <= 1/epsilon``, which couples several scales on one probability space.

:func:`sample_coupled_kernels` gives the monotone coupling across kernels: one
uniform per vertex pair, keyed by the absolute coordinates of the pair.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import core
from .kernel import Family, KernelSpec, connection_probabilities
from .rng import MASK64, StreamKey, as_word, generator_from_word

FORMAT_VERSION = 1
DEFAULT_MAX_VERTICES = 1 << 24
_MAGIC = b"LRPC"


@dataclass(frozen=True)
class BoxSpec:
    d: int
    n: int
    origin: tuple = None

    def __post_init__(self):
        d, n = int(self.d), int(self.n)
        if d < 1:
            raise ValueError("dimension must be at least 1")
        if n < 1:
            raise ValueError("side length must be at least 1")
        origin = (0,) * d if self.origin is None else tuple(int(c) for c in self.origin)
        if len(origin) != d:
            raise ValueError("origin has the wrong dimension")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "origin", origin)

    @property
    def num_vertices(self) -> int:
        return self.n**self.d

    def index(self, coords: Sequence[int]) -> int:
        """Row-major index of absolute coordinates ``coords``."""
        if len(coords) != self.d:
            raise ValueError("coordinates have the wrong dimension")
        lin = 0
        for c, o in zip(coords, self.origin):
            r = int(c) - o
            if not 0 <= r < self.n:
                raise ValueError(f"vertex {tuple(coords)} outside the box")
            lin = lin * self.n + r
        return lin

    def coords(self, lin: int) -> tuple:
        if not 0 <= lin < self.num_vertices:
            raise ValueError(f"index {lin} outside the box")
        out = []
        for o in reversed(self.origin):
            out.append(o + lin % self.n)
            lin //= self.n
        return tuple(reversed(out))

    def coords_array(self, lin: np.ndarray) -> np.ndarray:
        lin = np.asarray(lin, dtype=np.int64)
        out = np.empty(lin.shape + (self.d,), dtype=np.int64)
        rem = lin.copy()
        for i in range(self.d - 1, -1, -1):
            out[..., i] = rem % self.n + self.origin[i]
            rem //= self.n
        return out

    def index_array(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64)
        rel = coords - np.asarray(self.origin, dtype=np.int64)
        lin = np.zeros(coords.shape[:-1], dtype=np.int64)
        for i in range(self.d):
            lin = lin * self.n + rel[..., i]
        return lin


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _canonical_edges(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(m, 2) int64 array with the smaller index first, sorted and deduplicated."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    e = np.stack([lo, hi], axis=1) if len(lo) else np.empty((0, 2), dtype=np.int64)
    if len(e):
        e = np.unique(e, axis=0)
    return e


@dataclass(frozen=True)
class Configuration:
    """An immutable percolation configuration on a box.

    ``edges`` holds the long edges only (sup-norm distance at least 2) as
    sorted row-major index pairs, smaller endpoint first. Nearest-neighbour
    edges are always open and never stored. ``source`` records how the sample
    was drawn (``"box"``, ``"cloud"`` or ``"coupled"``) so that it can be
    regenerated from ``(kernel, box, seed)``.
    """

    box: BoxSpec
    kernel: KernelSpec
    seed: int
    edges: np.ndarray = field(repr=False)
    source: str = "box"

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", _freeze(e))
        object.__setattr__(self, "seed", int(self.seed) & MASK64)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_set(self) -> set:
        return {(int(a), int(b)) for a, b in self.edges}

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.box == other.box
            and self.kernel == other.kernel
            and self.seed == other.seed
            and self.source == other.source
            and np.array_equal(self.edges, other.edges)
        )

    __hash__ = None

    # -- serialization -----------------------------------------------------
    def header(self) -> dict:
        return {
            "format": "lrperc-configuration",
            "version": FORMAT_VERSION,
            "d": self.box.d,
            "n": self.box.n,
            "origin": list(self.box.origin),
            "family": self.kernel.family.value,
            "beta": self.kernel.beta,
            "seed": self.seed,
            "source": self.source,
            "num_edges": self.num_edges,
        }

    def to_json(self) -> str:
        doc = self.header()
        doc["edges"] = self.edges.tolist()
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        doc = json.loads(text)
        return cls._from_header(doc, np.asarray(doc["edges"], dtype=np.int64))

    def to_bytes(self) -> bytes:
        """``LRPC`` magic, u32 header length, JSON header, little-endian int64 pairs."""
        head = json.dumps(self.header(), separators=(",", ":")).encode()
        body = self.edges.astype("<i8").tobytes()
        return _MAGIC + struct.pack("<I", len(head)) + head + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "Configuration":
        if data[:4] != _MAGIC:
            raise ValueError("not an lrperc binary configuration")
        (hlen,) = struct.unpack("<I", data[4:8])
        doc = json.loads(data[8:8 + hlen])
        edges = np.frombuffer(data[8 + hlen:], dtype="<i8").astype(np.int64).reshape(-1, 2)
        return cls._from_header(doc, edges)

    @classmethod
    def _from_header(cls, doc: dict, edges: np.ndarray) -> "Configuration":
        if doc.get("format") != "lrperc-configuration":
            raise ValueError("unknown format")
        if doc.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported version {doc.get('version')}")
        box = BoxSpec(doc["d"], doc["n"], tuple(doc["origin"]))
        kernel = KernelSpec(Family(doc["family"]), doc["beta"])
        if len(edges) != doc["num_edges"]:
            raise ValueError("edge count does not match header")
        return cls(box, kernel, doc["seed"], edges, doc.get("source", "box"))


# ---------------------------------------------------------------------------
# direct sampling
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def half_space_deltas(d: int, n: int) -> np.ndarray:
    """Displacements with sup norm >= 2 that fit in an ``n``-box, one per +/- pair.

    The representative is the lexicographically positive one; rows are in
    lexicographic order.
    """
    if n < 3:
        return np.empty((0, d), dtype=np.int64)
    r = np.arange(-(n - 1), n, dtype=np.int64)
    grids = np.meshgrid(*([r] * d), indexing="ij")
    deltas = np.stack([g.ravel() for g in grids], axis=1)
    nz = deltas != 0
    first = np.argmax(nz, axis=1)
    lead = deltas[np.arange(len(deltas)), first]
    keep = (lead > 0) & (np.abs(deltas).max(axis=1) >= 2)
    out = np.ascontiguousarray(deltas[keep])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def class_probabilities(kernel: KernelSpec, d: int, n: int) -> np.ndarray:
    deltas = half_space_deltas(d, n)
    if len(deltas) == 0:
        p = np.empty(0)
    else:
        p = np.ascontiguousarray(connection_probabilities(kernel, deltas))
    p.setflags(write=False)
    return p


def _check_budget(box: BoxSpec, max_vertices: int):
    if box.num_vertices > max_vertices:
        raise MemoryError(
            f"box with {box.num_vertices} vertices exceeds the budget of {max_vertices}"
        )


def sample_box(kernel: KernelSpec, box: BoxSpec, seed, *, max_vertices: int = DEFAULT_MAX_VERTICES) -> Configuration:
    """Draw a configuration on ``box``: each pair at sup distance >= 2 opens independently."""
    _check_budget(box, max_vertices)
    word = as_word(seed)
    if kernel.beta == 0.0 or box.n < 3:
        return Configuration(box, kernel, word, np.empty((0, 2), dtype=np.int64))
    deltas = half_space_deltas(box.d, box.n)
    probs = class_probabilities(kernel, box.d, box.n)
    a, b = core.sample_edges_skip(box.n, box.d, deltas, probs, word)
    order = np.lexsort((b, a))
    edges = np.stack([a[order], b[order]], axis=1)
    return Configuration(box, kernel, word, edges)


def sample_coupled(kernels: Sequence[KernelSpec], box: BoxSpec, seed, *,
                   max_vertices: int = DEFAULT_MAX_VERTICES) -> list:
    """Monotone coupling of up to 8 kernels on one box.

    Each vertex pair gets one uniform, a hash of the pair's absolute
    coordinates and the stream word; the pair is open under a kernel iff the
    uniform is below that kernel's probability. The uniforms therefore do not
    depend on the box size or the kernels.
    """
    kernels = list(kernels)
    if not 1 <= len(kernels) <= 8:
        raise ValueError("between 1 and 8 kernels can be coupled")
    _check_budget(box, max_vertices)
    word = as_word(seed)
    if box.n < 3:
        return [Configuration(box, k, word, np.empty((0, 2), np.int64), "coupled") for k in kernels]
    deltas = half_space_deltas(box.d, box.n)
    probs = np.ascontiguousarray(np.stack([class_probabilities(k, box.d, box.n) for k in kernels], axis=1))
    origin = np.asarray(box.origin, dtype=np.int64)
    a, b, flags = core.sample_edges_pairwise(box.n, box.d, origin, deltas, probs, word)
    out = []
    for f, k in enumerate(kernels):
        sel = (flags >> f) & 1 == 1
        out.append(Configuration(box, k, word, _canonical_edges(a[sel], b[sel]), "coupled"))
    return out


def sample_coupled_kernels(kernel_a: KernelSpec, kernel_b: KernelSpec, box: BoxSpec, seed):
    ca, cb = sample_coupled([kernel_a, kernel_b], box, seed)
    return ca, cb


# ---------------------------------------------------------------------------
# Poisson cloud
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoissonCloud:
    """Points ``(t, s)`` of a Poisson process on ``[0,1]^d x [0,1]^d``.

    The intensity is ``beta / (2 |t - s|^(2d))`` restricted to
    ``|t - s|_inf >= min_separation``. Each point stands for both ``(t, s)``
    and ``(s, t)`` (``symmetric`` is always true), so an unordered cell pair
    ``{u, v}`` sees total intensity ``beta * J(u - v)``.
    """

    d: int
    beta: float
    min_separation: float
    seed: int
    t: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    symmetric: bool = True

    def __post_init__(self):
        object.__setattr__(self, "t", _freeze(np.asarray(self.t, dtype=float).reshape(-1, self.d)))
        object.__setattr__(self, "s", _freeze(np.asarray(self.s, dtype=float).reshape(-1, self.d)))

    def __len__(self):
        return len(self.t)


def _shells(epsilon: float):
    """Dyadic sup-norm shells ``[lo, hi)`` covering ``[epsilon, 1]``."""
    hi = 1.0
    while hi > epsilon:
        lo = max(hi / 2.0, epsilon)
        yield lo, hi
        hi /= 2.0


def sample_poisson_cloud(beta: float, epsilon: float, seed, d: int = 1) -> PoissonCloud:
    """Exact draw of the truncated cloud by dyadic shells and thinning.

    Within the shell ``lo <= |z|_inf < hi`` (``z = s - t``) the intensity is at
    most ``beta / (2 lo^(2d))``. Proposals are a homogeneous Poisson process
    with that rate on ``t in [0,1]^d, z in [-hi, hi]^d``; a proposal is kept if
    it lies in the shell, ``t + z`` lies in the unit cube, and a uniform falls
    below ``(lo / |z|)^(2d)``, which is at least ``(4d)^(-d)`` in the shell.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    beta = float(beta)
    if not beta >= 0.0:
        raise ValueError("beta must be nonnegative")
    word = as_word(seed)
    rng = generator_from_word(word)
    ts, ss = [], []
    if beta > 0.0:
        for lo, hi in _shells(epsilon):
            mass = beta / (2.0 * lo ** (2 * d)) * (2.0 * hi) ** d
            m = int(rng.poisson(mass))
            t = rng.random((m, d))
            z = (2.0 * rng.random((m, d)) - 1.0) * hi
            u = rng.random(m)
            s = t + z
            sup = np.abs(z).max(axis=1) if m else np.empty(0)
            r2d = (z * z).sum(axis=1) ** d if m else np.empty(0)
            keep = (
                (sup >= lo) & (sup < hi)
                & np.all((s >= 0.0) & (s < 1.0), axis=1)
                & (u * r2d < lo ** (2 * d))
            )
            ts.append(t[keep])
            ss.append(s[keep])
    t = np.concatenate(ts) if ts else np.empty((0, d))
    s = np.concatenate(ss) if ss else np.empty((0, d))
    return PoissonCloud(d, beta, float(epsilon), word, t, s)


def expected_cloud_size_d1(beta: float, epsilon: float) -> float:
    """Mean number of cloud points for ``d = 1``: ``beta (1/eps - 1 + ln eps)``."""
    return beta * (1.0 / epsilon - 1.0 + math.log(epsilon))


def discretize_cloud(cloud: PoissonCloud, n: int) -> Configuration:
    """Configuration on ``{0..n-1}^d`` with an edge for every cloud point joining cells at sup distance >= 2."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if n * cloud.min_separation > 1.0 + 1e-12:
        raise ValueError(f"scale {n} exceeds 1/epsilon = {1.0 / cloud.min_separation:g}")
    box = BoxSpec(cloud.d, n)
    kernel = KernelSpec(Family.EXACT_CUBE, cloud.beta)
    if len(cloud) == 0:
        return Configuration(box, kernel, cloud.seed, np.empty((0, 2), np.int64), "cloud")
    u = np.minimum(np.floor(cloud.t * n).astype(np.int64), n - 1)
    v = np.minimum(np.floor(cloud.s * n).astype(np.int64), n - 1)
    far = np.abs(u - v).max(axis=1) >= 2
    a = box.index_array(u[far])
    b = box.index_array(v[far])
    return Configuration(box, kernel, cloud.seed, _canonical_edges(a, b), "cloud")


def couple_scales(cloud: PoissonCloud, scales: Sequence[int]) -> list:
    return [discretize_cloud(cloud, n) for n in scales]


def regenerate(config: Configuration) -> Configuration:
    """Redraw a directly sampled configuration from its kernel, box and seed."""
    if config.source != "box":
        raise ValueError("only directly sampled configurations can be regenerated from the header")
    return sample_box(config.kernel, config.box, config.seed)


__all__ = [
    "BoxSpec",
    "Configuration",
    "PoissonCloud",
    "StreamKey",
    "sample_box",
    "sample_coupled",
    "sample_coupled_kernels",
    "sample_poisson_cloud",
    "discretize_cloud",
    "couple_scales",
    "half_space_deltas",
    "class_probabilities",
    "expected_cloud_size_d1",
    "regenerate",
]
