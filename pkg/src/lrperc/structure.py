"""Structural statistics: sphere connections, connected sets, edge counts, and the
cut points and separation points of one-dimensional configurations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import core
from .graph import LatticeGraph
from .kernel import Family, KernelSpec, block_offsets, connection_probabilities, expected_degree
from .rng import stream_uniforms
from .sampler import BoxSpec, Configuration, class_probabilities, half_space_deltas
from .stats import EstimateCI, run_replicates

MAX_SET_SIZE = 6
MAX_PAIRS_DP = 10_000


# ---------------------------------------------------------------------------
# sphere connection
# ---------------------------------------------------------------------------

class SphereConnection(NamedTuple):
    """``P(0 ~ S_{>=k})`` from a finite window of sup-radius ``radius``.

    ``window`` is the Monte Carlo estimate for edges inside the window.
    ``tail`` is the probability of an edge beyond the window when it is known
    exactly (d = 1, ExactCube), else ``None``; ``tail_upper`` bounds it.
    ``estimate`` folds the exact tail in when available.
    """

    k: int
    radius: int
    window: EstimateCI
    tail: float | None
    tail_upper: float
    estimate: float
    stderr: float


def _sphere_chunk(payload, words):
    probs = payload
    out = np.empty(len(words), dtype=np.uint8)
    for i, w in enumerate(words):
        out[i] = np.any(stream_uniforms(int(w), 0, len(probs)) < probs)
    return out


def sphere_window_probabilities(kernel: KernelSpec, d: int, k: int, radius: int) -> np.ndarray:
    r = np.arange(-radius, radius + 1)
    pts = np.stack(np.meshgrid(*([r] * d), indexing="ij"), axis=-1).reshape(-1, d)
    pts = pts[np.abs(pts).max(axis=1) >= k]
    return np.ascontiguousarray(connection_probabilities(kernel, pts))


def sphere_connection_probability(kernel: KernelSpec, d: int, k: int, replicates: int, seed: int,
                                  radius: int | None = None, workers: int | None = None) -> SphereConnection:
    if k < 2:
        raise ValueError("k must be at least 2")
    R = 4 * k if radius is None else int(radius)
    if R < 4 * k:
        raise ValueError("window radius must be at least 4k")
    probs = sphere_window_probabilities(kernel, d, k, R)
    ind = run_replicates(_sphere_chunk, probs, seed, f"sphere/d={d}/k={k}/R={R}", replicates, workers)
    window = EstimateCI.from_samples(ind, seed, f"P(0~S>={k}) within radius {R}")
    tail_upper = kernel.beta * 50.0**d * (R + 1.0) ** (-d)
    if d == 1 and kernel.family is Family.EXACT_CUBE:
        # the interactions beyond R telescope: sum_{j>R} ln(j^2/(j^2-1)) = ln((R+1)/R)
        keep = (R / (R + 1.0)) ** (2.0 * kernel.beta)
        tail = 1.0 - keep
        est = 1.0 - (1.0 - window.mean) * keep
        return SphereConnection(k, R, window, tail, tail_upper, est, window.stderr * keep)
    return SphereConnection(k, R, window, None, tail_upper, window.mean, window.stderr)


def sphere_connection_d1_exact(beta: float, k: int) -> float:
    """``1 - ((k-1)/k)^(2 beta)`` for d = 1 and the ExactCube kernel."""
    return 1.0 - ((k - 1.0) / k) ** (2.0 * beta)


# ---------------------------------------------------------------------------
# connected sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConnectedSetReport:
    k: int
    count: int
    max_avg_degree: float
    high_degree: bool | None = None


def enumerate_connected_sets(graph: LatticeGraph, k_max: int, root=None,
                             mu: float | None = None) -> list:
    """Connected vertex sets containing ``root`` (default: the box origin), by size.

    When ``mu`` is given, ``high_degree`` flags sizes where some set reaches
    an average degree of at least ``20 mu``.
    """
    if not 1 <= k_max <= MAX_SET_SIZE:
        raise ValueError(f"k_max must lie in [1, {MAX_SET_SIZE}]")
    r = 0 if root is None else graph.box.index(tuple(root))
    deg = core.degrees(graph.n, graph.d, graph.indptr)
    counts, best = core.connected_sets(graph.n, graph.d, graph.indptr, graph.indices, deg, r, k_max)
    out = []
    for k in range(1, k_max + 1):
        avg = best[k] / k if counts[k] else 0.0
        flag = None if mu is None else bool(counts[k] and avg >= 20.0 * mu)
        out.append(ConnectedSetReport(k, int(counts[k]), float(avg), flag))
    return out


def _consets_chunk(payload, words):
    n, d, deltas, probs, root, kmax = payload
    out = np.empty((len(words), 2, kmax + 1), dtype=np.int64)
    nv = n**d
    for i, w in enumerate(words):
        a, b = core.sample_edges_skip(n, d, deltas, probs, int(w))
        indptr, indices = core.build_csr(nv, a, b)
        deg = core.degrees(n, d, indptr)
        out[i, 0], out[i, 1] = core.connected_sets(n, d, indptr, indices, deg, root, kmax)
    return out


class ConnectedSetStudy(NamedTuple):
    mu: float
    k: np.ndarray
    mean_count: list          # EstimateCI per k
    bound: np.ndarray         # 4^k mu^k
    event_freq: list          # EstimateCI per k of {max avg degree >= 20 mu}
    event_bound: np.ndarray   # exp(-4 k mu)


def connected_set_study(kernel: KernelSpec, box: BoxSpec, root, k_max: int, replicates: int,
                        seed: int, workers: int | None = None) -> ConnectedSetStudy:
    if not 1 <= k_max <= MAX_SET_SIZE:
        raise ValueError(f"k_max must lie in [1, {MAX_SET_SIZE}]")
    mu = expected_degree(kernel, box.d).value
    payload = (box.n, box.d, half_space_deltas(box.d, box.n), class_probabilities(kernel, box.d, box.n),
               box.index(tuple(root)), k_max)
    res = run_replicates(_consets_chunk, payload, seed, f"consets/d={box.d}/n={box.n}", replicates, workers)
    ks = np.arange(1, k_max + 1)
    counts = res[:, 0, 1:]
    avg = res[:, 1, 1:] / ks[None, :]
    events = (avg >= 20.0 * mu).astype(float)
    return ConnectedSetStudy(
        mu, ks,
        [EstimateCI.from_samples(counts[:, j], seed, f"|CS_{k}|") for j, k in enumerate(ks)],
        (4.0 * mu) ** ks,
        [EstimateCI.from_samples(events[:, j], seed, f"avgdeg event k={k}") for j, k in enumerate(ks)],
        np.exp(-4.0 * ks * mu),
    )


# ---------------------------------------------------------------------------
# degrees
# ---------------------------------------------------------------------------

def _center_degree_chunk(payload, words):
    n, d, deltas, probs, center = payload
    out = np.empty(len(words), dtype=np.int64)
    for i, w in enumerate(words):
        a, b = core.sample_edges_skip(n, d, deltas, probs, int(w))
        out[i] = np.count_nonzero(a == center) + np.count_nonzero(b == center)
    return out + (3**d - 1)


class DegreeStudy(NamedTuple):
    empirical: EstimateCI
    expected_in_box: float
    mu: float
    deficit: float
    bound: float


def center_degree_study(kernel: KernelSpec, d: int, n: int, replicates: int, seed: int,
                        workers: int | None = None) -> DegreeStudy:
    """Degree of the centre of an odd box against ``mu`` minus the mass outside the box."""
    if n % 2 == 0 or n < 3:
        raise ValueError("n must be odd and at least 3")
    box = BoxSpec(d, n)
    c = box.index((n // 2,) * d)
    payload = (n, d, half_space_deltas(d, n), class_probabilities(kernel, d, n), c)
    deg = run_replicates(_center_degree_chunk, payload, seed, f"degree/d={d}/n={n}", replicates, workers)
    r = np.arange(-(n // 2), n // 2 + 1)
    pts = np.stack(np.meshgrid(*([r] * d), indexing="ij"), axis=-1).reshape(-1, d)
    pts = pts[np.abs(pts).max(axis=1) >= 1]
    in_box = float(np.sum(connection_probabilities(kernel, pts)))
    est = expected_degree(kernel, d)
    return DegreeStudy(EstimateCI.from_samples(deg, seed, "centre degree"), in_box, est.value,
                       est.value - in_box, est.bound)


# ---------------------------------------------------------------------------
# conditioned edge counts
# ---------------------------------------------------------------------------

class ConditionedCount(NamedTuple):
    mean: float
    conditional_mean: float
    p_zero: float


def poisson_binomial(probs: Sequence[float]) -> np.ndarray:
    """Exact law of a sum of independent Bernoulli variables (dynamic programming)."""
    law = np.zeros(len(probs) + 1)
    law[0] = 1.0
    for j, p in enumerate(probs):
        law[1:j + 2] = law[1:j + 2] * (1.0 - p) + law[:j + 1] * p
        law[0] *= 1.0 - p
    return law


def conditioned_edge_count(kernel: KernelSpec, disp_u, disp_v, n: int) -> ConditionedCount:
    """``E[X]`` and ``E[X | X >= 1]`` for the number of edges between blocks ``V_u^n`` and ``V_v^n``."""
    u = np.asarray(disp_u, dtype=np.int64)
    v = np.asarray(disp_v, dtype=np.int64)
    if u.shape != v.shape or np.array_equal(u, v):
        raise ValueError("blocks must be distinct and of equal dimension")
    d = len(u)
    if n ** (2 * d) > MAX_PAIRS_DP:
        raise ValueError(f"{n ** (2 * d)} vertex pairs exceed the exact limit {MAX_PAIRS_DP}")
    offs, mult = block_offsets(n, d)
    p = connection_probabilities(kernel, n * (v - u)[None, :] + offs)
    probs = np.repeat(p, mult)
    law = poisson_binomial(probs)
    mean = float(np.sum(probs))
    p0 = float(law[0])
    if p0 >= 1.0:
        return ConditionedCount(mean, math.nan, p0)
    cond = float(np.dot(np.arange(len(law)), law) / (1.0 - p0))
    if cond > 1.0 + mean + 1e-12:
        raise AssertionError(f"E[X | X>=1] = {cond} exceeds 1 + E[X] = {1 + mean}")
    return ConditionedCount(mean, cond, p0)


# ---------------------------------------------------------------------------
# cut points and separation points (d = 1)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutPointReport:
    m: int
    positions: tuple

    @property
    def count(self) -> int:
        return len(self.positions)


def _require_d1(config: Configuration):
    if config.box.d != 1:
        raise ValueError("defined for d = 1 only")


def cut_indicator(m: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Boolean array over ``w = 0..m-1``: no edge ``u < w < v``. Ends are never cut points."""
    right = np.full(m, -1, dtype=np.int64)
    np.maximum.at(right, a, b)
    reach = np.maximum.accumulate(right)  # reach[u] = furthest right endpoint of edges starting <= u
    ok = np.zeros(m, dtype=bool)
    if m >= 3:
        w = np.arange(1, m - 1)
        ok[1:m - 1] = reach[w - 1] <= w
    return ok


def cut_points_d1(config: Configuration) -> CutPointReport:
    _require_d1(config)
    m = config.box.n
    ok = cut_indicator(m, config.edges[:, 0], config.edges[:, 1])
    return CutPointReport(m, tuple(int(w) for w in np.flatnonzero(ok)))


def cut_point_bound(beta: float, m: int) -> tuple:
    """The bound on the expected number of cut points and which branch it came from."""
    if beta < 1.0:
        return 20.0 / (1.0 - beta) * m ** (1.0 - beta), "beta<1"
    if beta <= 2.0:
        return 10.0 + 8.0 * math.log(m), "1<=beta<=2"
    return 20.0, "beta>2 (constant branch; derivation covers beta<=2)"


class CutPointCount(NamedTuple):
    exact: float
    bound: float
    branch: str


def cut_point_count_bound(beta: float, m: int) -> CutPointCount:
    """Exact ``sum_w ((w+1)(m-w)/m)^(-beta)`` over ``w = 1..m-2`` with its bound."""
    if m < 3:
        raise ValueError("m must be at least 3")
    w = np.arange(1, m - 1, dtype=float)
    exact = math.fsum(((w + 1.0) * (m - w) / m) ** (-beta))
    bound, branch = cut_point_bound(beta, m)
    if exact > bound:
        raise AssertionError(f"expected cut points {exact} exceed {bound}")
    return CutPointCount(exact, bound, branch)


@dataclass(frozen=True)
class SeparationReport:
    blocks: int
    block_scale: int
    positions: tuple

    @property
    def count(self) -> int:
        return len(self.positions)


def separation_indicator(M: int, n: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Boolean array over blocks ``0..M-1`` marking separation points.

    An edge between blocks ``x < y`` with ``y - x >= 2`` rules out every
    ``w`` in ``[x, y]``; the survivors among odd ``1 <= w <= M-2`` qualify.
    """
    bx, by = a // n, b // n
    lo, hi = np.minimum(bx, by), np.maximum(bx, by)
    far = hi - lo >= 2
    cover = np.zeros(M + 1, dtype=np.int64)
    np.add.at(cover, lo[far], 1)
    np.add.at(cover, hi[far] + 1, -1)
    covered = np.cumsum(cover)[:M] > 0
    ok = ~covered
    idx = np.arange(M)
    ok &= (idx % 2 == 1) & (idx >= 1) & (idx <= M - 2)
    return ok


def separation_points_d1(config: Configuration, block_scale: int = 1) -> SeparationReport:
    _require_d1(config)
    n = int(block_scale)
    if n < 1 or config.box.n % n:
        raise ValueError("box side must be a multiple of the block scale")
    M = config.box.n // n
    ok = separation_indicator(M, n, config.edges[:, 0], config.edges[:, 1])
    return SeparationReport(M, n, tuple(int(w) for w in np.flatnonzero(ok)))


def interval_interaction(a: float, b: float, c: float, e: float) -> float:
    """``int_a^b int_c^e (y - x)^(-2) dy dx`` for ``b <= c``."""
    return math.log((c - a) * (e - b) / ((c - b) * (e - a)))


def separation_probability(beta: float, M: int, w: int) -> float:
    """Exact probability that ``w`` is a separation point (d = 1, ExactCube, any block scale)."""
    if not 1 <= w <= M - 2:
        raise ValueError("need 1 <= w <= M - 2")
    j_left = interval_interaction(0.0, w - 1.0, w, w + 1.0) if w >= 2 else 0.0
    j_right = interval_interaction(w, w + 1.0, w + 2.0, M) if w <= M - 3 else 0.0
    j_bridge = interval_interaction(0.0, w, w + 1.0, M)
    return math.exp(-beta * (j_left + j_right + j_bridge))


def _d1_chunk(payload, words):
    kind, m, n, deltas, probs = payload
    width = m if kind == "cut" else m // n
    out = np.empty((len(words), width), dtype=bool)
    for i, w in enumerate(words):
        a, b = core.sample_edges_skip(m, 1, deltas, probs, int(w))
        out[i] = cut_indicator(m, a, b) if kind == "cut" else separation_indicator(width, n, a, b)
    return out


def cut_point_frequencies(kernel: KernelSpec, m: int, replicates: int, seed: int,
                          workers: int | None = None) -> np.ndarray:
    """Per-replicate cut-point indicators, shape ``(replicates, m)``."""
    payload = ("cut", m, 1, half_space_deltas(1, m), class_probabilities(kernel, 1, m))
    return run_replicates(_d1_chunk, payload, seed, f"cut/m={m}", replicates, workers)


def separation_frequencies(kernel: KernelSpec, M: int, block_scale: int, replicates: int, seed: int,
                           workers: int | None = None) -> np.ndarray:
    """Per-replicate separation indicators over blocks, shape ``(replicates, M)``."""
    m = M * block_scale
    payload = ("sep", m, block_scale, half_space_deltas(1, m), class_probabilities(kernel, 1, m))
    return run_replicates(_d1_chunk, payload, seed, f"sep/M={M}/n={block_scale}", replicates, workers)




def _block_chunk(payload, words):
    n_total, deltas, probs, lo_a, hi_a, lo_b, hi_b = payload
    out = np.empty(len(words), dtype=np.uint8)
    for i, w in enumerate(words):
        a, b = core.sample_edges_skip(n_total, 1, deltas, probs, int(w))
        in_a = (a >= lo_a) & (a < hi_a)
        in_b = (b >= lo_b) & (b < hi_b)
        out[i] = np.any(in_a & in_b)
    return out


def block_connection_frequency(kernel: KernelSpec, block_disp: int, n: int, replicates: int, seed: int,
                               workers: int | None = None) -> EstimateCI:
    """Monte Carlo frequency of an edge between ``V_0^n`` and ``V_k^n`` (d = 1, ``k >= 2``)."""
    if block_disp < 2:
        raise ValueError("blocks must be at block distance >= 2")
    m = (block_disp + 1) * n
    payload = (m, half_space_deltas(1, m), class_probabilities(kernel, 1, m),
               0, n, block_disp * n, m)
    ind = run_replicates(_block_chunk, payload, seed, f"block/k={block_disp}/n={n}", replicates, workers)
    return EstimateCI.from_samples(ind, seed, f"block connection k={block_disp} n={n}")


__all__ = [
    "SphereConnection",
    "sphere_connection_probability",
    "sphere_connection_d1_exact",
    "ConnectedSetReport",
    "enumerate_connected_sets",
    "connected_set_study",
    "center_degree_study",
    "poisson_binomial",
    "conditioned_edge_count",
    "CutPointReport",
    "cut_points_d1",
    "cut_point_bound",
    "cut_point_count_bound",
    "SeparationReport",
    "separation_points_d1",
    "separation_probability",
    "interval_interaction",
    "cut_point_frequencies",
    "separation_frequencies",
    "block_connection_frequency",
]
