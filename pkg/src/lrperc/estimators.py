"""Monte Carlo estimators for distance growth in long-range percolation.

``Lambda(n)`` is estimated from the two corner pairs of the box,
``D(0, (n-1) e_1)`` and ``D(0, (n-1) 1)``; the true maximum over all pairs
differs from the larger corner mean by at most a factor ``6d``. All
statistics are computed from replicate streams keyed by
``(master seed, tag, replica)`` where the tag names the experiment and the
box size, so different sizes use independent samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import core
from .graph import LatticeGraph
from .kernel import Family, KernelSpec
from .sampler import (BoxSpec, class_probabilities, couple_scales, half_space_deltas, sample_coupled,
                      sample_poisson_cloud)
from .stats import EstimateCI, run_replicates

USABLE_REL_STDERR = 0.05
MIN_FIT_POINTS = 4


# ---------------------------------------------------------------------------
# Lambda
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaEstimate:
    d: int
    n: int
    kernel: KernelSpec
    corner_e1: EstimateCI
    corner_ones: EstimateCI

    @property
    def beta(self) -> float:
        return self.kernel.beta

    @property
    def lambda_hat(self) -> float:
        return max(self.corner_e1.mean, self.corner_ones.mean) + 1.0

    @property
    def stderr(self) -> float:
        c = self.corner_e1 if self.corner_e1.mean >= self.corner_ones.mean else self.corner_ones
        return c.stderr

    @property
    def bracket_upper(self) -> float:
        """Upper end of the bracket for the max over all pairs: ``6d E[D(0,(n-1)e_1)] + 1``."""
        return 6.0 * self.d * self.corner_e1.mean + 1.0


def _corner_targets(d: int, n: int) -> np.ndarray:
    return np.array([(n - 1) * n ** (d - 1), n**d - 1], dtype=np.int64)


def _bfs_chunk(payload, words):
    n, d, deltas, probs, sources, targets, labels, reduce_min = payload
    return core.replicate_bfs(n, d, deltas, probs, words, sources, targets, labels, reduce_min)


def corner_distances(kernel: KernelSpec, d: int, n: int, replicates: int, seed: int,
                     tag: str | None = None, workers: int | None = None) -> np.ndarray:
    """``(replicates, 2)`` array of ``D(0,(n-1)e_1)`` and ``D(0,(n-1)1)``."""
    if n == 1:
        return np.zeros((replicates, 2), dtype=np.int32)
    payload = (n, d, half_space_deltas(d, n), class_probabilities(kernel, d, n),
               np.zeros(1, dtype=np.int64), _corner_targets(d, n), None, False)
    tag = tag or f"corner/{kernel.family.value}/d={d}/n={n}"
    return run_replicates(_bfs_chunk, payload, seed, tag, replicates, workers)


def pair_distances(kernel: KernelSpec, d: int, n: int, u, v, replicates: int, seed: int,
                   workers: int | None = None) -> np.ndarray:
    """Samples of ``D(u, v)`` in the box ``{0..n-1}^d``, one per replicate."""
    box = BoxSpec(d, n)
    iu, iv = box.index(tuple(u)), box.index(tuple(v))
    if iu == iv:
        return np.zeros(replicates, dtype=np.int32)
    payload = (n, d, half_space_deltas(d, n), class_probabilities(kernel, d, n),
               np.array([iu], dtype=np.int64), np.array([iv], dtype=np.int64), None, False)
    tag = f"pair/{kernel.family.value}/d={d}/n={n}/{iu}-{iv}"
    return run_replicates(_bfs_chunk, payload, seed, tag, replicates, workers)[:, 0]


def estimate_lambda(kernel: KernelSpec, d: int, n: int, replicates: int, seed: int,
                    workers: int | None = None) -> LambdaEstimate:
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    dist = corner_distances(kernel, d, n, replicates, seed, workers=workers)
    return LambdaEstimate(
        d, n, kernel,
        EstimateCI.from_samples(dist[:, 0], seed, f"D(0,(n-1)e1) n={n}"),
        EstimateCI.from_samples(dist[:, 1], seed, f"D(0,(n-1)1) n={n}"),
    )


# ---------------------------------------------------------------------------
# exponent fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaFit:
    theta_hat: float
    theta_stderr: float
    intercept: float
    r_squared: float
    residuals: tuple
    n_grid: tuple
    method: str
    subadditive_inf: float
    flags: tuple = ()
    dropped: tuple = field(default=())


def _power_fit(x, y, var):
    """Weighted least squares of ``y`` on ``x``; OLS if any variance is zero."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    var = np.asarray(var, dtype=float)
    known = bool(np.all(var > 0))
    w = 1.0 / var if known else np.ones_like(x)
    xm = np.sum(w * x) / np.sum(w)
    ym = np.sum(w * y) / np.sum(w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    icpt = ym - slope * xm
    res = y - (icpt + slope * x)
    ss_res = float(np.sum(w * res**2))
    ss_tot = float(np.sum(w * (y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    dof = len(x) - 2
    if known:
        inflate = max(1.0, math.sqrt(ss_res / dof)) if dof > 0 else 1.0
        se = math.sqrt(1.0 / sxx) * inflate
    else:
        se = math.sqrt(ss_res / dof / sxx) if dof > 0 else 0.0
    return float(slope), float(se), float(icpt), float(r2), res


def fit_theta(n_grid: Sequence[int], lambda_hat: Sequence[float], stderr: Sequence[float] | None = None,
              *, min_points: int = MIN_FIT_POINTS) -> ThetaFit:
    """Fit ``log Lambda = a + theta log n`` over the usable grid points.

    A point is usable when ``n >= 2`` and its relative standard error is
    below 5%. Non-monotone or tied neighbours are flagged, not removed.
    """
    n = np.asarray(n_grid, dtype=float)
    lam = np.asarray(lambda_hat, dtype=float)
    se = np.zeros_like(lam) if stderr is None else np.asarray(stderr, dtype=float)
    order = np.argsort(n)
    n, lam, se = n[order], lam[order], se[order]
    usable = (n >= 2) & (se / lam < USABLE_REL_STDERR) & (lam > 0)
    dropped = tuple(int(v) for v in n[~usable])
    flags = []
    if dropped:
        flags.append("dropped:" + ",".join(map(str, dropped)))
    if int(usable.sum()) < min_points:
        raise ValueError(f"only {int(usable.sum())} usable grid points, need {min_points}")
    n, lam, se = n[usable], lam[usable], se[usable]
    steps = np.diff(lam)
    if np.any(steps < 0):
        flags.append("non-monotone")
    if np.any(steps == 0):
        flags.append("tie")
    slope, sse, icpt, r2, res = _power_fit(np.log(n), np.log(lam), (se / lam) ** 2)
    sub = float(np.min(np.log(lam) / np.log(n)))
    return ThetaFit(slope, sse, icpt, r2, tuple(float(r) for r in res), tuple(int(v) for v in n),
                    "loglog_wls" if np.all(se > 0) else "loglog_ols", sub, tuple(flags), dropped)


def fit_theta_estimates(estimates: Sequence[LambdaEstimate], **kw) -> ThetaFit:
    return fit_theta([e.n for e in estimates], [e.lambda_hat for e in estimates],
                     [e.stderr for e in estimates], **kw)


def monotonicity_z(estimates: Sequence[LambdaEstimate]) -> list:
    """z-scores of consecutive increments ``Lambda(n_{i+1}) - Lambda(n_i)``."""
    out = []
    for a, b in zip(estimates, estimates[1:]):
        diff = b.lambda_hat - a.lambda_hat
        s = math.hypot(a.stderr, b.stderr)
        out.append(0.0 if diff == 0.0 and s == 0.0 else (diff / s if s > 0 else math.copysign(math.inf, diff)))
    return out


def lambda_series(kernel: KernelSpec, d: int, n_grid: Sequence[int], replicates: int, seed: int,
                  workers: int | None = None) -> list:
    return [estimate_lambda(kernel, d, n, replicates, seed, workers) for n in n_grid]


# ---------------------------------------------------------------------------
# submultiplicativity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubmultReport:
    m: int
    n: int
    lambda_mn: LambdaEstimate
    lambda_m: LambdaEstimate
    lambda_n: LambdaEstimate

    @property
    def product(self) -> float:
        return self.lambda_m.lambda_hat * self.lambda_n.lambda_hat

    @property
    def z_score(self) -> float:
        lm, ln = self.lambda_m.lambda_hat, self.lambda_n.lambda_hat
        sm, sn = self.lambda_m.stderr, self.lambda_n.stderr
        if self.m == self.n:
            var_prod = (2.0 * lm * sm) ** 2
        else:
            var_prod = (ln * sm) ** 2 + (lm * sn) ** 2
        s = math.sqrt(self.lambda_mn.stderr**2 + var_prod)
        num = self.lambda_mn.lambda_hat - self.product
        if s == 0.0:
            return 0.0 if num <= 0.0 else math.inf
        return num / s


def check_submultiplicativity(kernel: KernelSpec, d: int, m: int, n: int, replicates: int, seed: int,
                              workers: int | None = None) -> SubmultReport:
    if m < 2 or n < 2:
        raise ValueError("m and n must be at least 2")
    lm = estimate_lambda(kernel, d, m, replicates, seed, workers)
    ln = lm if n == m else estimate_lambda(kernel, d, n, replicates, seed, workers)
    lmn = estimate_lambda(kernel, d, m * n, replicates, seed, workers)
    return SubmultReport(m, n, lmn, lm, ln)


# ---------------------------------------------------------------------------
# theta against beta
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaBetaRow:
    beta: float
    theta_hat: float
    theta_stderr: float
    theta_log_beta: float
    fit: ThetaFit | None


def theta_vs_beta(family: Family, d: int, beta_grid: Sequence[float], n_grid: Sequence[int],
                  replicates: int, seed: int, workers: int | None = None) -> list:
    """One exponent fit per beta, plus the ``beta = 0`` reference row ``theta = 1``."""
    rows = [ThetaBetaRow(0.0, 1.0, 0.0, math.nan, None)]
    for beta in beta_grid:
        kern = KernelSpec(family, beta)
        fit = fit_theta_estimates(lambda_series(kern, d, n_grid, replicates, seed, workers))
        tlb = fit.theta_hat * math.log(beta) if beta >= 2 else math.nan
        rows.append(ThetaBetaRow(float(beta), fit.theta_hat, fit.theta_stderr, tlb, fit))
    return rows


def separation_z(rows: Sequence[ThetaBetaRow]) -> list:
    """``(theta_i - theta_{i+1}) / combined stderr`` for consecutive grid entries."""
    out = []
    for a, b in zip(rows, rows[1:]):
        s = math.hypot(a.theta_stderr, b.theta_stderr)
        out.append((a.theta_hat - b.theta_hat) / s if s > 0 else math.inf)
    return out


# ---------------------------------------------------------------------------
# tails and moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailProfile:
    n: int
    theta_hat: float
    values: np.ndarray = field(repr=False)   # sorted support of D / n^theta
    survival: np.ndarray = field(repr=False)  # P(X > value)
    eta_hat: float
    eta_stderr: float
    status: str
    upper_threshold: float   # 1 / (1 - theta)
    divergence_threshold: float  # d / (1 - theta)


def stretched_exponential_fit(x: np.ndarray, min_tail: int = 100):
    """Slope of ``log(-log S(s))`` against ``log s`` over the top decile of ``x``.

    Returns ``(eta, stderr, status)``; ``eta`` is NaN unless status is ``"ok"``.
    """
    x = np.sort(np.asarray(x, dtype=float))
    if len(x) == 0 or x[0] == x[-1]:
        return math.nan, math.nan, "deterministic"
    cut = np.quantile(x, 0.9)
    if np.count_nonzero(x >= cut) < min_tail:
        return math.nan, math.nan, "insufficient tail mass"
    vals = np.unique(x[x >= cut])
    surv = 1.0 - np.searchsorted(x, vals, side="right") / len(x)
    ok = (surv > 0) & (surv < 1) & (vals > 0)
    if np.count_nonzero(ok) < 2:
        return math.nan, math.nan, "insufficient tail mass"
    xs, ys = np.log(vals[ok]), np.log(-np.log(surv[ok]))
    if len(xs) == 2:
        return float((ys[1] - ys[0]) / (xs[1] - xs[0])), math.nan, "ok"
    slope, se, _, _, _ = _power_fit(xs, ys, np.zeros_like(xs))
    return slope, se, "ok"


def tail_profile(kernel: KernelSpec, d: int, n: int, replicates: int, theta_hat: float, seed: int,
                 workers: int | None = None, *, min_replicates: int = 10_000) -> TailProfile:
    if replicates < min_replicates:
        raise ValueError(f"tail profiles need at least {min_replicates} replicates")
    dist = corner_distances(kernel, d, n, replicates, seed, workers=workers)[:, 1]
    x = dist / n**theta_hat
    vals, counts = np.unique(x, return_counts=True)
    surv = 1.0 - np.cumsum(counts) / len(x)
    eta, se, status = stretched_exponential_fit(x)
    gap = 1.0 - theta_hat
    return TailProfile(n, theta_hat, vals, surv, eta, se, status,
                       1.0 / gap if gap > 0 else math.inf, d / gap if gap > 0 else math.inf)


def exponential_moment(kernel: KernelSpec, d: int, n: int, replicates: int, theta_hat: float, seed: int,
                       t: float = 1.0, power: float = 0.4, workers: int | None = None) -> EstimateCI:
    """``E[exp(t (D / n^theta)^power)]`` for the far corner."""
    dist = corner_distances(kernel, d, n, replicates, seed, workers=workers)[:, 1]
    return EstimateCI.from_samples(np.exp(t * (dist / n**theta_hat) ** power), seed,
                                   f"exp moment n={n}")


@dataclass(frozen=True)
class MomentRatio:
    n: int
    order: int
    ratio: float
    stderr: float
    replicates: int


def moment_ratio_from_samples(x, order: int, n: int = 0) -> MomentRatio:
    """``E[X^r] / E[X]^r`` with a delta-method standard error."""
    x = np.asarray(x, dtype=float)
    R = len(x)
    m1 = float(np.mean(x))
    mr = float(np.mean(x**order))
    ratio = mr / m1**order
    cov = np.cov(np.stack([x**order, x]), ddof=1) / R
    grad = np.array([1.0 / m1**order, -order * mr / m1 ** (order + 1)])
    var = float(grad @ cov @ grad)
    return MomentRatio(n, order, ratio, math.sqrt(max(var, 0.0)), R)


def moment_ratio(kernel: KernelSpec, d: int, n: int, replicates: int, order: int, seed: int,
                 workers: int | None = None, *, min_replicates: int = 10_000) -> MomentRatio:
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    if replicates < min_replicates:
        raise ValueError(f"need at least {min_replicates} replicates")
    dist = corner_distances(kernel, d, n, replicates, seed, workers=workers)[:, 1]
    return moment_ratio_from_samples(dist, order, n)


def log_slope(n_grid, values, stderr):
    """Slope (and stderr) of ``log value`` against ``log n`` by weighted least squares."""
    v = np.asarray(values, dtype=float)
    s = np.asarray(stderr, dtype=float)
    slope, se, _, _, _ = _power_fit(np.log(np.asarray(n_grid, dtype=float)), np.log(v), (s / v) ** 2)
    return slope, se


# ---------------------------------------------------------------------------
# quantiles of point-to-box and box-to-box distances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantileBand:
    n: int
    statistic: str
    lambda_hat: float
    q01: float
    q99: float
    samples: np.ndarray = field(repr=False)

    @property
    def band(self) -> tuple:
        return self.q01 / self.lambda_hat, self.q99 / self.lambda_hat


def point_to_box_distances(kernel: KernelSpec, d: int, n: int, replicates: int, seed: int,
                           halo: int | None = None, workers: int | None = None) -> np.ndarray:
    """``D(0, B_n(0)^c)`` inside the window ``[-(n+halo), n+halo]^d`` (default halo ``n``)."""
    h = n if halo is None else int(halo)
    side = 2 * (n + h) + 1
    box = BoxSpec(d, side, (-(n + h),) * d)
    coords = box.coords_array(np.arange(box.num_vertices))
    targets = np.flatnonzero(np.abs(coords).max(axis=1) > n).astype(np.int64)
    src = np.array([box.index((0,) * d)], dtype=np.int64)
    payload = (side, d, half_space_deltas(d, side), class_probabilities(kernel, d, side),
               src, targets, None, True)
    return run_replicates(_bfs_chunk, payload, seed, f"p2box/d={d}/n={n}/h={h}", replicates, workers)


def box_to_box_indirect(kernel: KernelSpec, d: int, n: int, replicates: int, seed: int,
                        workers: int | None = None) -> np.ndarray:
    """``D*(V_0^n, B)`` with ``B`` the blocks ``V_u^n``, ``|u|_inf = 2``, in the window ``[-2n, 3n-1]^d``.

    Only blocks at sup-distance 2 are kept: any path to a farther block
    crosses them first, so the minimum is unchanged.
    """
    side = 5 * n
    box = BoxSpec(d, side, (-2 * n,) * d)
    coords = box.coords_array(np.arange(box.num_vertices))
    blocks = np.floor_divide(coords, n)
    sup = np.abs(blocks).max(axis=1)
    labels = np.zeros(box.num_vertices, dtype=np.uint8)
    labels[sup == 0] = 1
    labels[sup >= 2] = 2
    sources = np.flatnonzero(labels == 1).astype(np.int64)
    targets = np.flatnonzero(labels == 2).astype(np.int64)
    payload = (side, d, half_space_deltas(d, side), class_probabilities(kernel, d, side),
               sources, targets, labels, True)
    out = run_replicates(_bfs_chunk, payload, seed, f"dstar/d={d}/n={n}", replicates, workers)
    return out


def quantile_point_to_box(kernel: KernelSpec, d: int, n: int, replicates: int, seed: int,
                          lambda_hat: float | None = None, indirect: bool = False,
                          workers: int | None = None, lambda_replicates: int = 10_000) -> QuantileBand:
    """1% and 99% quantiles of the point-to-box distance (or the indirect box distance)."""
    if replicates < 1000:
        raise ValueError("need at least 1000 replicates")
    if lambda_hat is None:
        lambda_hat = estimate_lambda(kernel, d, n, lambda_replicates, seed, workers).lambda_hat
    if indirect:
        x = box_to_box_indirect(kernel, d, n, replicates, seed, workers)
        stat = "Dstar(V0,far blocks)"
    else:
        x = point_to_box_distances(kernel, d, n, replicates, seed, workers=workers)
        stat = "D(0,B_n(0)^c)"
    if np.any(x < 0):
        raise RuntimeError("target set unreachable inside the window")
    q01, q99 = np.quantile(x, [0.01, 0.99], method="inverted_cdf")
    return QuantileBand(n, stat, float(lambda_hat), float(q01), float(q99), x)


# ---------------------------------------------------------------------------
# diameters
# ---------------------------------------------------------------------------

def _diameter_chunk(payload, words):
    n, d, deltas, probs = payload
    return core.replicate_diameter(n, d, deltas, probs, words)


@dataclass(frozen=True)
class DiameterScaling:
    n_grid: tuple
    diameters: tuple  # EstimateCI per n
    fit: ThetaFit
    flags: tuple


def diameter_samples(kernel: KernelSpec, d: int, n: int, replicates: int, seed: int,
                     cap: int = 100_000, workers: int | None = None) -> np.ndarray:
    if n**d > cap:
        raise ValueError(f"exact diameter of {n**d} vertices exceeds the cap {cap}")
    if n == 1:
        return np.zeros(replicates, dtype=np.int64)
    payload = (n, d, half_space_deltas(d, n), class_probabilities(kernel, d, n))
    return run_replicates(_diameter_chunk, payload, seed, f"diameter/d={d}/n={n}", replicates, workers)


def diameter_scaling(kernel: KernelSpec, d: int, n_grid: Sequence[int], replicates: int, seed: int,
                     cap: int = 100_000, workers: int | None = None) -> DiameterScaling:
    """Mean exact diameters per ``n`` and the exponent of ``E[dia] + 1`` against ``n``.

    The ``+1`` mirrors the definition of ``Lambda`` so that the pure lattice
    (``dia = n - 1``) has exponent exactly 1. ``n = 1`` is excluded from the fit.
    """
    flags = []
    ests = []
    for n in n_grid:
        x = diameter_samples(kernel, d, n, replicates, seed, cap, workers)
        ests.append(EstimateCI.from_samples(x, seed, f"diameter n={n}"))
    if any(n == 1 for n in n_grid):
        flags.append("n=1 excluded")
    fit = fit_theta(list(n_grid), [e.mean + 1.0 for e in ests], [e.stderr for e in ests])
    return DiameterScaling(tuple(n_grid), tuple(ests), fit, tuple(flags))


# ---------------------------------------------------------------------------
# scale coupling
# ---------------------------------------------------------------------------

def all_pairs_distances(graph: LatticeGraph) -> np.ndarray:
    nv = graph.box.num_vertices
    return np.stack([graph.bfs_idx([x]) for x in range(nv)])


def _scaling_chunk(payload, words):
    beta, d, n_fine, n_coarse = payload
    fine_box = BoxSpec(d, n_fine)
    coords = fine_box.coords_array(np.arange(fine_box.num_vertices))
    coarse_idx = BoxSpec(d, n_coarse).index_array((coords * n_coarse) // n_fine)
    out = np.empty((len(words), 4), dtype=np.int64)
    for i, w in enumerate(words):
        cloud = sample_poisson_cloud(beta, 1.0 / n_fine, int(w), d)
        fine, coarse = couple_scales(cloud, [n_fine, n_coarse])
        D = all_pairs_distances(LatticeGraph.from_configuration(fine))
        Dc = all_pairs_distances(LatticeGraph.from_configuration(coarse))[np.ix_(coarse_idx, coarse_idx)]
        out[i] = (D.size, np.count_nonzero(Dc > 3 * D), np.count_nonzero(Dc > 2 * D + 1),
                  int(np.max(Dc - 2 * D)))
    return out


@dataclass(frozen=True)
class ScalingCheck:
    d: int
    n_fine: int
    n_coarse: int
    clouds: int
    pairs: int
    violations: int            # D' > 3 D
    violations_2d_plus_1: int  # D' > 2 D + 1 (recorded, not asserted)
    max_excess_over_2d: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def scaling_coupling_check(beta: float, d: int, n_fine: int, n_coarse: int, clouds: int, seed: int,
                           workers: int | None = None) -> ScalingCheck:
    """Check ``D'(floor(n' u / n), floor(n' v / n)) <= 3 D(u, v)`` on shared Poisson clouds."""
    if n_coarse > n_fine:
        raise ValueError("the coarse scale must not exceed the fine scale")
    res = run_replicates(_scaling_chunk, (beta, d, n_fine, n_coarse), seed,
                         f"scaling/d={d}/{n_fine}->{n_coarse}", clouds, workers, chunk=256)
    return ScalingCheck(d, n_fine, n_coarse, clouds, int(res[:, 0].sum()), int(res[:, 1].sum()),
                        int(res[:, 2].sum()), int(res[:, 3].max()))


# ---------------------------------------------------------------------------
# kernel comparison
# ---------------------------------------------------------------------------

def _coupled_chunk(payload, words):
    kernels, d, n, with_diameter = payload
    box = BoxSpec(d, n)
    tgt = _corner_targets(d, n)
    out = np.empty((len(words), 2, 2), dtype=np.float64)
    for i, w in enumerate(words):
        confs = sample_coupled(kernels, box, int(w))
        for j, c in enumerate(confs):
            g = LatticeGraph.from_configuration(c)
            out[i, 0, j] = g.bfs_idx([0])[tgt[1]]
            out[i, 1, j] = (core.diameter_exact(n, d, g.indptr, g.indices) if with_diameter else math.nan)
    return out


@dataclass(frozen=True)
class KernelComparison:
    n: int
    corner_ratio: np.ndarray = field(repr=False)    # D_A / D_B per replicate
    diameter_ratio: np.ndarray = field(repr=False)
    identical_fraction: float

    def q99(self, which: str = "corner") -> tuple:
        """99% quantiles of the ratio and of its inverse."""
        r = self.corner_ratio if which == "corner" else self.diameter_ratio
        return float(np.quantile(r, 0.99)), float(np.quantile(1.0 / r, 0.99))


def kernel_comparison(kernel_a: KernelSpec, kernel_b: KernelSpec, d: int, n: int, replicates: int,
                      seed: int, with_diameter: bool = True, workers: int | None = None) -> KernelComparison:
    if kernel_a.beta != kernel_b.beta:
        raise ValueError("compared kernels must share beta")
    payload = ((kernel_a, kernel_b), d, n, with_diameter)
    tag = f"coupled/{kernel_a.family.value}/{kernel_b.family.value}/d={d}/n={n}"
    res = run_replicates(_coupled_chunk, payload, seed, tag, replicates, workers, chunk=256)
    corner = res[:, 0, 0] / res[:, 0, 1]
    dia = res[:, 1, 0] / res[:, 1, 1] if with_diameter else np.full(replicates, math.nan)
    same = float(np.mean((res[:, 0, 0] == res[:, 0, 1]) & ((res[:, 1, 0] == res[:, 1, 1]) | ~with_diameter)))
    return KernelComparison(n, corner, dia, same)


__all__ = [
    "EstimateCI",
    "LambdaEstimate",
    "ThetaFit",
    "corner_distances",
    "pair_distances",
    "estimate_lambda",
    "fit_theta",
    "fit_theta_estimates",
    "monotonicity_z",
    "lambda_series",
    "SubmultReport",
    "check_submultiplicativity",
    "ThetaBetaRow",
    "theta_vs_beta",
    "separation_z",
    "TailProfile",
    "stretched_exponential_fit",
    "tail_profile",
    "exponential_moment",
    "MomentRatio",
    "moment_ratio",
    "moment_ratio_from_samples",
    "log_slope",
    "QuantileBand",
    "point_to_box_distances",
    "box_to_box_indirect",
    "quantile_point_to_box",
    "DiameterScaling",
    "diameter_samples",
    "diameter_scaling",
    "ScalingCheck",
    "scaling_coupling_check",
    "all_pairs_distances",
    "KernelComparison",
    "kernel_comparison",
]
