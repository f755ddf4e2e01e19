"""The acceptance criteria as runnable checks.

Each ``criterion_NN`` function runs one criterion at its stated scale and
tolerance and returns a :class:`CriterionResult` with a pass flag, a one-line
summary and the supporting rows (in the standard output columns). ``scale``
multiplies every replicate count; values below 1 give quick smoke runs whose
statistical verdicts are not meaningful.

``verify`` in the CLI runs criteria 1 to 15; criterion 16 (reproducibility of
``verify`` itself) is run by :func:`criterion_16`, which invokes the CLI.
"""
from __future__ import annotations

import filecmp
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from . import kernel as kmod
from .estimators import (
    check_submultiplicativity,
    corner_distances,
    diameter_samples,
    estimate_lambda,
    fit_theta_estimates,
    kernel_comparison,
    lambda_series,
    log_slope,
    moment_ratio,
    monotonicity_z,
    quantile_point_to_box,
    scaling_coupling_check,
    separation_z,
    theta_vs_beta,
)
from .graph import LatticeGraph
from .kernel import Family, KernelSpec
from .oracle import brute_force_connected_sets, exact_diameter_law, exact_expected_distance
from .sampler import BoxSpec, sample_box, sample_coupled
from .stats import EstimateCI
from .structure import (
    block_connection_frequency,
    center_degree_study,
    connected_set_study,
    cut_point_count_bound,
    cut_point_frequencies,
    enumerate_connected_sets,
    separation_frequencies,
    separation_probability,
    sphere_connection_d1_exact,
    sphere_connection_probability,
)
from .oracle import exact_cut_point_probability
from .rng import seed_derivation

EXACT = Family.EXACT_CUBE


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    rows: list = field(default_factory=list)
    console: str = ""  # run-dependent detail (timings) kept out of the data files

    def line(self) -> str:
        tail = f" [{self.console}]" if self.console else ""
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.title}: {self.summary}{tail}"


def _reps(n: int, scale: float, floor: int = 2) -> int:
    return max(floor, int(round(n * scale)))


def _row(experiment, d, family, beta, n, statistic, mean, stderr=None, replicates=0, seed=None, note=""):
    fam = family.value if isinstance(family, Family) else family
    return {"experiment": experiment, "d": d, "family": fam, "beta": beta, "n": n,
            "statistic": statistic, "mean": mean, "stderr": stderr, "replicates": replicates,
            "seed": seed, "note": note}


def _ci_row(experiment, d, beta, n, statistic, ci: EstimateCI, note="", family=EXACT):
    return _row(experiment, d, family, beta, n, statistic, ci.mean, ci.stderr, ci.replicates,
                ci.master_seed, note)


# ---------------------------------------------------------------------------


def criterion_01(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    """Quadrature J(k) against ln(k^2/(k^2-1)), d = 1, k in [2, 64]."""
    kmod._CACHE.clear()
    t0 = time.perf_counter()
    vals = kmod.interaction_values(np.arange(2, 65).reshape(-1, 1))
    elapsed = time.perf_counter() - t0
    k = np.arange(2, 65, dtype=float)
    exact = np.log(k * k / (k * k - 1.0))
    rel = np.abs(vals - exact) / exact
    ok = bool(rel.max() <= 1e-8 and elapsed < 1.0)
    rows = [_row("kernel_exactness", 1, EXACT, "", int(kk), "J_rel_error", float(r)) for kk, r in zip(k, rel)]
    rows.append(_row("kernel_exactness", 1, EXACT, "", "", "max_rel_error", float(rel.max()), note="tol 1e-8"))
    timing = "under 1s" if elapsed < 1.0 else "over 1s"
    return CriterionResult(1, "kernel exactness", ok,
                           f"max rel error {rel.max():.2e} (tol 1e-8), cold-cache runtime {timing}", rows,
                           console=f"{elapsed:.3f}s")


def criterion_02(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    """Probability bounds for every displacement with sup norm in [2, 64]."""
    rows, total, bad = [], 0, 0
    for d in (1, 2):
        r = np.arange(-64, 65)
        pts = np.stack(np.meshgrid(*([r] * d), indexing="ij"), axis=-1).reshape(-1, d)
        pts = pts[np.abs(pts).max(axis=1) >= 2]
        for beta in (0.5, 1.0, 4.0):
            lo, p, up = kmod.probability_bounds(KernelSpec(EXACT, beta), pts)
            slack = 1e-12 * p
            viol = int(np.count_nonzero((p < lo - slack) | (p > up + slack)))
            total += len(pts)
            bad += viol
            rows.append(_row("probability_bounds", d, EXACT, beta, "", "violations", viol,
                             replicates=len(pts), note="displacements checked"))
            rows.append(_row("probability_bounds", d, EXACT, beta, "", "min_p_over_lower",
                             float(np.min(p / lo))))
            rows.append(_row("probability_bounds", d, EXACT, beta, "", "max_p_over_upper",
                             float(np.max(p / up))))
    return CriterionResult(2, "bound compliance", bad == 0, f"{bad} violations over {total} checks", rows)


def criterion_03(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    """Self-similarity of block connection, exact and by Monte Carlo."""
    rows, worst = [], 0.0
    cases = [((2,), 2), ((3,), 4), ((5,), 3), ((10,), 2), ((2, 0), 2), ((2, 1), 3), ((3, 3), 2), ((4, -2), 2)]
    for beta in (0.5, 1.0, 4.0):
        kern = KernelSpec(EXACT, beta)
        for disp, n in cases:
            pb = kmod.block_connection_probability(kern, disp, n)
            p = kmod.connection_probability(kern, disp)
            err = abs(pb - p)
            worst = max(worst, err)
            rows.append(_row("self_similarity", len(disp), EXACT, beta, n,
                             f"abs_diff disp={' '.join(map(str, disp))}", err))
    R = _reps(100_000, scale)
    ci = block_connection_frequency(KernelSpec(EXACT, 1.0), 3, 4, R, seed, workers)
    z = ci.z(1.0 / 9.0)
    rows.append(_ci_row("self_similarity", 1, 1.0, 4, "block_connection_freq disp=3", ci, "target 1/9"))
    ok = worst <= 1e-8 and abs(z) <= 4
    return CriterionResult(3, "self-similarity", ok,
                           f"max |block - point| {worst:.1e} (tol 1e-8); MC {ci.mean:.5f} vs 1/9, z={z:+.2f}",
                           rows)


def criterion_04(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    """Scale coupling D' <= 3D on shared clouds."""
    rows, ok, parts = [], True, []
    C = _reps(1000, scale)
    for d, fine, coarse in ((1, 16, 8), (2, 8, 4)):
        chk = scaling_coupling_check(1.0, d, fine, coarse, C, seed, workers)
        ok &= chk.passed
        parts.append(f"d={d} {fine}->{coarse}: {chk.violations}/{chk.pairs} violations")
        rows += [
            _row("scaling_coupling", d, EXACT, 1.0, fine, "violations_3D", chk.violations, replicates=C, seed=seed),
            _row("scaling_coupling", d, EXACT, 1.0, fine, "pairs_checked", chk.pairs, replicates=C, seed=seed),
            _row("scaling_coupling", d, EXACT, 1.0, fine, "violations_2D+1", chk.violations_2d_plus_1,
                 replicates=C, seed=seed, note="recorded only"),
            _row("scaling_coupling", d, EXACT, 1.0, fine, "max(D'-2D)", chk.max_excess_over_2d,
                 replicates=C, seed=seed),
        ]
    return CriterionResult(4, "scaling coupling", ok, "; ".join(parts), rows)


def criterion_05(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    rows, ok, parts = [], True, []
    R = _reps(100_000, scale)
    for d, beta in ((1, 0.5), (1, 2.0), (2, 1.0)):
        rep = check_submultiplicativity(KernelSpec(EXACT, beta), d, 4, 4, R, seed, workers)
        z = rep.z_score
        ok &= z <= 3
        parts.append(f"(d={d},b={beta}) z={z:+.1f}")
        rows += [
            _row("submultiplicativity", d, EXACT, beta, 16, "lambda_hat(16)", rep.lambda_mn.lambda_hat,
                 rep.lambda_mn.stderr, R, seed),
            _row("submultiplicativity", d, EXACT, beta, 4, "lambda_hat(4)^2", rep.product,
                 2 * rep.lambda_m.lambda_hat * rep.lambda_m.stderr, R, seed),
            _row("submultiplicativity", d, EXACT, beta, 16, "z_score", z, note="pass if <= 3"),
        ]
    return CriterionResult(5, "submultiplicativity", ok, "; ".join(parts), rows)


def criterion_06(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    rows, ok, parts = [], True, []
    grids = {1: [8, 16, 32, 64, 128, 256, 512], 2: [4, 8, 16, 32, 64]}
    R = _reps(2000, scale)
    for d in (1, 2):
        for beta in (1.0, 4.0):
            ests = lambda_series(KernelSpec(EXACT, beta), d, grids[d], R, seed, workers)
            for e in ests:
                rows.append(_row("theta_property", d, EXACT, beta, e.n, "lambda_hat", e.lambda_hat,
                                 e.stderr, R, seed))
            try:
                fit = fit_theta_estimates(ests)
            except ValueError as exc:
                ok = False
                parts.append(f"(d={d},b={beta}) fit failed: {exc}")
                continue
            mz = monotonicity_z(ests)
            good = 0 < fit.theta_hat < 1 and fit.r_squared > 0.98 and min(mz) >= -3
            ok &= good
            parts.append(f"(d={d},b={beta}) theta={fit.theta_hat:.3f} R2={fit.r_squared:.4f} min z={min(mz):.1f}")
            rows += [
                _row("theta_property", d, EXACT, beta, "", "theta_hat", fit.theta_hat, fit.theta_stderr, R, seed),
                _row("theta_property", d, EXACT, beta, "", "r_squared", fit.r_squared),
                _row("theta_property", d, EXACT, beta, "", "subadditive_inf", fit.subadditive_inf),
                _row("theta_property", d, EXACT, beta, "", "min_monotone_z", float(min(mz))),
            ]
    return CriterionResult(6, "exponent property", ok, "; ".join(parts), rows)


def criterion_07(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    R = _reps(20_000, scale)
    grid = [8, 16, 32, 64, 128, 256, 512]
    table = theta_vs_beta(EXACT, 1, [8.0, 64.0, 512.0], grid, R, seed, workers)
    body = table[1:]
    seps = separation_z(body)
    prods = [r.theta_log_beta for r in body]
    factor = max(prods) / min(prods)
    ok = all(s >= 3 for s in seps) and factor <= 3
    rows = []
    for r in table:
        rows.append(_row("theta_vs_beta", 1, EXACT, r.beta, "", "theta_hat", r.theta_hat, r.theta_stderr,
                         R if r.fit else 0, seed, "reference row" if r.fit is None else ""))
        if r.fit is not None:
            rows.append(_row("theta_vs_beta", 1, EXACT, r.beta, "", "theta_log_beta", r.theta_log_beta))
    rows.append(_row("theta_vs_beta", 1, EXACT, "", "", "max/min theta_log_beta", factor, note="pass if <= 3"))
    for (a, b), s in zip(zip(body, body[1:]), seps):
        rows.append(_row("theta_vs_beta", 1, EXACT, f"{a.beta}->{b.beta}", "", "separation_z", s))
    summ = ", ".join(f"theta({r.beta:g})={r.theta_hat:.3f}" for r in body)
    return CriterionResult(7, "large-beta law", ok,
                           f"{summ}; separations {', '.join(f'{s:.1f}' for s in seps)} sigma; "
                           f"theta*log(beta) spread {factor:.2f}", rows)


def criterion_08(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    R = _reps(100_000, scale)
    kern = KernelSpec(EXACT, 1.0)
    law = exact_expected_distance(kern, BoxSpec(1, 4), (0,), (3,))
    dist = corner_distances(kern, 1, 4, R, seed, tag="oracle/mc/n=4", workers=workers)[:, 1]
    ci = EstimateCI.from_samples(dist, seed, "D(0,3)")
    z = ci.z(law.expectation)
    rows = [
        _row("oracle_equivalence", 1, EXACT, 1.0, 4, "exact E[D(0,3)]", law.expectation),
        _ci_row("oracle_equivalence", 1, 1.0, 4, "MC E[D(0,3)]", ci),
    ]
    ok = abs(z) <= 4
    dlaw = exact_diameter_law(kern, BoxSpec(1, 3))
    dia = diameter_samples(kern, 1, 3, R, seed, workers=workers)
    zs = []
    for v, p in dlaw.support:
        f = float(np.mean(dia == v))
        se = math.sqrt(p * (1 - p) / R)
        zs.append((f - p) / se)
        rows.append(_row("oracle_equivalence", 1, EXACT, 1.0, 3, f"P(dia={v})", f, se, R, seed, f"exact {p!r}"))
    ok &= all(abs(x) <= 4 for x in zs)
    return CriterionResult(8, "oracle equivalence", ok,
                           f"E[D]={ci.mean:.4f} vs exact {law.expectation:.6f} (z={z:+.2f}); "
                           f"diameter law z {', '.join(f'{x:+.2f}' for x in zs)}", rows)


def criterion_09(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    R = _reps(10_000, scale)
    kern = KernelSpec(EXACT, 1.0)
    st = center_degree_study(kern, 1, 129, R, seed, workers)
    mu = math.pi**2 / 3.0  # 2 + 2 * sum_{k>=2} 1/k^2
    deficit = 2.0 * float(special.polygamma(1, 65))  # 2 * sum_{k>64} 1/k^2
    target = mu - deficit
    z = st.empirical.z(target)
    bound = kmod.degree_bound(1.0, 1)
    ok = abs(z) <= 4 and st.empirical.mean <= bound
    rows = [
        _ci_row("degree", 1, 1.0, 129, "centre_degree", st.empirical),
        _row("degree", 1, EXACT, 1.0, 129, "mu", mu),
        _row("degree", 1, EXACT, 1.0, 129, "finite_box_deficit", deficit),
        _row("degree", 1, EXACT, 1.0, 129, "target", target),
        _row("degree", 1, EXACT, 1.0, 129, "degree_bound", bound),
    ]
    return CriterionResult(9, "degree", ok,
                           f"mean {st.empirical.mean:.4f} vs {target:.4f} (z={z:+.2f}); bound {bound:g}", rows)


def criterion_10(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    rows, ok, parts = [], True, []
    kern = KernelSpec(EXACT, 1.0)
    R1 = _reps(100_000, scale)
    for k in (2, 5, 10):
        sc = sphere_connection_probability(kern, 1, k, R1, seed, workers=workers)
        exact = sphere_connection_d1_exact(1.0, k)
        z = (sc.estimate - exact) / sc.stderr if sc.stderr > 0 else math.inf
        ok &= abs(z) <= 4
        parts.append(f"d=1 k={k} z={z:+.2f}")
        rows.append(_row("sphere", 1, EXACT, 1.0, k, "P(0~S>=k)", sc.estimate, sc.stderr, R1, seed,
                         f"exact {exact!r}; exact tail beyond {sc.radius} folded in"))
    R2 = _reps(10_000, scale)
    for k in (2, 4, 8):
        sc = sphere_connection_probability(kern, 2, k, R2, seed, workers=workers)
        bound = 50.0**2 / k**2
        good = sc.estimate <= bound + 3 * sc.stderr and sc.estimate + sc.tail_upper <= bound + 3 * sc.stderr
        ok &= good
        parts.append(f"d=2 k={k} {sc.estimate:.4f}<= {bound:g}")
        rows.append(_row("sphere", 2, EXACT, 1.0, k, "P(0~S>=k) window", sc.estimate, sc.stderr, R2, seed,
                         f"tail bracket [0, {sc.tail_upper!r}]; bound {bound!r}"))
    return CriterionResult(10, "sphere connection", ok, "; ".join(parts), rows)


def criterion_11(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    rows, ok, parts = [], True, []
    kern = KernelSpec(EXACT, 1.0)
    R = _reps(1000, scale)
    for box, root in ((BoxSpec(1, 10), (5,)), (BoxSpec(2, 9), (4, 4))):
        st = connected_set_study(kern, box, root, 5, R, seed, workers)
        for ci, b, ev, eb, k in zip(st.mean_count, st.bound, st.event_freq, st.event_bound, st.k):
            good = ci.mean <= b and ev.mean <= eb + 3 * (ev.stderr if ev.stderr == ev.stderr else 0.0)
            ok &= bool(good)
            rows.append(_ci_row("connected_sets", box.d, 1.0, box.n, f"mean |CS_{k}|", ci, f"bound {b!r}"))
            rows.append(_ci_row("connected_sets", box.d, 1.0, box.n, f"P(avgdeg>=20mu) k={k}", ev,
                                f"bound {eb!r}"))
        parts.append(f"d={box.d} mean |CS_5|={st.mean_count[-1].mean:.1f} <= {st.bound[-1]:.3g}")
    # cross-algorithm agreement on 100 random graphs
    mismatches = 0
    for i in range(100):
        d = 1 if i < 50 else 2
        n = 12 if d == 1 else 4
        beta = (0.5, 1.0, 2.0, 4.0)[i % 4]
        cfg = sample_box(KernelSpec(EXACT, beta), BoxSpec(d, n), seed_derivation(seed, "consets/xcheck", i))
        g = LatticeGraph.from_configuration(cfg)
        root = (i % n,) * d
        fast = enumerate_connected_sets(g, 4, root)
        for rep in fast:
            if rep.count != brute_force_connected_sets(g, rep.k, root):
                mismatches += 1
    ok &= mismatches == 0
    rows.append(_row("connected_sets", "", EXACT, "", "", "cross_algorithm_mismatches", mismatches,
                     replicates=100, seed=seed))
    parts.append(f"{mismatches} cross-algorithm mismatches on 100 graphs")
    return CriterionResult(11, "connected sets", ok, "; ".join(parts), rows)


def criterion_12(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    rows, ok, parts = [], True, []
    R = _reps(100_000, scale)
    worst = 0.0
    for beta, m, ws in ((0.5, 8, (1, 3)), (1.0, 4, (1,)), (1.0, 16, (2, 5, 8)), (2.0, 8, (2, 4))):
        ind = cut_point_frequencies(KernelSpec(EXACT, beta), m, R, seed, workers)
        for w in ws:
            p = exact_cut_point_probability(beta, m, w)
            f = float(ind[:, w].mean())
            se = math.sqrt(p * (1 - p) / R)
            z = (f - p) / se
            worst = max(worst, abs(z))
            rows.append(_row("cut_points", 1, EXACT, beta, m, f"P(cut at {w})", f, se, R, seed, f"exact {p!r}"))
    ok &= worst <= 4
    parts.append(f"cut-point max |z|={worst:.2f}")
    for beta in (0.5, 1.0, 2.0):
        for m in (8, 64, 512):
            cc = cut_point_count_bound(beta, m)
            ok &= cc.exact <= cc.bound
            rows.append(_row("cut_points", 1, EXACT, beta, m, "E[#cut points]", cc.exact,
                             note=f"bound {cc.bound!r} ({cc.branch})"))
    worst_sep, low_ok = 0.0, True
    for beta in (0.5, 1.0, 2.0):
        for M, nb in ((9, 1), (9, 2), (17, 1)):
            ind = separation_frequencies(KernelSpec(EXACT, beta), M, nb, R, seed, workers)
            for w in range(1, M - 1, 2):
                p = separation_probability(beta, M, w)
                f = float(ind[:, w].mean())
                se = math.sqrt(f * (1 - f) / R)
                se_p = math.sqrt(p * (1 - p) / R)
                z = (f - p) / se_p
                worst_sep = max(worst_sep, abs(z))
                lower = 0.1 * M ** (-beta)
                low_ok &= f >= lower - 3 * se
                rows.append(_row("separation_points", 1, EXACT, beta, M * nb, f"P(sep at {w}) M={M} block={nb}",
                                 f, se, R, seed, f"exact {p!r}; lower bound {lower!r}"))
    ok &= low_ok and worst_sep <= 4
    parts.append(f"separation max |z| vs exact {worst_sep:.2f}, lower bound {'held' if low_ok else 'violated'}")
    return CriterionResult(12, "cut and separation points", ok, "; ".join(parts), rows)


def criterion_13(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    rows, parts = [], []
    R = _reps(2000, scale)
    a, b = KernelSpec(EXACT, 2.0), KernelSpec(Family.TRUNCATED_POWER, 2.0)
    qs = {}
    for n in (64, 256):
        cmp_ = kernel_comparison(a, b, 1, n, R, seed, workers=workers)
        qs[n] = cmp_.q99("corner") + cmp_.q99("diameter")
        for name, v in zip(("corner q99", "corner inverse q99", "diameter q99", "diameter inverse q99"), qs[n]):
            rows.append(_row("kernel_robustness", 1, "ExactCube/TruncatedPower", 2.0, n, name, v,
                             replicates=R, seed=seed))
    ratios = [max(x, y) / min(x, y) for x, y in zip(qs[64], qs[256])]
    stable = max(ratios) <= 1.5
    parts.append(f"q99 stability across n max ratio {max(ratios):.3f} (<= 1.5)")
    gaps = [kmod.kernel_gap((k,), 2.0) for k in range(2, 65)]
    gap_ok = max(gaps) <= 2.0
    parts.append(f"scaled gap sup {max(gaps):.3f} (<= 2)")
    rows.append(_row("kernel_robustness", 1, "ExactCube/TruncatedPower", 2.0, "", "scaled_gap_sup", max(gaps)))
    same, total = 0, 0
    k1a, k1b = KernelSpec(EXACT, 1.0), KernelSpec(Family.TRUNCATED_POWER, 1.0)
    for i in range(_reps(200, scale)):
        for n in (16, 64):
            ca, cb = sample_coupled([k1a, k1b], BoxSpec(1, n), seed_derivation(seed, "identical", i))
            same += bool(np.array_equal(ca.edges, cb.edges))
            total += 1
    ident = same == total
    parts.append(f"beta=1 identical configurations {same}/{total}")
    rows.append(_row("kernel_robustness", 1, "ExactCube/TruncatedPower", 1.0, "", "identical_fraction",
                     same / total, replicates=total, seed=seed))
    return CriterionResult(13, "kernel robustness", stable and gap_ok and ident, "; ".join(parts), rows)


def criterion_14(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    R = _reps(10_000, scale)
    kern = KernelSpec(EXACT, 1.0)
    grid = [16, 32, 64, 128, 256]
    rows = []
    mrs = [moment_ratio(kern, 1, n, R, 2, seed, workers, min_replicates=min(R, 10_000)) for n in grid]
    for mr in mrs:
        rows.append(_row("moments", 1, EXACT, 1.0, mr.n, "E[D^2]/E[D]^2", mr.ratio, mr.stderr, R, seed))
    slope, se = log_slope(grid, [m.ratio for m in mrs], [m.stderr for m in mrs])
    z = slope / se
    rows.append(_row("moments", 1, EXACT, 1.0, "", "log_slope", slope, se, note=f"z={z!r}; pass if |z| <= 3"))
    return CriterionResult(14, "moment boundedness", abs(z) <= 3,
                           f"ratios {', '.join(f'{m.ratio:.4f}' for m in mrs)}; slope {slope:.5f} +/- {se:.5f} "
                           f"(z={z:+.2f}, need |z| <= 3)", rows)


def criterion_15(seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    R = _reps(10_000, scale, floor=1000)
    kern = KernelSpec(EXACT, 1.0)
    rows, parts, ok = [], [], True
    lam = {n: estimate_lambda(kern, 1, n, R, seed, workers) for n in (16, 32, 64)}
    for indirect in (False, True):
        name = "Dstar" if indirect else "point_to_box"
        bands = {}
        for n in (16, 32, 64):
            q = quantile_point_to_box(kern, 1, n, R, seed, lambda_hat=lam[n].lambda_hat, indirect=indirect,
                                      workers=workers)
            bands[n] = q.band
            rows.append(_row("quantiles", 1, EXACT, 1.0, n, f"{name} q01", q.q01, replicates=R, seed=seed))
            rows.append(_row("quantiles", 1, EXACT, 1.0, n, f"{name} q99", q.q99, replicates=R, seed=seed))
            rows.append(_row("quantiles", 1, EXACT, 1.0, n, "lambda_hat", q.lambda_hat, lam[n].stderr, R, seed))
            rows.append(_row("quantiles", 1, EXACT, 1.0, n, f"{name} q01/lambda", q.band[0]))
            rows.append(_row("quantiles", 1, EXACT, 1.0, n, f"{name} q99/lambda", q.band[1]))
        lows = [bands[n][0] for n in bands]
        highs = [bands[n][1] for n in bands]
        r_lo, r_hi = max(lows) / min(lows), max(highs) / min(highs)
        good = r_lo <= 2 and r_hi <= 2
        ok &= good
        parts.append(f"{name}: q01/L spread {r_lo:.3f}, q99/L spread {r_hi:.3f}")
        rows.append(_row("quantiles", 1, EXACT, 1.0, "", f"{name} q01 spread", r_lo, note="pass if <= 2"))
        rows.append(_row("quantiles", 1, EXACT, 1.0, "", f"{name} q99 spread", r_hi, note="pass if <= 2"))
    return CriterionResult(15, "quantile structure", ok, "; ".join(parts) + " (need <= 2)", rows)


CRITERIA = {
    1: criterion_01, 2: criterion_02, 3: criterion_03, 4: criterion_04, 5: criterion_05,
    6: criterion_06, 7: criterion_07, 8: criterion_08, 9: criterion_09, 10: criterion_10,
    11: criterion_11, 12: criterion_12, 13: criterion_13, 14: criterion_14, 15: criterion_15,
}

TITLES = {
    1: "kernel exactness", 2: "bound compliance", 3: "self-similarity", 4: "scaling coupling",
    5: "submultiplicativity", 6: "exponent property", 7: "large-beta law", 8: "oracle equivalence",
    9: "degree", 10: "sphere connection", 11: "connected sets", 12: "cut and separation points",
    13: "kernel robustness", 14: "moment boundedness", 15: "quantile structure", 16: "reproducibility",
}


def run_criterion(number: int, seed: int = 1, workers=None, scale: float = 1.0) -> CriterionResult:
    return CRITERIA[number](seed=seed, workers=workers, scale=scale)


def _data_files(root: Path) -> dict:
    """Data files below ``root`` (manifests carry wall-clock times and are excluded)."""
    return {p.relative_to(root): p for p in sorted(root.rglob("*"))
            if p.is_file() and p.name != "manifest.json"}


def criterion_16(seed: int = 1, workers=8, scale: float = 1.0, criteria=None,
                 workdir: str | None = None) -> CriterionResult:
    """Run ``verify`` three times (twice with one worker, once with ``workers``) and compare bytes."""
    from .cli import main

    crit = criteria or sorted(CRITERIA)
    tmp = tempfile.TemporaryDirectory() if workdir is None else None
    root = Path(workdir or tmp.name)
    try:
        runs = {"serial_a": 1, "serial_b": 1, f"workers_{workers}": workers}
        files = {}
        for name, w in runs.items():
            out = root / name
            code = main(["verify", "--seed", str(seed), "--workers", str(w), "--out", str(out),
                         "--set", f"scale={scale!r}", "--set", f"criteria={','.join(map(str, crit))}"])
            if code not in (0, 1):
                raise RuntimeError(f"verify run {name} ended with exit code {code}")
            files[name] = _data_files(out)
        names = list(runs)
        base = files[names[0]]
        problems = []
        for other in names[1:]:
            if set(files[other]) != set(base):
                problems.append(f"{other}: different file set")
                continue
            for rel, p in base.items():
                if not filecmp.cmp(p, files[other][rel], shallow=False):
                    problems.append(f"{other}: {rel} differs")
        ok = not problems and len(base) > 0
        rows = [_row("reproducibility", "", "", "", "", "data_files_compared", len(base), replicates=len(runs),
                     seed=seed, note="; ".join(problems))]
        summ = (f"{len(base)} data files byte-identical across 2 serial runs and a {workers}-worker run"
                if ok else "; ".join(problems[:5]))
        return CriterionResult(16, "reproducibility", ok, summ, rows)
    finally:
        if tmp is not None:
            tmp.cleanup()


__all__ = ["CriterionResult", "CRITERIA", "TITLES", "run_criterion", "criterion_16"] + [
    f"criterion_{i:02d}" for i in range(1, 16)]
