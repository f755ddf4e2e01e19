import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lrperc.estimators import (box_to_box_indirect, check_submultiplicativity, corner_distances, diameter_scaling,
                               estimate_lambda, fit_theta, kernel_comparison, lambda_series, log_slope,
                               moment_ratio, moment_ratio_from_samples, monotonicity_z, pair_distances,
                               point_to_box_distances, quantile_point_to_box, scaling_coupling_check,
                               separation_z, stretched_exponential_fit, tail_profile, theta_vs_beta)
from lrperc.kernel import Family, KernelSpec
from lrperc.stats import EstimateCI, run_replicates

ZERO = KernelSpec.exact(0.0)


@pytest.mark.parametrize("d,n", [(1, 32), (2, 9), (1, 1)])
def test_lambda_at_beta_zero_is_n(d, n):
    est = estimate_lambda(ZERO, d, n, 10, 1)
    assert est.lambda_hat == n
    assert est.stderr == 0.0
    assert est.corner_e1.mean == n - 1


def test_corner_distances_shape_and_bounds():
    x = corner_distances(KernelSpec.exact(2.0), 2, 8, 50, 3)
    assert x.shape == (50, 2) and x.min() >= 1 and x.max() <= 7


def test_pair_distances_beta_zero_and_identity():
    assert set(pair_distances(ZERO, 2, 6, (1, 0), (4, 5), 5, 1)) == {5}
    assert set(pair_distances(KernelSpec.exact(1.0), 1, 6, (2,), (2,), 3, 1)) == {0}


def test_lambda_is_reproducible_and_tag_separated():
    a = corner_distances(KernelSpec.exact(1.0), 1, 16, 100, 7)
    b = corner_distances(KernelSpec.exact(1.0), 1, 16, 100, 7)
    np.testing.assert_array_equal(a, b)
    c = corner_distances(KernelSpec.exact(1.0), 1, 16, 100, 7, tag="other")
    assert not np.array_equal(a, c)


def test_corner_means_decrease_in_beta():
    lo = corner_distances(KernelSpec.exact(0.5), 1, 32, 400, 4).mean()
    hi = corner_distances(KernelSpec.exact(2.0), 1, 32, 400, 4).mean()
    assert hi < lo


@given(st.floats(0.05, 0.95), st.floats(0.1, 3.0))
def test_fit_recovers_an_exact_power_law(theta, c):
    n = np.array([8, 16, 32, 64, 128])
    lam = c * n**theta
    fit = fit_theta(n, lam, 0.01 * lam)
    assert fit.theta_hat == pytest.approx(theta, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.method == "loglog_wls"


def test_fit_flags_and_fallbacks():
    n = [1, 8, 16, 32, 64]
    fit = fit_theta(n, [1.0, 4.0, 3.9, 8.0, 12.0], [0.0, 0.0, 0.0, 0.0, 0.0])
    assert fit.method == "loglog_ols"
    assert "dropped:1" in fit.flags and "non-monotone" in fit.flags
    assert fit.n_grid == (8, 16, 32, 64)
    with pytest.raises(ValueError):
        fit_theta([8, 16, 32], [2.0, 3.0, 4.0])


def test_fit_with_too_noisy_points_raises():
    with pytest.raises(ValueError):
        fit_theta([8, 16, 32, 64, 128], [3, 4, 5, 6, 7.0], [1, 1, 1, 1, 1.0])


def test_theta_is_one_at_beta_zero_and_below_one_otherwise():
    ests = lambda_series(ZERO, 1, [4, 8, 16, 32], 5, 1)
    from lrperc.estimators import fit_theta_estimates

    assert fit_theta_estimates(ests).theta_hat == pytest.approx(1.0)
    assert all(z == 0.0 or z > 0 for z in monotonicity_z(ests))
    fit = fit_theta_estimates(lambda_series(KernelSpec.exact(1.0), 1, [8, 16, 32, 64, 128], 800, 2))
    assert 0.3 < fit.theta_hat < 0.8


def test_submultiplicativity_report():
    rep = check_submultiplicativity(ZERO, 1, 4, 4, 10, 1)
    assert rep.lambda_mn.lambda_hat == 16 and rep.product == 16
    assert rep.z_score == 0.0
    rep = check_submultiplicativity(KernelSpec.exact(1.0), 1, 4, 4, 3000, 1)
    assert rep.z_score < -3
    with pytest.raises(ValueError):
        check_submultiplicativity(ZERO, 1, 1, 4, 10, 1)


def test_theta_vs_beta_has_a_reference_row():
    rows = theta_vs_beta(Family.EXACT_CUBE, 1, [2.0, 16.0], [8, 16, 32, 64], 400, 1)
    assert rows[0].beta == 0.0 and rows[0].theta_hat == 1.0 and rows[0].fit is None
    assert rows[1].theta_hat > rows[2].theta_hat
    assert rows[2].theta_log_beta == pytest.approx(rows[2].theta_hat * math.log(16.0))
    assert separation_z(rows[1:])[0] > 0


def test_moment_ratio_delta_method():
    x = np.tile([1.0, 2.0, 3.0], 4000)
    mr = moment_ratio_from_samples(x, 2)
    assert mr.ratio == pytest.approx(7 / 6)
    rng = np.random.default_rng(0)
    # compare the delta-method stderr with the spread over independent batches
    ratios = [moment_ratio_from_samples(rng.geometric(0.3, 2000), 2).ratio for _ in range(300)]
    one = moment_ratio_from_samples(rng.geometric(0.3, 2000), 2)
    assert one.stderr == pytest.approx(np.std(ratios, ddof=1), rel=0.2)
    with pytest.raises(ValueError):
        moment_ratio(ZERO, 1, 8, 100, 2, 1)
    with pytest.raises(ValueError):
        moment_ratio(ZERO, 1, 8, 100, 3, 1, min_replicates=10)


def test_log_slope_of_a_power_law():
    n = [16, 32, 64, 128]
    slope, se = log_slope(n, [2.0 * k**0.25 for k in n], [0.01] * 4)
    assert slope == pytest.approx(0.25, abs=1e-12)


def test_stretched_exponential_fit_on_weibull_samples():
    rng = np.random.default_rng(1)
    eta, se, status = stretched_exponential_fit(rng.weibull(1.7, 50000))
    assert status == "ok" and eta == pytest.approx(1.7, abs=0.1)
    assert stretched_exponential_fit(np.ones(10))[2] == "deterministic"
    assert stretched_exponential_fit(np.arange(20.0))[2] == "insufficient tail mass"


def test_tail_profile_survival_is_monotone():
    prof = tail_profile(KernelSpec.exact(1.0), 1, 32, 2000, 0.5, 1, min_replicates=1000)
    assert np.all(np.diff(prof.survival) <= 0) and prof.survival[-1] == 0.0
    assert prof.upper_threshold == pytest.approx(2.0) and prof.divergence_threshold == pytest.approx(2.0)
    with pytest.raises(ValueError):
        tail_profile(KernelSpec.exact(1.0), 1, 32, 2000, 0.5, 1)


def test_point_to_box_and_indirect_distances_at_beta_zero():
    assert set(point_to_box_distances(ZERO, 1, 8, 5, 1)) == {9}
    assert set(point_to_box_distances(ZERO, 2, 3, 5, 1)) == {4}
    assert set(box_to_box_indirect(ZERO, 1, 8, 5, 1)) == {9}
    assert set(box_to_box_indirect(ZERO, 2, 3, 5, 1)) == {4}


def test_quantile_band():
    q = quantile_point_to_box(KernelSpec.exact(1.0), 1, 16, 1000, 3, lambda_hat=8.0)
    assert q.q01 <= q.q99 and q.band == (q.q01 / 8.0, q.q99 / 8.0)
    with pytest.raises(ValueError):
        quantile_point_to_box(KernelSpec.exact(1.0), 1, 16, 999, 3)


def test_diameter_scaling_at_beta_zero_has_exponent_one():
    res = diameter_scaling(ZERO, 2, [2, 4, 8, 16], 3, 1)
    assert [e.mean for e in res.diameters] == [1, 3, 7, 15]
    assert res.fit.theta_hat == pytest.approx(1.0)
    with pytest.raises(ValueError):
        diameter_scaling(ZERO, 2, [400], 1, 1)


def test_scaling_coupling_check_small():
    chk = scaling_coupling_check(1.0, 1, 16, 8, 30, 2)
    assert chk.passed and chk.pairs == 30 * 16 * 16  # ordered pairs, diagonal included
    assert chk.violations_2d_plus_1 <= chk.pairs
    with pytest.raises(ValueError):
        scaling_coupling_check(1.0, 1, 8, 16, 3, 2)


def test_kernel_comparison_identical_kernels_at_beta_one():
    cmp_ = kernel_comparison(KernelSpec.exact(1.0), KernelSpec(Family.TRUNCATED_POWER, 1.0), 1, 32, 100, 1)
    assert cmp_.identical_fraction == 1.0
    assert cmp_.q99("corner") == (1.0, 1.0) and cmp_.q99("diameter") == (1.0, 1.0)


def _square(payload, words):
    return (words % np.uint64(1000)).astype(np.int64) ** payload


def test_run_replicates_is_independent_of_worker_count_and_chunking():
    a = run_replicates(_square, 2, 5, "tag", 700, workers=1, chunk=64)
    b = run_replicates(_square, 2, 5, "tag", 700, workers=3, chunk=64)
    c = run_replicates(_square, 2, 5, "tag", 700, workers=1, chunk=1000)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, c)
    with pytest.raises(ValueError):
        run_replicates(_square, 2, 5, "tag", 0)


def test_estimate_ci():
    ci = EstimateCI.from_samples([1.0, 2.0, 3.0], 9, "x")
    assert ci.mean == 2.0 and ci.stderr == pytest.approx(1 / math.sqrt(3))
    assert ci.z(2.0) == 0.0
    assert EstimateCI.from_samples([4.0, 4.0], 1).z(3.0) == math.inf
    assert ci.as_dict()["master_seed"] == 9
