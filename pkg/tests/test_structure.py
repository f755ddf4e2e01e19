import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from lrperc.graph import LatticeGraph
from lrperc.kernel import KernelSpec
from lrperc.sampler import BoxSpec, sample_box
from lrperc.structure import (center_degree_study, conditioned_edge_count, connected_set_study,
                              cut_indicator, cut_point_bound, cut_point_count_bound, cut_point_frequencies,
                              cut_points_d1, enumerate_connected_sets, poisson_binomial, separation_frequencies,
                              separation_indicator, separation_points_d1, separation_probability,
                              sphere_connection_d1_exact, sphere_connection_probability, sphere_window_probabilities)

edge_lists = st.integers(3, 30).flatmap(lambda m: st.tuples(
    st.just(m), st.lists(st.tuples(st.integers(0, m - 1), st.integers(0, m - 1)).filter(
        lambda e: abs(e[0] - e[1]) >= 2).map(lambda e: (min(e), max(e))), max_size=12)))


@given(st.integers(2, 1000))
def test_sphere_d1_closed_form_at_beta_one(k):
    assert sphere_connection_d1_exact(1.0, k) == pytest.approx((2 * k - 1) / k**2, rel=1e-12)


def test_sphere_window_tail_telescopes():
    # 1 - prod_{j > R} (1 - 1/j^2)^2 = 1 - (R/(R+1))^2 at beta = 1
    k, R = 3, 12
    p = sphere_window_probabilities(KernelSpec.exact(1.0), 1, k, R)
    inside = 1.0 - np.prod(1.0 - p)
    total = 1.0 - (1.0 - inside) * (R / (R + 1.0)) ** 2
    assert total == pytest.approx(sphere_connection_d1_exact(1.0, k), rel=1e-12)


def test_sphere_monte_carlo_d1():
    sc = sphere_connection_probability(KernelSpec.exact(1.0), 1, 4, 20000, 3)
    assert sc.radius == 16
    assert abs(sc.estimate - 7 / 16) <= 4 * sc.stderr
    with pytest.raises(ValueError):
        sphere_connection_probability(KernelSpec.exact(1.0), 1, 4, 10, 3, radius=8)


def test_sphere_d2_reports_a_tail_bracket():
    sc = sphere_connection_probability(KernelSpec.exact(1.0), 2, 2, 500, 1)
    assert sc.tail is None
    assert sc.tail_upper == pytest.approx(2500 / 81)


def test_conditioned_edge_count_reference():
    res = conditioned_edge_count(KernelSpec.exact(1.0), (0,), (3,), 4)
    mean = sum(1.0 / (12 + j - i) ** 2 for i in range(4) for j in range(4))
    assert res.mean == pytest.approx(mean, rel=1e-12)
    assert res.mean == pytest.approx(0.117316850587, rel=1e-10)
    # block self-similarity: no edge with probability exp(-J(3)) = 8/9
    assert res.p_zero == pytest.approx(8 / 9, rel=1e-12)
    assert res.conditional_mean == pytest.approx(1.0558516552822, rel=1e-10)
    assert res.conditional_mean <= 1 + res.mean


@given(st.lists(st.floats(0.0, 1.0), max_size=10))
def test_poisson_binomial_matches_brute_force(probs):
    law = poisson_binomial(probs)
    ref = np.zeros(len(probs) + 1)
    for mask in range(2 ** len(probs)):
        w = 1.0
        for i, p in enumerate(probs):
            w *= p if mask >> i & 1 else 1 - p
        ref[bin(mask).count("1")] += w
    np.testing.assert_allclose(law, ref, atol=1e-12)


@given(edge_lists)
def test_cut_indicator_matches_definition(case):
    m, edges = case
    a = np.array([e[0] for e in edges], dtype=np.int64)
    b = np.array([e[1] for e in edges], dtype=np.int64)
    got = cut_indicator(m, a, b)
    for w in range(m):
        ref = 0 < w < m - 1 and not any(u < w < v for u, v in edges)
        assert got[w] == ref


@given(edge_lists, st.integers(1, 3))
def test_separation_indicator_matches_definition(case, n):
    m, edges = case
    M = m
    a = np.array([e[0] * n for e in edges], dtype=np.int64)
    b = np.array([e[1] * n + n - 1 for e in edges], dtype=np.int64)
    got = separation_indicator(M, n, a, b)
    for w in range(M):
        covered = any(x <= w <= y for x, y in edges)
        assert got[w] == (w % 2 == 1 and 1 <= w <= M - 2 and not covered)


def test_cut_and_separation_reports_on_a_sample():
    conf = sample_box(KernelSpec.exact(0.5), BoxSpec(1, 18), 4)
    cuts = cut_points_d1(conf)
    assert all(0 < w < 17 for w in cuts.positions) and cuts.count == len(cuts.positions)
    sep = separation_points_d1(conf, block_scale=2)
    assert sep.blocks == 9 and all(w % 2 == 1 for w in sep.positions)
    with pytest.raises(ValueError):
        separation_points_d1(conf, block_scale=4)
    with pytest.raises(ValueError):
        cut_points_d1(sample_box(KernelSpec.exact(1.0), BoxSpec(2, 4), 1))


def _separation_product(beta, M, w):
    """Independent oracle: the product over covering block pairs at block scale 1."""
    out = 1.0
    for x in range(M):
        for y in range(x + 2, M):
            if x <= w <= y:
                out *= (1 - 1 / (y - x) ** 2) ** beta
    return out


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("M", [5, 9, 17])
def test_separation_probability_matches_block_product(beta, M):
    for w in range(1, M - 1):
        assert separation_probability(beta, M, w) == pytest.approx(_separation_product(beta, M, w), rel=1e-12)


def test_separation_reference_values():
    assert separation_probability(1.0, 9, 3) == pytest.approx(0.15, rel=1e-12)
    assert separation_probability(1.0, 9, 1) == pytest.approx(9 / 28, rel=1e-12)
    assert separation_probability(1.0, 9, 7) == pytest.approx(9 / 28, rel=1e-12)


def test_separation_frequency_is_scale_free():
    kern = KernelSpec.exact(1.0)
    R = 20000
    for scale in (1, 3):
        f = separation_frequencies(kern, 9, scale, R, 5)[:, 3].mean()
        assert abs(f - 0.15) <= 4 * math.sqrt(0.15 * 0.85 / R)


def test_cut_point_frequency():
    R = 20000
    f = cut_point_frequencies(KernelSpec.exact(1.0), 4, R, 2)[:, 1].mean()
    assert abs(f - 2 / 3) <= 4 * math.sqrt(2 / 9 / R)


@pytest.mark.parametrize("beta,m,value", [(1.0, 8, 2.8317), (2.0, 8, 1.3681), (0.5, 8, 4.110)])
def test_expected_cut_point_counts(beta, m, value):
    cc = cut_point_count_bound(beta, m)
    assert cc.exact == pytest.approx(value, abs=6e-4)
    assert cc.exact <= cc.bound


def test_cut_point_bound_branches():
    assert cut_point_bound(0.5, 8) == (pytest.approx(40 * math.sqrt(8)), "beta<1")
    assert cut_point_bound(1.0, 8)[0] == pytest.approx(10 + 8 * math.log(8))
    assert cut_point_bound(3.0, 8)[1].startswith("beta>2")


def test_center_degree_matches_finite_box_expectation():
    st_ = center_degree_study(KernelSpec.exact(1.0), 1, 129, 4000, 9)
    expected = math.pi**2 / 3 - 2 * float(special.polygamma(1, 65))
    assert st_.expected_in_box == pytest.approx(expected, rel=1e-9)
    assert abs(st_.empirical.z(expected)) <= 4
    with pytest.raises(ValueError):
        center_degree_study(KernelSpec.exact(1.0), 1, 128, 10, 9)


def test_connected_set_study_respects_the_bound():
    stu = connected_set_study(KernelSpec.exact(1.0), BoxSpec(1, 10), (5,), 4, 200, 1)
    assert list(stu.k) == [1, 2, 3, 4]
    assert stu.mean_count[0].mean == 1.0
    for ci, b in zip(stu.mean_count, stu.bound):
        assert ci.mean <= b
    with pytest.raises(ValueError):
        connected_set_study(KernelSpec.exact(1.0), BoxSpec(1, 10), (5,), 7, 2, 1)


def test_enumerate_connected_sets_flags_high_degree():
    g = LatticeGraph.from_edges(BoxSpec(1, 6), [])
    reps = enumerate_connected_sets(g, 3, (0,), mu=0.05)
    assert all(r.high_degree for r in reps)
    assert reps[2].count == 1 and reps[2].max_avg_degree == pytest.approx(5 / 3)
