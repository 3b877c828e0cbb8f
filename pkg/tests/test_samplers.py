import math

import numpy as np
import pytest

from ppratios import samplers as sp
from ppratios import tail_models as tm
from ppratios.rng import RngStream
from ppratios.verify import (
    EmpiricalDistribution,
    ks_distance,
    two_sample_ks,
    two_sample_threshold,
)


# --- gamma arrivals ---------------------------------------------------------


def test_gamma_arrivals_increasing_positive():
    g = sp.sample_gamma_arrivals(100, RngStream(3, 0))
    assert np.all(np.diff(g) > 0) and g[0] > 0


def test_gamma_arrival_moments_at_scale():
    g = sp.gamma_matrix(101, 1_000_000, 5)
    assert g[:, 0].mean() == pytest.approx(1.0, abs=0.01)
    assert g[:, 4].mean() == pytest.approx(5.0, abs=0.02)


def test_gamma_ratio_uniform_ks():
    # Gamma_1/Gamma_2 is Uniform(0,1): KS below 0.002 at 10^6 trials
    g = sp.gamma_matrix(2718, 1_000_000, 2)
    ratio = g[:, 0] / g[:, 1]
    emp = EmpiricalDistribution.from_samples(ratio)
    assert ks_distance(emp, lambda x: np.clip(x, 0, 1)) < 0.002


def test_gamma_matrix_rows_replay_streams():
    g = sp.gamma_matrix(55, 10, 4, stream_start=20)
    for i in (0, 3, 9):
        single = sp.sample_gamma_arrivals(4, RngStream(55, 20 + i))
        assert np.array_equal(g[i], single)


# --- ordered points ---------------------------------------------------------


def test_ordered_points_pareto_closed_form():
    s = sp.sample_ordered_points(tm.pareto(1.0), 1.0, 8, RngStream(7, 1))
    assert np.allclose(s.points, 1.0 / s.gammas, rtol=1e-12)


def test_ordered_points_nonincreasing_many_trials():
    model = tm.pareto_log(1.0, 1.5)
    for i in range(200):
        s = sp.sample_ordered_points(model, 0.3, 6, RngStream(11, i))
        assert np.all(np.diff(s.points) <= 0)


@pytest.mark.parametrize("model", [tm.pareto(0.5), tm.pareto_log(1.0, 2.0),
                                   tm.pareto_perturbed(1, 1, 1),
                                   tm.rapid_zero(), tm.slow_zero()])
def test_log_points_nonincreasing_at_scale(model):
    # every realization keeps the ordering, 10^5 trials per family
    lp = sp.ordered_log_points_batch(model, 0.2, 5, 100_000, 23)
    assert np.all(np.diff(lp, axis=1) <= 0)


def test_ordered_points_deterministic():
    a = sp.sample_ordered_points(tm.pareto(2.0), 0.5, 5, RngStream(9, 4))
    b = sp.sample_ordered_points(tm.pareto(2.0), 0.5, 5, RngStream(9, 4))
    assert np.array_equal(a.points, b.points) and np.array_equal(a.gammas, b.gammas)


@pytest.mark.parametrize("model", [tm.pareto(1.5), tm.rapid_zero(), tm.slow_zero()])
def test_representation_consistency(model):
    # t * tail(point_i) recovers gamma_i for analytic-inverse families
    t = 0.7
    s = sp.sample_ordered_points(model, t, 6, RngStream(21, 5))
    assert np.allclose(t * tm.eval_tail(model, s.points), s.gammas, rtol=1e-9)


def test_time_scale_batch_gamma_law():
    # t * tail(k-th point) is Gamma(k, 1) exactly for the power family:
    # KS below 0.002 at 10^6 trials
    scales = sp.time_scale_batch(tm.pareto(2.0), 1.0, 2, 1_000_000, 33)
    from ppratios._special import gammainc_lower

    for k in (1, 2):
        emp = EmpiricalDistribution.from_samples(scales[:, k - 1])
        assert ks_distance(emp, lambda z, k=k: gammainc_lower(k, z)) < 0.002


# --- ratio configurations ---------------------------------------------------


def test_ratio_configuration_invariants():
    model = tm.pareto(1.0)
    for i in range(100):
        cfg = sp.sample_ratio_configuration(model, 0.5, 2, 3, 0.2, RngStream(13, i))
        assert cfg.above.size == cfg.n - 1
        assert np.all(cfg.above >= 1.0)
        assert np.all(np.diff(cfg.above) <= 0)
        assert np.all((cfg.below > cfg.epsilon) & (cfg.below <= 1.0))
        assert 0 < cfg.w_rn <= 1.0
        if cfg.above.size:
            assert cfg.w_rn * cfg.above[0] <= 1.0 + 1e-12
    cfg0 = sp.sample_ratio_configuration(model, 0.5, 0, 2, 0.2, RngStream(13, 1))
    assert cfg0.w_rn is None


def test_ratio_configuration_above_exact_for_pareto():
    # the representation cancels t: above ratios are pure gamma powers
    alpha, r, n = 2.0, 1, 3
    rng = RngStream(41, 2)
    cfg = sp.sample_ratio_configuration(tm.pareto(alpha), 0.25, r, n, 0.1, rng)
    g = sp.sample_gamma_arrivals(r + n, RngStream(41, 2))
    expected = (g[r : r + n - 1] / g[r + n - 1]) ** (-1.0 / alpha)
    assert np.allclose(cfg.above, expected, rtol=1e-12)


def test_ratio_configuration_truncation_error():
    with pytest.raises(sp.TruncationError) as err:
        sp.sample_ratio_configuration(
            tm.pareto(1.0), 1.0, 1, 1, 1e-6, RngStream(1, 0), cap=50)
    assert err.value.partial is not None
    assert err.value.partial.below.size > 0


def test_ratio_configuration_mean_below_count():
    # mean below-count approaches E[Gamma_{r+n}] * (eps^-alpha - 1) = 1 for
    # r=0, n=1, alpha=1, eps=0.5 (mixed-Poisson mean)
    _, _, counts = sp.ratio_configuration_batch(
        tm.pareto(1.0), 1e-3, 0, 1, 0.5, 200_000, 99)
    assert counts.mean() == pytest.approx(1.0, abs=0.02)


def test_pivot_ratio_t_free_for_pareto():
    # exactness: distribution identical at t=1 and t=1e-6
    w1 = sp.pivot_ratio_batch(tm.pareto(1.0), 1.0, 1, 1, 50_000, 5, stream_start=0)
    w2 = sp.pivot_ratio_batch(tm.pareto(1.0), 1e-6, 1, 1, 50_000, 5, stream_start=50_000)
    assert two_sample_ks(w1, w2) < two_sample_threshold(w1.size, w2.size)


def test_pivot_ratio_uniform_for_unit_alpha():
    w = sp.pivot_ratio_batch(tm.pareto(1.0), 1.0, 1, 1, 1_000_000, 17)
    emp = EmpiricalDistribution.from_samples(w)
    assert ks_distance(emp, lambda x: np.clip(x, 0, 1)) < 0.002


def test_batch_threads_do_not_change_output():
    a = sp.pivot_ratio_batch(tm.pareto(1.5), 0.5, 1, 2, 300_000, 8, threads=1)
    b = sp.pivot_ratio_batch(tm.pareto(1.5), 0.5, 1, 2, 300_000, 8, threads=2)
    assert np.array_equal(a, b)


# --- negative binomial process ----------------------------------------------


def test_nb_sample_points_inside_interval():
    for method in sp.NB_METHODS:
        s = sp.sample_negbin_process(2, 1.0, 0.3, method, RngStream(4, 0))
        assert np.all((s.points > 0.3) & (s.points < 1.0))


def test_nb_batch_matches_single_trials():
    for method in sp.NB_METHODS:
        counts, _ = sp.negbin_batch(3, 1.5, 0.4, method, 64, 12, stream_start=0)
        for i in (0, 7, 33, 63):
            single = sp.sample_negbin_process(3, 1.5, 0.4, method, RngStream(12, i))
            assert single.points.size == counts[i]


def test_nb_void_probability():
    # P(no points in (a,1)) = a^{n*alpha}
    n, alpha, a = 2, 1.0, 0.5
    counts, _ = sp.negbin_batch(n, alpha, a, "limit_ratios", 400_000, 31)
    void = np.mean(counts == 0)
    se = math.sqrt(0.25 * 0.75 / counts.size)
    assert abs(void - a ** (n * alpha)) < 3 * se


def test_nb_geometric_count_law():
    # n=1, alpha=1, eps=0.5: counts are Geometric(1/2), P(k) = 2^-(k+1)
    counts, _ = sp.negbin_batch(1, 1.0, 0.5, "mixed_poisson", 400_000, 37)
    for k in (0, 1, 2, 3):
        want = 2.0 ** -(k + 1)
        got = float(np.mean(counts == k))
        se = math.sqrt(want * (1 - want) / counts.size)
        assert abs(got - want) < 4 * se


def test_nb_methods_agree_in_distribution():
    # two independent seeds; the count distributions must match
    c1, _ = sp.negbin_batch(3, 2.0, 0.3, "limit_ratios", 300_000, 71, stream_start=0)
    c2, _ = sp.negbin_batch(3, 2.0, 0.3, "mixed_poisson", 300_000, 72, stream_start=0)
    assert two_sample_ks(c1, c2) < 0.004


def test_nb_mean_count():
    # mean count is n * (eps^-alpha - 1)
    counts, _ = sp.negbin_batch(2, 1.0, 0.25, "limit_ratios", 200_000, 41)
    want = 2 * (4.0 - 1.0)
    assert counts.mean() == pytest.approx(want, abs=0.05)


def test_nb_truncation_cap():
    with pytest.raises(sp.TruncationError):
        sp.negbin_batch(1, 1.0, 1e-8, "limit_ratios", 100, 3, cap=64)
    with pytest.raises(sp.TruncationError):
        sp.sample_negbin_process(1, 1.0, 1e-8, "mixed_poisson", RngStream(3, 0), cap=64)


def test_nb_validation():
    with pytest.raises(ValueError):
        sp.sample_negbin_process(0, 1.0, 0.5, "limit_ratios", RngStream(1, 0))
    with pytest.raises(ValueError):
        sp.sample_negbin_process(1, 1.0, 1.5, "limit_ratios", RngStream(1, 0))
    with pytest.raises(ValueError):
        sp.sample_negbin_process(1, 1.0, 0.5, "bogus", RngStream(1, 0))


def test_nb_probe_sums_match_manual():
    from ppratios.limit_laws import LaplaceProbe

    probe = LaplaceProbe(0.9, 0.5, 0.8)
    counts, sums = sp.negbin_batch(2, 1.0, 0.4, "limit_ratios", 32, 3, probe=probe)
    for i in (0, 5, 31):
        single = sp.sample_negbin_process(2, 1.0, 0.4, "limit_ratios", RngStream(3, i))
        assert sums[i] == pytest.approx(float(np.sum(probe(single.points))), rel=1e-12)
        assert counts[i] == single.points.size
