import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from extremal_limit.errors import DomainError
from extremal_limit.levy import StableModel, gamma_marginal_cdf
from extremal_limit.simulate import extremal_fidi_batch
from extremal_limit.stats import (
    exact_marginal_gap,
    exponential_cdf,
    extremal_joint_survival,
    extremal_process_checks,
    fidi_convergence_experiment,
    ks_statistic,
    marginal_limit_sweep,
    min_ks_over_exponentials,
    threshold_lattice,
    truncated_exponential_cdfs,
    truncated_joint_survival,
    truncated_log_marginal,
    two_sample_ks,
    uniform_cdf,
)


# ------------------------------------------------------------------- KS

def test_ks_hand_examples():
    assert ks_statistic([0.25, 0.75], uniform_cdf) == pytest.approx(0.25)
    f = exponential_cdf(1.0)
    c = 0.3
    assert ks_statistic([c], f) == pytest.approx(max(f(c), 1 - f(c)))


def test_ks_matches_scipy():
    rng = np.random.default_rng(1)
    x = rng.exponential(size=5000) * 1.1
    assert ks_statistic(x, exponential_cdf(1.0)) == pytest.approx(
        sps.kstest(x, sps.expon.cdf).statistic, abs=1e-14)
    y = rng.exponential(size=3000)
    assert two_sample_ks(x, y) == pytest.approx(sps.ks_2samp(x, y).statistic, abs=1e-14)


def test_ks_null_sample_small():
    x = np.random.default_rng(2).exponential(size=100_000)
    assert ks_statistic(x, exponential_cdf(1.0)) <= 0.0061


def test_ks_with_atom():
    # min(z, Exp) has an atom at z; supplying the left limit handles it exactly
    z = 1.0
    x = np.minimum(z, np.random.default_rng(3).exponential(size=50_000))
    cdf, left = truncated_exponential_cdfs(1.0, z)
    assert ks_statistic(x, cdf, left) < 0.01
    assert ks_statistic(x, cdf) > 0.3


def test_ks_empty_sample():
    with pytest.raises(DomainError):
        ks_statistic([], uniform_cdf)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=50), st.floats(0.2, 3.0))
def test_ks_invariant_under_increasing_maps(xs, k):
    x = np.asarray(xs)
    base = ks_statistic(x, exponential_cdf(1.0))
    # y = x**k (k > 0) with the pushed-forward cdf
    mapped = ks_statistic(x**k, lambda y: exponential_cdf(1.0)(np.asarray(y) ** (1 / k)))
    assert mapped == pytest.approx(base, abs=1e-12)
    assert 0.0 <= base <= 1.0


# ------------------------------------------------------------- marginals

def test_exact_gap_decreasing_and_small():
    gaps = [exact_marginal_gap(1, 1, t) for t in (0.2, 0.1, 0.05, 0.02, 0.01)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 0.01


def test_exact_gap_against_dense_direct_evaluation():
    # brute force: the same sup on an independent, much denser grid
    t = 0.05
    x = np.linspace(0.0, 5.0, 2_000_001)
    direct = np.max(np.abs(1 - gamma_marginal_cdf(1, 1, t, np.exp(-x / t)) - (1 - np.exp(-x))))
    assert exact_marginal_gap(1, 1, t) == pytest.approx(direct, abs=1e-5)


def test_negative_region_mass_vanishes():
    # P(-t log X_t <= 0) = P(X_t >= 1)
    masses = [1 - gamma_marginal_cdf(1, 1, t, 1.0) for t in (0.2, 0.05, 0.01)]
    assert all(b < a for a, b in zip(masses, masses[1:])) and masses[-1] < 0.01


def test_marginal_sweep_example():
    sw = marginal_limit_sweep(1, 1, [0.5, 0.2, 0.1, 0.05, 0.02], 200_000, 7)
    assert sw.statistics[-1] <= 0.03
    inversions = sum(b > a for a, b in zip(sw.statistics, sw.statistics[1:]))
    assert inversions <= 1
    assert sw.columns == ["t", "ks", "exact_gap", "n"]
    again = marginal_limit_sweep(1, 1, [0.5, 0.2, 0.1, 0.05, 0.02], 200_000, 7)
    assert list(sw.rows()) == list(again.rows())


def test_marginal_ks_approaches_exact_gap():
    sw = marginal_limit_sweep(1, 1, [0.2], 400_000, 8)
    assert abs(sw.statistics[0] - sw.extra["exact_gap"][0]) < 0.005


def test_sweep_rejects_nonpositive_t():
    with pytest.raises(DomainError, match="t must be positive"):
        marginal_limit_sweep(1, 1, [0.1, -0.1], 10, 1)


def test_stable_negative_control():
    model = StableModel(0.5, 1)
    ks = [min_ks_over_exponentials(truncated_log_marginal(model, 1e-6, t, 20_000, 5),
                                   np.linspace(0.5, 2.0, 16)) for t in (0.1, 0.05, 0.02)]
    assert min(ks) > 0.2


# ------------------------------------------------------ joint survival

def test_joint_survival_examples():
    assert extremal_joint_survival(1.3, [0.7], [0.4]) == pytest.approx(math.exp(-1.3 * 0.7 * 0.4))
    assert extremal_joint_survival(1.0, [1, 2, 3], [-1, 0, -0.5]) == 1.0
    assert extremal_joint_survival(1.0, [1, 2], [1, 0.5]) == pytest.approx(math.exp(-1.5))


def test_joint_survival_against_fidi_monte_carlo():
    e = extremal_fidi_batch(1.0, [1.0, 2.0], 1_000_000, 41)
    freq = np.mean((e[:, 0] > 1.0) & (e[:, 1] > 0.5))
    assert abs(freq - math.exp(-1.5)) <= 0.002


def test_joint_survival_length_mismatch():
    with pytest.raises(DomainError):
        extremal_joint_survival(1.0, [1, 2], [1.0])


def test_truncated_survival_vanishes_at_cap():
    assert truncated_joint_survival(1.0, [1, 2], [0.5, 3.0], 3.0) == 0.0
    assert truncated_joint_survival(1.0, [1, 2], [0.5, 2.0], 3.0) == pytest.approx(
        extremal_joint_survival(1.0, [1, 2], [0.5, 2.0]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 5.0), min_size=3, max_size=3),
       st.integers(0, 2), st.floats(0.0, 2.0))
def test_joint_survival_monotone(x, k, bump):
    s = [0.5, 1.0, 2.0]
    lo = np.array(x)
    hi = lo.copy()
    hi[k] += bump
    assert extremal_joint_survival(1.0, s, hi) <= extremal_joint_survival(1.0, s, lo) + 1e-15


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 4.0), st.floats(0.0, 4.0))
def test_joint_survival_prefix_factorises(a, b):
    # zeros beyond a prefix: only the prefix matters
    s = [0.5, 1.0, 2.0, 3.0]
    full = extremal_joint_survival(1.0, s, [a, b, 0.0, 0.0])
    assert full == pytest.approx(extremal_joint_survival(1.0, s[:2], [a, b]), rel=1e-14)


def test_threshold_lattice_shape():
    th = threshold_lattice(1.0, [0.5, 1.0, 2.0], 10.0)
    assert th.shape == (64, 3) and np.all(th <= 10.0)


# -------------------------------------------------------------- fidi

def test_fidi_example():
    r = fidi_convergence_experiment(0.01, [0.5, 1, 2], 200_000, 10.0, 42)
    assert r.max_discrepancy <= 0.02


def test_fidi_thresholds_above_cap():
    r = fidi_convergence_experiment(0.05, [0.5, 1, 2], 20_000, 2.0, 1,
                                    thresholds=[[2.0, 0.1, 0.1], [3.0, 3.0, 3.0]])
    assert r.empirical.tolist() == [0.0, 0.0] and r.theoretical.tolist() == [0.0, 0.0]


def test_fidi_model_driven_eps_guard():
    from extremal_limit.levy import LogTailModel
    with pytest.raises(DomainError):
        fidi_convergence_experiment(0.1, [0.5, 1], 100, 10.0, 1, model=LogTailModel(1), eps=1e-6)


def test_fidi_model_driven_logtail():
    from extremal_limit.levy import LogTailModel
    r = fidi_convergence_experiment(0.05, [0.5, 1, 2], 20_000, 10.0, 3, model=LogTailModel(1))
    assert r.max_discrepancy < 0.03


# ------------------------------------------------------ extremal checks

def test_extremal_checks():
    c = extremal_process_checks(1.0, 2.0, 1.0, 100_000, 5)
    assert c.holding_ks <= 0.01 and c.jump_ratio_ks <= 0.01
    assert c.two_sampler_ks <= 0.01 and c.law_ks <= 0.01
    assert c.transition_max_discrepancy <= 0.01
