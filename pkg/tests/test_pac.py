import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybrid_oracle.oracle import OracleSpec, truth_table
from hybrid_oracle.pac import (
    DegenerateOracle,
    HypothesisClass,
    NonConvergent,
    PacParams,
    SampleSet,
    a_factor,
    a_factor_series,
    average_success,
    draw_samples,
    error_rate,
    model_curve,
    pac_bound,
    pac_learn,
    sample_bound_noiseless,
    sample_bound_noisy,
    validate_learner,
)


def direct_average(n, probs):
    return sum(math.comb(n, w) * p for w, p in enumerate(probs)) / 2**n


def test_average_examples():
    assert average_success(5, lambda w: np.ones_like(w, dtype=float)) == pytest.approx(1.0)
    assert average_success(2, [1.0, 0.9, 0.8]) == pytest.approx(0.9, abs=1e-15)
    with pytest.raises(ValueError):
        average_success(2, [1.0, 0.9])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 60), st.floats(1, 1e7))
def test_average_matches_exact_binomials(n, c):
    probs = [0.5 * (1 + math.exp(-(2.0**w) / c)) for w in range(n + 1)]
    assert average_success(n, model_curve(c)) == pytest.approx(direct_average(n, probs), rel=1e-12)


def test_average_is_stable_at_large_n():
    value = average_success(10_000, model_curve(500.0))
    assert value == pytest.approx(0.5, abs=1e-12)
    # weights alone must still sum to one
    assert average_success(10_000, lambda w: np.ones(w.size)) == pytest.approx(1.0, rel=1e-9)


def test_hybrid_average_exceeds_classical_at_35():
    c = 500.0
    assert average_success(35, model_curve(10**1.4 * c)) > average_success(35, model_curve(c))


def test_a_factor_examples():
    assert a_factor(1.0) == 1.0
    assert a_factor(0.75) == pytest.approx(4.0)
    assert a_factor(0.5 + 1e-6) > 1e11
    with pytest.raises(DegenerateOracle):
        a_factor(0.5)


def test_series_limits_and_cross_check():
    assert a_factor_series(10, math.inf, 500) == 1.0
    direct = a_factor(average_success(12, model_curve(500)))
    assert a_factor_series(12, 1.0, 500) == pytest.approx(direct, rel=1e-6)


def test_series_against_exact_rationals():
    # independent oracle: the same series in exact rational arithmetic, t = 1/2
    n, t = 4, Fraction(1, 2)
    total = Fraction(0)
    for j in range(60):
        total += (-t) ** j / math.factorial(j) * Fraction(2**j + 1, 2) ** n
    assert a_factor_series(n, 1.0, 2.0) == pytest.approx(float(1 / total**2), rel=1e-12)


@pytest.mark.parametrize("gamma,n_top", [(1.0, 21), (10**1.4, 26)])
def test_series_agrees_where_convergent(gamma, n_top):
    for n in range(0, n_top + 1):
        direct = a_factor(average_success(n, model_curve(gamma * 500)))
        assert a_factor_series(n, gamma, 500) == pytest.approx(direct, rel=1e-6)


def test_series_reports_nonconvergence():
    with pytest.raises(NonConvergent):
        a_factor_series(30, 10**1.4, 500)
    a_q = a_factor(average_success(30, model_curve(10**1.4 * 500)))
    a_c = a_factor(average_success(30, model_curve(500)))
    assert a_q < a_c / 100


def test_noisy_bound_examples():
    assert sample_bound_noisy(PacParams(0.1, 0.1, 8, 0.25)) == 6833
    assert sample_bound_noisy(PacParams(0.1, 0.1, 8, 0.0)) == math.ceil(200 * math.log(5120))
    with pytest.raises(DegenerateOracle):
        sample_bound_noisy(PacParams(0.1, 0.1, 8, 0.5))


def test_noiseless_bound_examples():
    assert sample_bound_noiseless(0.1, 0.1, 8) == 79
    assert sample_bound_noiseless(0.1, 0.999, 0) in (0, 1)
    full = (8 * math.log(2) - math.log(0.1)) / 0.1
    half = (8 * math.log(2) - math.log(0.1)) / 0.05
    assert half == pytest.approx(2 * full)
    assert sample_bound_noiseless(0.05, 0.1, 8) == math.ceil(half)


def test_pac_bound_record():
    bound = pac_bound(PacParams(0.1, 0.1, 4, 0.25))
    assert (bound.M, bound.A, bound.p_bar) == (4615, 4.0, 0.75)
    with pytest.raises(ValueError):
        PacParams(0.0, 0.1, 4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_hypothesis_tables_match_oracles(n):
    hclass = HypothesisClass(n)
    assert len(hclass) == 2 ** (2**n)
    for i in range(0, len(hclass), max(1, len(hclass) // 17)):
        oracle = hclass.oracle(i)
        assert np.array_equal(hclass.tables[i], truth_table(oracle))
        assert hclass.index_of(oracle) == i


def test_learner_recovers_target_from_full_data():
    hclass = HypothesisClass(3)
    target = hclass.oracle(173)
    inputs = np.arange(8)
    samples = SampleSet(inputs, truth_table(target)[inputs])
    assert pac_learn(samples, hclass) == 173


def test_learner_majority_under_noise():
    hclass = HypothesisClass(2)
    target = hclass.oracle(9)
    samples = draw_samples(target, 4000, np.random.default_rng(1), xi=0.25)
    assert pac_learn(samples, hclass) == 9


def test_error_rate_examples():
    h = OracleSpec.explicit([0, 1, 1, 0])
    assert error_rate(h, h) == 0.0
    assert error_rate(OracleSpec.explicit([1, 1, 1, 0]), h) == 1.0
    assert error_rate(OracleSpec.explicit([0, 1, 1, 1]), h) == 0.25


def test_learner_guarantee_noiseless():
    summary = validate_learner(3, 0.1, 0.1, runs=500, seed=1)
    assert summary.samples == 79
    assert summary.wilson_low >= 0.9


def test_learner_guarantee_noisy():
    summary = validate_learner(2, 0.1, 0.1, xi=0.25, runs=500, seed=2)
    assert summary.samples == 4615
    assert summary.wilson_low >= 0.9


def test_no_data_control_is_chance():
    summary = validate_learner(3, 0.1, 0.1, samples=0, runs=300, seed=3)
    # with no samples the learner always returns hypothesis 0
    assert summary.success_fraction < 0.2
