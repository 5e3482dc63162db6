"""Simulation engines against the closed-form laws they must reproduce."""

import math

import numpy as np
import pytest

from phasemix import build_mixture
from phasemix.competing import sub_distribution
from phasemix.errors import (
    InsufficientSampleError,
    ModelValidationError,
    OutOfSupportError,
)
from phasemix.gph import GPHDistribution
from phasemix.mixture import (
    format_path_line,
    information_state,
    parse_path_line,
    posterior_current,
)
from phasemix.montecarlo import (
    REGIME_BASE,
    REGIME_SCALED,
    SimulationConfig,
    empirical_cause_cdf,
    empirical_posterior,
    empirical_survival,
    sample_path,
    simulate_ensemble,
    simulate_paths,
)


def test_per_path_determinism(marital):
    config = SimulationConfig(paths=50, seed=42)
    first = simulate_paths(marital, config)
    second = simulate_paths(marital, config)
    assert [p.record for p in first] == [p.record for p in second]
    assert [p.regime for p in first] == [p.regime for p in second]
    other = simulate_paths(marital, SimulationConfig(paths=50, seed=43))
    assert [p.record for p in other] != [p.record for p in first]


def test_per_path_independent_of_batch(marital):
    # path index keys the stream, so path 7 is the same alone or in bulk
    config = SimulationConfig(paths=10, seed=5)
    bulk = simulate_paths(marital, config)
    assert sample_path(marital, 7, config).record == bulk[7].record


def test_ensemble_determinism(marital):
    config = SimulationConfig(paths=1000, seed=9)
    a = simulate_ensemble(marital, config)
    b = simulate_ensemble(marital, config)
    np.testing.assert_array_equal(a.absorption_time, b.absorption_time)
    np.testing.assert_array_equal(a.start, b.start)
    np.testing.assert_array_equal(a.regime, b.regime)


def test_regime_forcing(marital):
    base_only = simulate_paths(marital, SimulationConfig(
        paths=20, seed=1, regime="base"))
    assert all(p.regime == REGIME_BASE for p in base_only)
    scaled_only = simulate_paths(marital, SimulationConfig(
        paths=20, seed=1, regime="scaled"))
    assert all(p.regime == REGIME_SCALED for p in scaled_only)


def test_paths_round_trip_text(marital):
    for p in simulate_paths(marital, SimulationConfig(paths=25, seed=3)):
        assert parse_path_line(format_path_line(p.record)) == p.record


def test_censoring(marital):
    paths = simulate_paths(marital, SimulationConfig(
        paths=200, seed=11, horizon=5.0))
    for p in paths:
        if p.absorbed:
            assert p.record.total_time <= 5.0 + 1e-12
            assert p.absorption_time == pytest.approx(p.record.total_time)
        else:
            assert p.record.total_time == pytest.approx(5.0)
            assert math.isinf(p.absorption_time)
    assert any(not p.absorbed for p in paths)


def test_ensemble_survival_concordance(marital):
    sample = simulate_ensemble(marital, SimulationConfig(paths=100_000, seed=7))
    law = GPHDistribution(marital)
    grid = np.array([1.0, 5.0, 15.0, 40.0])
    curve = empirical_survival(sample, grid)
    for t, est, se in zip(grid, curve.columns["survival"],
                          curve.columns["se"]):
        assert abs(est - law.survival(t)) < 3.0 * se


def test_ensemble_mean_concordance(marital):
    sample = simulate_ensemble(marital, SimulationConfig(paths=100_000, seed=13))
    law = GPHDistribution(marital)
    mean, second = law.moment(1), law.moment(2)
    se = math.sqrt((second - mean ** 2) / sample.absorption_time.size)
    assert abs(sample.absorption_time.mean() - mean) < 3.0 * se


def test_per_path_engine_concordance(marital):
    paths = simulate_paths(marital, SimulationConfig(paths=4000, seed=21))
    times = np.array([p.absorption_time for p in paths])
    law = GPHDistribution(marital)
    mean, second = law.moment(1), law.moment(2)
    se = math.sqrt((second - mean ** 2) / times.size)
    assert abs(times.mean() - mean) < 3.0 * se


def test_ensemble_cause_concordance(marital_competing):
    config = SimulationConfig(paths=100_000, seed=17, start_state=1)
    sample = simulate_ensemble(marital_competing, config)
    info = information_state(marital_competing, 1, 0.0, regime="initial")
    grid = np.array([2.0, 8.0, 30.0])
    for cause in (0, 1):
        curve = empirical_cause_cdf(sample, grid, cause)
        for t, est, se in zip(grid, curve.columns["cause_cdf"],
                              curve.columns["se"]):
            want = sub_distribution(marital_competing, info, t, cause)
            assert abs(est - want) < 3.0 * se


def test_cause_cdf_from_path_list_needs_dimension(marital_competing):
    config = SimulationConfig(paths=300, seed=2, start_state=1)
    paths = simulate_paths(marital_competing, config)
    with pytest.raises(OutOfSupportError, match="n_transient"):
        empirical_cause_cdf(paths, np.array([2.0]), 0)
    curve = empirical_cause_cdf(paths, np.array([2.0]), 0, n_transient=3)
    assert 0.0 <= curve.columns["cause_cdf"][0] <= 1.0


def test_empirical_posterior_concordance(marital):
    config = SimulationConfig(paths=200_000, seed=23)
    sample = simulate_ensemble(marital, config, probe_times=(4.0,))
    want = posterior_current(marital, 4.0)
    for state in range(marital.n_transient):
        est = empirical_posterior(sample, state, 4.0)
        assert est.count >= 500
        assert abs(est.value - want[state]) < 3.0 * est.se


def test_empirical_posterior_needs_probe_time(marital):
    sample = simulate_ensemble(marital, SimulationConfig(paths=1000, seed=3),
                               probe_times=(4.0,))
    with pytest.raises(OutOfSupportError, match="probe"):
        empirical_posterior(sample, 1, 5.0)


def test_empirical_posterior_needs_regime_labels(marital):
    sample = simulate_ensemble(
        marital, SimulationConfig(paths=1000, seed=3, record_regime=False),
        probe_times=(4.0,))
    with pytest.raises(OutOfSupportError):
        empirical_posterior(sample, 1, 4.0)


def test_empirical_posterior_small_sample_guard(marital):
    sample = simulate_ensemble(marital, SimulationConfig(paths=600, seed=3),
                               probe_times=(30.0,))
    # the first state at age 30 is occupied with probability ~2e-4
    with pytest.raises(InsufficientSampleError):
        empirical_posterior(sample, 0, 30.0)


def test_defective_start_needs_pinning(marital_competing):
    with pytest.raises(ModelValidationError, match="start_state"):
        simulate_ensemble(marital_competing,
                          SimulationConfig(paths=100, seed=1))
    pinned = simulate_ensemble(
        marital_competing, SimulationConfig(paths=100, seed=1, start_state=1))
    assert np.all(pinned.start == 1)


def test_infinite_horizon_needs_certain_absorption():
    T = np.array([[-1.0, 0.5], [0.2, -0.7]])
    model = build_mixture(T, speed=[1.0, 0.0], initial=[0.5, 0.5],
                          scaled_weight=0.5, require_absorbing=False)
    with pytest.raises(OutOfSupportError, match="horizon"):
        simulate_paths(model, SimulationConfig(paths=10, seed=1,
                                               regime="scaled"))
    # fine with a finite horizon, and fine for the base regime alone
    simulate_paths(model, SimulationConfig(paths=10, seed=1,
                                           regime="scaled", horizon=4.0))
    simulate_paths(model, SimulationConfig(paths=10, seed=1, regime="base"))


def test_survival_grid_beyond_censor_limit(marital):
    sample = simulate_ensemble(marital, SimulationConfig(
        paths=1000, seed=5, horizon=10.0))
    with pytest.raises(OutOfSupportError):
        empirical_survival(sample, np.array([5.0, 12.0]))


def test_probe_states_mark_absorption(marital):
    sample = simulate_ensemble(marital, SimulationConfig(paths=5000, seed=29),
                               probe_times=(2.0, 60.0))
    probes = sample.probe_states
    assert probes.shape == (2, 5000)
    absorbed_late = sample.absorption_time <= 60.0
    # absorbing states are labeled past the transient range
    assert np.all(probes[1, absorbed_late] >= marital.n_transient)
    alive_early = sample.absorption_time > 2.0
    assert np.all(probes[0, alive_early] < marital.n_transient)