import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparseofdm.analysis import (
    RegimeWarning,
    TapStatistics,
    approx_schedule,
    fake_tap_power,
    monte_carlo_tap_field,
    next_noise_variance,
    optimal_threshold,
    p_false_alarm,
    report,
    thresholding_snr,
    variance_growth_ratio,
)

positive = st.floats(1e-3, 1e3)


def rayleigh_noise(sigma2, n, seed):
    r = np.random.default_rng(seed)
    return np.abs(np.sqrt(sigma2) * (r.standard_normal(n) + 1j * r.standard_normal(n)))


def test_false_alarm_examples():
    assert p_false_alarm(0.0, 0.7) == 1.0
    s2 = 0.7
    assert p_false_alarm(np.sqrt(s2) * np.sqrt(2 * np.log(2)), s2) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        p_false_alarm(-1.0, 1.0)
    with pytest.raises(ValueError):
        p_false_alarm(1.0, 0.0)


@pytest.mark.parametrize("f", [0.5, 1.0, 2.0])
def test_false_alarm_monte_carlo(f):
    s2, n = 0.3, 1_000_000
    amp = rayleigh_noise(s2, n, seed=1)
    eta = f * np.sqrt(s2)
    p = p_false_alarm(eta, s2)
    assert abs(np.mean(amp > eta) - p) <= 3 * np.sqrt(p * (1 - p) / n)


def test_fake_tap_power_examples():
    assert fake_tap_power(0.0, 0.4) == pytest.approx(0.8)
    assert fake_tap_power(np.sqrt(0.4), 0.4) == pytest.approx(1.2)


@pytest.mark.parametrize("f", [0.5, 1.0, 2.0])
def test_fake_tap_power_monte_carlo(f):
    s2 = 0.3
    amp = rayleigh_noise(s2, 1_000_000, seed=2)
    eta = f * np.sqrt(s2)
    assert np.mean(amp[amp > eta] ** 2) == pytest.approx(fake_tap_power(eta, s2), rel=0.02)


def test_next_noise_variance_examples():
    assert next_noise_variance(0.0, 0.4) == pytest.approx(0.4)
    assert next_noise_variance(2 * np.sqrt(0.4), 0.4) == pytest.approx(1.2)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 100), positive, st.floats(0, 100))
def test_closed_form_properties(eta, s2, d_eta):
    assert next_noise_variance(eta, s2) == pytest.approx(fake_tap_power(eta, s2) / 2, rel=1e-15)
    assert next_noise_variance(eta, s2) >= s2
    assert p_false_alarm(eta + d_eta, s2) <= p_false_alarm(eta, s2)
    assert p_false_alarm(eta, s2 * 2) >= p_false_alarm(eta, s2)


def test_growth_ratio_example():
    assert variance_growth_ratio(TapStatistics(1.0, 1.0, 0.5)) == pytest.approx(1 + 2 * np.log(2), abs=1e-12)
    assert variance_growth_ratio(TapStatistics(1.0, 1.0, 0.5)) == pytest.approx(2.3863, abs=1e-4)


def test_growth_ratio_warns_below_one():
    with pytest.warns(RegimeWarning):
        assert variance_growth_ratio(TapStatistics(1.0, 1.0, 0.9)) < 1


@settings(max_examples=60, deadline=None)
@given(positive, positive, st.floats(1e-4, 0.5))
def test_compositional_identity(tap2, n2, p):
    stats = TapStatistics(tap2, n2, p)
    a = (n2 + tap2) / tap2
    b = (1 - p) / p * (n2 + tap2) / n2
    if b <= 1.0:
        with pytest.raises(ValueError):
            optimal_threshold(stats)
        return
    ratio = variance_growth_ratio(stats)
    assert ratio >= 1
    composed = next_noise_variance(optimal_threshold(stats), n2) / n2
    assert composed == pytest.approx(ratio, rel=1e-12)


def test_optimal_threshold_examples():
    stats = TapStatistics(1.0, 1.0, 0.5)
    assert optimal_threshold(stats, verbatim=True) == pytest.approx(np.sqrt(4 * np.log(2)))
    assert optimal_threshold(stats, verbatim=True) == pytest.approx(1.6651, abs=1e-4)
    assert optimal_threshold(stats, verbatim=False) == optimal_threshold(stats, verbatim=True)
    other = TapStatistics(1.0, 0.04, 0.1)
    assert optimal_threshold(other, verbatim=True) == pytest.approx(0.2 * optimal_threshold(other))


@pytest.mark.parametrize("stats", [TapStatistics(1.0, 0.05, 0.1), TapStatistics(1.0, 0.01, 6 / 256)])
def test_optimal_threshold_maximizes_thresholding_snr(stats):
    obs, taps, _ = monte_carlo_tap_field(stats, 1_000_000, np.random.default_rng(9))
    eta = optimal_threshold(stats)
    best = thresholding_snr(obs, taps, eta)
    for f in (0.9, 1.1):
        assert best >= thresholding_snr(obs, taps, f * eta)


def test_optimal_threshold_is_likelihood_crossing():
    # MAP oracle: mixture posteriors of the two Rayleigh amplitude laws are equal
    stats = TapStatistics(1.0, 0.05, 0.1)
    eta = optimal_threshold(stats)
    s_n, s_t = stats.sigma_n2, stats.sigma_n2 + stats.sigma_tap2

    def rayleigh_pdf(r, s2):
        return r / s2 * np.exp(-r * r / (2 * s2))

    lhs = (1 - stats.p_tap) * rayleigh_pdf(eta, s_n)
    rhs = stats.p_tap * rayleigh_pdf(eta, s_t)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_approx_schedule_examples():
    stats = TapStatistics(1.0, 0.01, 6 / 256)
    k, _, s1 = approx_schedule(stats, 1)
    assert k == pytest.approx(1 + np.log(250 / 6 * 100))
    assert k == pytest.approx(9.335, abs=1e-3)
    _, _, s2 = approx_schedule(stats, 2)
    assert s2 / s1 == pytest.approx(k, rel=1e-14)
    with pytest.raises(ValueError):
        approx_schedule(stats, 4)
    with pytest.raises(ValueError):
        approx_schedule(stats, -1)
    with pytest.warns(RegimeWarning):
        approx_schedule(TapStatistics(1.0, 0.5, 0.1), 0)


def test_monte_carlo_field():
    obs, taps, support = monte_carlo_tap_field(TapStatistics(1.0, 0.1, 1.0), 1000, np.random.default_rng(0))
    assert support.all()
    n, p = 1_000_000, 0.1
    _, _, support = monte_carlo_tap_field(TapStatistics(1.0, 0.1, p), n, np.random.default_rng(1))
    assert abs(support.mean() - p) <= 3 * np.sqrt(p * (1 - p) / n)
    a = monte_carlo_tap_field(TapStatistics(1.0, 0.1, p), 100, np.random.default_rng(5))
    b = monte_carlo_tap_field(TapStatistics(1.0, 0.1, p), 100, np.random.default_rng(5))
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_stats_validation():
    with pytest.raises(ValueError):
        TapStatistics(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        TapStatistics(0.0, 1.0, 0.5)


def test_report_rows():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        rows = report(TapStatistics(1.0, 0.01, 6 / 256), n_draws=200_000)
    names = [r[0] for r in rows]
    assert any(n.startswith("p_false_alarm") for n in names)
    assert "variance_growth_ratio" in names
    for name, closed, mc in rows:
        if name.startswith(("p_false_alarm", "fake_tap_power")):
            assert mc == pytest.approx(closed, rel=0.03)
