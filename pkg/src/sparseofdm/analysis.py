"""Statistics of thresholding a sparse complex-Gaussian tap field.

Taps and noise are zero-mean circular complex Gaussians with per-dimension
variances ``sigma_tap2`` and ``sigma_n2``; amplitudes are Rayleigh. Each
sample is a tap with probability ``p_tap``.

Two readings of the optimal threshold are provided. ``verbatim=True`` uses
the noise *variance* as the prefactor of the square root, which gives a
threshold scaling like amplitude squared. ``verbatim=False`` uses the noise
standard deviation; this is the crossing point of the two Rayleigh
posteriors (the MAP detector) and is the one used for every cross-check.
"""
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TapStatistics",
    "RegimeWarning",
    "p_false_alarm",
    "fake_tap_power",
    "next_noise_variance",
    "variance_growth_ratio",
    "optimal_threshold",
    "approx_schedule",
    "monte_carlo_tap_field",
    "thresholding_snr",
]


class RegimeWarning(UserWarning):
    """Inputs lie outside the regime the approximations assume."""


@dataclass(frozen=True)
class TapStatistics:
    sigma_tap2: float
    sigma_n2: float
    p_tap: float
    n_cp: int = 256

    def __post_init__(self):
        if not (self.sigma_tap2 > 0 and self.sigma_n2 > 0):
            raise ValueError("variances must be positive")
        if not 0 < self.p_tap <= 1:
            raise ValueError("p_tap must lie in (0, 1]")


def _check(eta, sigma_n2):
    if np.any(np.asarray(eta) < 0):
        raise ValueError("eta must be >= 0")
    if not sigma_n2 > 0:
        raise ValueError("sigma_n2 must be > 0")


def p_false_alarm(eta, sigma_n2):
    """Probability that a noise-only amplitude exceeds ``eta``."""
    _check(eta, sigma_n2)
    return np.exp(-np.square(eta) / (2.0 * sigma_n2))


def fake_tap_power(eta, sigma_n2):
    """Mean ``|w|^2`` of noise samples whose amplitude exceeds ``eta``."""
    _check(eta, sigma_n2)
    return 2.0 * sigma_n2 * (1.0 + np.square(eta) / (2.0 * sigma_n2))


def next_noise_variance(eta, sigma_n2):
    """Per-dimension variance of the noise that survives thresholding."""
    return fake_tap_power(eta, sigma_n2) / 2.0


def _ratios(stats):
    a = (stats.sigma_n2 + stats.sigma_tap2) / stats.sigma_tap2
    b = (1.0 - stats.p_tap) / stats.p_tap * (stats.sigma_n2 + stats.sigma_tap2) / stats.sigma_n2
    return a, b


def variance_growth_ratio(stats):
    """``sigma_{n,i+1}^2 / sigma_{n,i}^2`` at the optimal threshold."""
    a, b = _ratios(stats)
    if b <= 1.0:
        warnings.warn(
            f"log argument {b:.4g} <= 1: the growth ratio falls below 1", RegimeWarning, stacklevel=2
        )
    return 1.0 + a * np.log(b)


def optimal_threshold(stats, verbatim=False):
    a, b = _ratios(stats)
    if b <= 1.0:
        raise ValueError(
            f"no positive optimal threshold: log argument {b:.4g} <= 1 "
            f"(sigma_n2={stats.sigma_n2}, sigma_tap2={stats.sigma_tap2}, p_tap={stats.p_tap})"
        )
    prefactor = stats.sigma_n2 if verbatim else np.sqrt(stats.sigma_n2)
    return prefactor * np.sqrt(2.0 * a * np.log(b))


def approx_schedule(stats0, i, verbatim=True):
    """High-SNR threshold schedule.

    Returns ``(k, eta_i, sigma_i2)``: the geometric growth factor ``k`` of
    the noise variance, the threshold at iteration ``i`` evaluated with
    ``sigma_{n,i}^2 = sigma_{n,0}^2 * k**i`` and that variance. ``log(k)`` is
    the predicted exponential rate of the threshold schedule.
    """
    if i < 0:
        raise ValueError("i must be >= 0")
    ratio = stats0.sigma_tap2 / stats0.sigma_n2
    if ratio < 10:
        warnings.warn(f"tap-to-noise ratio {ratio:.3g} < 10: high-SNR approximation is poor",
                      RegimeWarning, stacklevel=2)
    odds = (1.0 - stats0.p_tap) / stats0.p_tap
    k = 1.0 + np.log(odds * ratio)
    sigma_i2 = stats0.sigma_n2 * k ** i
    arg = odds * stats0.sigma_tap2 / sigma_i2
    if arg <= 1.0:
        raise ValueError(f"iteration {i}: noise variance {sigma_i2:.4g} has overtaken the taps")
    prefactor = sigma_i2 if verbatim else np.sqrt(sigma_i2)
    return k, prefactor * np.sqrt(2.0 * np.log(arg)), sigma_i2


def monte_carlo_tap_field(stats, n_samples, rng):
    """Draw noisy samples of a sparse tap field.

    Returns ``(observed, taps, support)`` where ``support`` is the boolean
    tap-occupancy mask.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    support = rng.random(n_samples) < stats.p_tap
    z = rng.standard_normal((2, n_samples))
    taps = np.where(support, np.sqrt(stats.sigma_tap2) * (z[0] + 1j * z[1]), 0.0)
    w = rng.standard_normal((2, n_samples))
    noise = np.sqrt(stats.sigma_n2) * (w[0] + 1j * w[1])
    return taps + noise, taps, support


def thresholding_snr(observed, taps, eta):
    """``sum |x|^2 / sum |x_hat - x|^2`` for keep-or-kill thresholding at ``eta``."""
    kept = np.where(np.abs(observed) >= eta, observed, 0.0)
    return float(np.sum(np.abs(taps) ** 2) / np.sum(np.abs(kept - taps) ** 2))


def report(stats, n_draws=1_000_000, rng=None, n_iter=5):
    """Closed forms next to Monte-Carlo estimates, one row per quantity.

    Rows are ``(quantity, closed_form, monte_carlo)``; ``monte_carlo`` is
    ``nan`` where no empirical counterpart exists.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    s2 = stats.sigma_n2
    sigma = np.sqrt(s2)
    w = np.sqrt(s2) * (rng.standard_normal(n_draws) + 1j * rng.standard_normal(n_draws))
    amp = np.abs(w)
    rows = []
    for f in (0.5, 1.0, 2.0):
        eta = f * sigma
        above = amp > eta
        rows.append((f"p_false_alarm(eta={f:g} sigma)", float(p_false_alarm(eta, s2)), float(above.mean())))
        rows.append((f"fake_tap_power(eta={f:g} sigma)", float(fake_tap_power(eta, s2)),
                     float(np.mean(amp[above] ** 2))))
        rows.append((f"next_noise_variance(eta={f:g} sigma)", float(next_noise_variance(eta, s2)),
                     float(np.mean(amp[above] ** 2)) / 2.0))
    try:
        eta_v = optimal_threshold(stats, verbatim=True)
        eta_c = optimal_threshold(stats, verbatim=False)
    except ValueError:
        return rows
    rows.append(("optimal_threshold (variance prefactor)", float(eta_v), float("nan")))
    rows.append(("optimal_threshold (std prefactor)", float(eta_c), float("nan")))
    rows.append(("variance_growth_ratio", float(variance_growth_ratio(stats)),
                 float(next_noise_variance(eta_c, s2) / s2)))
    obs, taps, _ = monte_carlo_tap_field(stats, n_draws, rng)
    rows.append(("thresholding_snr at optimal threshold [dB]", float("nan"),
                 10 * np.log10(thresholding_snr(obs, taps, eta_c))))
    etas = []
    for i in range(n_iter):
        try:
            k, eta_i, _ = approx_schedule(stats, i)
        except ValueError:
            break
        etas.append(eta_i)
        rows.append((f"approx_schedule threshold i={i}", float(eta_i), float("nan")))
    if len(etas) >= 2:
        slope = np.polyfit(np.arange(len(etas)), np.log(etas), 1)[0]
        rows.append(("log growth factor ln(k) vs fitted log-threshold slope", float(np.log(k)), float(slope)))
    return rows
