"""Pilot-aided channel estimators.

* linear interpolation across pilots (baseline, and the starting point of
  the iterative estimator),
* ATSSD: adaptive thresholding of the time-domain response alternating with
  regularized (MMSE) re-estimation of the surviving taps,
* the genie estimator, which simply reads the true channel.

The functions operate on :class:`~sparseofdm.ofdm_phy.PilotObservation`.
:class:`AtssdEstimator` and :class:`LinearInterpolationEstimator` wrap them
behind the scikit-learn ``fit``/``predict`` protocol, where ``X`` holds FFT
bin indices and ``y`` the complex CFR samples.
"""
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_complex_vector, check_index_set, check_nonnegative
from .channel import channel_cfr
from .numerics import SingularSystemError, dft, partial_dft_matrix, regularized_pinv_apply
from .ofdm_phy import (
    OfdmConfig,
    PilotObservation,
    active_bins,
    bin_to_carrier,
    data_carriers,
)

__all__ = [
    "AtssdParams",
    "ChannelEstimate",
    "DegenerateEstimateWarning",
    "li_initial_estimate",
    "li_estimate",
    "threshold_schedule",
    "detect_taps",
    "search_window",
    "mmse_lambda",
    "mmse_taps",
    "atssd_estimate",
    "genie_estimate",
    "estimate_channel_power",
    "AtssdEstimator",
    "LinearInterpolationEstimator",
]


class DegenerateEstimateWarning(UserWarning):
    """No tap survived the first threshold; the interpolated CFR is returned."""


@dataclass(frozen=True)
class AtssdParams:
    alpha: float = 0.8
    beta: float = 0.008
    iter_max: int = 5
    lambda_mode: str = "guard"
    max_delay: int = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if int(self.iter_max) != self.iter_max or self.iter_max < 1:
            raise ValueError("iter_max must be an integer >= 1")
        if self.lambda_mode not in ("guard", "genie"):
            raise ValueError("lambda_mode must be 'guard' or 'genie'")
        if self.max_delay is not None and self.max_delay < 1:
            raise ValueError("max_delay must be >= 1")


def search_window(params, cfg):
    """Number of leading CIR samples searched for taps.

    Delays ``t`` and ``t + fft_size/pilot_spacing`` are almost collinear on a
    single symbol's pilot grid, so by default the search stops at
    ``fft_size // pilot_spacing`` (and never goes past the cyclic prefix).
    """
    limit = cfg.fft_size // cfg.pilot_spacing if params.max_delay is None else params.max_delay
    return min(cfg.cp_len, limit)


@dataclass
class ChannelEstimate:
    support: np.ndarray
    tap_gains: np.ndarray
    cfr: np.ndarray
    iterations_used: int = 0
    degenerate: bool = False

    def cir(self, n):
        h = np.zeros(n, dtype=np.complex128)
        h[self.support] = self.tap_gains
        return h


def _check_obs(obs, cfg):
    bins = check_index_set(obs.pilot_bins, cfg.fft_size, "pilot_bins")
    values = check_complex_vector(obs.values, "values", length=bins.size)
    return bins, values


def li_initial_estimate(obs, cfg):
    """Linear interpolation between pilots in carrier order.

    Active carriers outside the pilot span take the nearest pilot value;
    guard bins are zero.
    """
    bins, values = _check_obs(obs, cfg)
    if bins.size < 2:
        raise ValueError("linear interpolation needs at least 2 pilots")
    carriers = bin_to_carrier(bins, cfg)
    order = np.argsort(carriers)
    pc, pv = carriers[order], values[order]
    c = np.arange(cfg.active_carriers)
    cfr = np.zeros(cfg.fft_size, dtype=np.complex128)
    cfr[active_bins(cfg)] = np.interp(c, pc, pv.real) + 1j * np.interp(c, pc, pv.imag)
    return cfr


def li_estimate(obs, cfg):
    cfr = li_initial_estimate(obs, cfg)
    empty = np.zeros(0, dtype=np.int64)
    return ChannelEstimate(support=empty, tap_gains=np.zeros(0, complex), cfr=cfr, iterations_used=0)


def threshold_schedule(i, params):
    """Detection threshold ``beta * exp(alpha * i)`` for iteration ``i``."""
    if i < 0:
        raise ValueError("iteration index must be >= 0")
    return params.beta * np.exp(params.alpha * i)


def detect_taps(cir, threshold):
    """Indices whose amplitude is at least ``threshold`` (ties kept)."""
    if not threshold > 0:
        raise ValueError("threshold must be > 0")
    return np.flatnonzero(np.abs(np.asarray(cir)) >= threshold)


def mmse_lambda(noise_var, channel_power, cfg):
    """Regularization ``2*sigma_w^2 / P_h`` for the pilot-domain system.

    ``noise_var`` is the per-dimension noise variance of the received grid;
    dividing out pilots of amplitude ``pilot_boost`` scales it by
    ``1/boost^2``.
    """
    noise_var = check_nonnegative(noise_var, "noise_var")
    if not channel_power > 0:
        raise ValueError("channel_power must be > 0")
    return 2.0 * noise_var / (cfg.pilot_boost ** 2 * channel_power)


def mmse_taps(obs, support, lam, cfg):
    """Regularized estimate of the tap gains on ``support``."""
    bins, values = _check_obs(obs, cfg)
    support = check_index_set(support, cfg.fft_size, "support")
    if support.size > bins.size:
        raise ValueError(f"support of size {support.size} exceeds the {bins.size} pilots")
    a = partial_dft_matrix(cfg.fft_size, bins, support)
    return regularized_pinv_apply(a, values, lam)


def _solve_with_floor(obs, support, lam, cfg):
    try:
        return mmse_taps(obs, support, lam, cfg)
    except SingularSystemError:
        if lam > 0:
            raise
    # noiseless input with a rank-deficient support: smallest ridge that factorizes
    return mmse_taps(obs, support, 1e-10 * obs.pilot_bins.size, cfg)


def atssd_estimate(obs, params, cfg, noise_var, channel_power=1.0):
    """Iterative tap detection and regularized re-estimation.

    The interpolated CFR is taken to the time domain and truncated to
    :func:`search_window` samples. Each pass keeps taps at or above
    ``threshold_schedule(i)``, re-estimates them from the pilots and rebuilds
    the impulse response. The loop ends when the detected support repeats
    (a repeated support would reproduce the same gains) or after
    ``iter_max`` passes. ``iterations_used`` counts re-estimation passes.
    """
    bins, _ = _check_obs(obs, cfg)
    lam = mmse_lambda(noise_var, channel_power, cfg)
    li_cfr = li_initial_estimate(obs, cfg)
    window = search_window(params, cfg)
    cir = dft(li_cfr, inverse=True)[:window]

    support = prev = None
    gains = None
    used = 0
    for i in range(params.iter_max):
        cand = detect_taps(cir, threshold_schedule(i, params))
        if cand.size == 0:
            if i == 0:
                warnings.warn(
                    "no tap above the initial threshold; returning the interpolated CFR",
                    DegenerateEstimateWarning,
                    stacklevel=2,
                )
                est = li_estimate(obs, cfg)
                est.degenerate = True
                return est
            break
        if cand.size > bins.size:
            # keep the strongest taps so the system stays overdetermined
            keep = np.argsort(-np.abs(cir[cand]), kind="stable")[: bins.size]
            cand = np.sort(cand[keep])
        if prev is not None and np.array_equal(cand, prev):
            break
        gains = _solve_with_floor(obs, cand, lam, cfg)
        support = cand
        used += 1
        cir = np.zeros(window, dtype=np.complex128)
        cir[support] = gains
        prev = cand

    h = np.zeros(cfg.fft_size, dtype=np.complex128)
    h[support] = gains
    return ChannelEstimate(support=support, tap_gains=gains, cfr=dft(h), iterations_used=used)


def genie_estimate(state, cfg):
    """The true channel, used as the ideal-estimation reference."""
    order = np.argsort(state.indices, kind="stable")
    return ChannelEstimate(
        support=state.indices[order],
        tap_gains=state.gains[order],
        cfr=channel_cfr(state, cfg.fft_size),
        iterations_used=0,
    )


def estimate_channel_power(rx, cfg, constellation_power=1.0):
    """Received data power divided by the constellation power."""
    db = active_bins(cfg)[data_carriers(rx.symbol_index, cfg)]
    return float(np.mean(np.abs(rx.bins[db]) ** 2)) / constellation_power


class _PilotRegressor(BaseEstimator):
    """Shared ``predict`` for estimators fitted on pilot bins."""

    def _config(self):
        return self.config if self.config is not None else OfdmConfig()

    def _observation(self, X, y):
        cfg = self._config()
        bins = check_index_set(X, cfg.fft_size, "X")
        values = check_complex_vector(y, "y", length=bins.size)
        return cfg, PilotObservation(pilot_bins=bins, values=values)

    def predict(self, X):
        """CFR estimate at the FFT bins in ``X``."""
        check_is_fitted(self, "cfr_")
        bins = check_index_set(X, self.cfr_.size, "X")
        return self.cfr_[bins]


class LinearInterpolationEstimator(_PilotRegressor):
    """Linear interpolation of pilot CFR samples across the active band.

    Attributes
    ----------
    cfr_ : ndarray of shape (fft_size,)
    """

    def __init__(self, config=None):
        self.config = config

    def fit(self, X, y):
        cfg, obs = self._observation(X, y)
        self.cfr_ = li_initial_estimate(obs, cfg)
        return self


class AtssdEstimator(_PilotRegressor):
    """Sparse channel estimation by adaptive thresholding and MMSE.

    Parameters
    ----------
    alpha, beta : float
        Threshold schedule ``beta * exp(alpha * i)``.
    iter_max : int
        Maximum number of re-estimation passes.
    max_delay : int, optional
        Tap search window in samples; see :func:`search_window`.
    config : OfdmConfig, optional
        Grid numerology; defaults to the 2K mode.

    Attributes
    ----------
    support_ : ndarray of int
        Detected tap delays in samples.
    tap_gains_ : ndarray of complex
    cfr_ : ndarray of shape (fft_size,)
    n_iter_ : int
    degenerate_ : bool
        True when no tap survived the first threshold.
    lambda_ : float
        Regularization used in the tap re-estimation.
    """

    def __init__(self, alpha=0.8, beta=0.008, iter_max=5, max_delay=None, config=None):
        self.alpha = alpha
        self.beta = beta
        self.iter_max = iter_max
        self.max_delay = max_delay
        self.config = config

    def fit(self, X, y, noise_var=0.0, channel_power=1.0):
        """Estimate the channel from pilot bins ``X`` and CFR samples ``y``.

        ``noise_var`` is the per-dimension noise variance of the received
        grid and ``channel_power`` the average channel power.
        """
        cfg, obs = self._observation(X, y)
        params = AtssdParams(alpha=self.alpha, beta=self.beta, iter_max=self.iter_max,
                             max_delay=self.max_delay)
        est = atssd_estimate(obs, params, cfg, noise_var, channel_power)
        self.support_ = est.support
        self.tap_gains_ = est.tap_gains
        self.cfr_ = est.cfr
        self.n_iter_ = est.iterations_used
        self.degenerate_ = est.degenerate
        self.lambda_ = mmse_lambda(noise_var, channel_power, cfg)
        return self

    def impulse_response(self):
        """Sparse CIR over the cyclic-prefix span."""
        check_is_fitted(self, "cfr_")
        h = np.zeros(self._config().cp_len, dtype=np.complex128)
        h[self.support_] = self.tap_gains_
        return h
