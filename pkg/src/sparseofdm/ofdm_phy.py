"""Frequency-grid assembly and receiver front end for a DVB-T/H 2K-style link.

Active carriers are indexed ``0 .. active_carriers-1`` and centred on DC:
carrier ``c`` sits in FFT bin ``(c - active_carriers//2) mod fft_size``. The
remaining bins are the zero-padded guard band.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import check_complex_vector, check_index_set

__all__ = [
    "OfdmConfig",
    "FreqGrid",
    "PilotObservation",
    "carrier_to_bin",
    "bin_to_carrier",
    "active_bins",
    "guard_bins",
    "pilot_carriers",
    "data_carriers",
    "pilot_values",
    "build_symbol",
    "add_cp",
    "remove_cp",
    "extract_pilots",
    "equalize",
    "estimate_noise_from_guard",
    "ERASURE_THRESHOLD",
]

ERASURE_THRESHOLD = 1e-12
DEFAULT_PRBS_SEED = 0x7FF


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM numerology. Defaults are the 2K mode with a 1/8 guard interval."""

    fft_size: int = 2048
    active_carriers: int = 1705
    cp_len: int = 256
    elementary_period: float = 224e-6 / 2048
    pilot_spacing: int = 12
    pilot_phase_stride: int = 3
    pilot_boost: float = 4.0 / 3.0
    constellation: str = "qam16"

    def __post_init__(self):
        if self.fft_size < 2:
            raise ValueError("fft_size must be >= 2")
        if not 2 <= self.active_carriers <= self.fft_size:
            raise ValueError("active_carriers must be in [2, fft_size]")
        if not 0 <= self.cp_len < self.fft_size:
            raise ValueError("cp_len must satisfy 0 <= cp_len < fft_size")
        if self.elementary_period <= 0:
            raise ValueError("elementary_period must be positive")
        if self.pilot_spacing < 1 or self.pilot_phase_stride < 0:
            raise ValueError("invalid pilot pattern")
        if self.pilot_boost <= 0:
            raise ValueError("pilot_boost must be positive")
        if self.constellation != "qam16":
            raise ValueError("only 'qam16' is supported")

    @property
    def center_carrier(self):
        return self.active_carriers // 2

    @property
    def symbol_duration(self):
        """Useful part plus cyclic prefix, in seconds."""
        return (self.fft_size + self.cp_len) * self.elementary_period


@dataclass
class FreqGrid:
    """One OFDM symbol in the frequency domain (all ``fft_size`` bins)."""

    bins: np.ndarray
    symbol_index: int = 0


@dataclass
class PilotObservation:
    """Noisy CFR samples at the pilot bins of one symbol."""

    pilot_bins: np.ndarray
    values: np.ndarray
    symbol_index: int = 0

    def __post_init__(self):
        self.pilot_bins = np.asarray(self.pilot_bins, dtype=np.int64)
        self.values = check_complex_vector(self.values, "values", length=self.pilot_bins.size)


def carrier_to_bin(carrier, cfg):
    c = np.asarray(carrier)
    if np.any(c < 0) or np.any(c >= cfg.active_carriers):
        raise ValueError(f"carrier out of range [0, {cfg.active_carriers})")
    out = (c.astype(np.int64) - cfg.center_carrier) % cfg.fft_size
    return int(out) if out.ndim == 0 else out


def bin_to_carrier(b, cfg):
    c = (np.asarray(b, dtype=np.int64) + cfg.center_carrier) % cfg.fft_size
    if np.any(c >= cfg.active_carriers):
        raise ValueError("bin lies in the guard band")
    return int(c) if c.ndim == 0 else c


@lru_cache(maxsize=8)
def _active_bins(cfg):
    b = carrier_to_bin(np.arange(cfg.active_carriers), cfg)
    b.setflags(write=False)
    return b


@lru_cache(maxsize=8)
def _guard_bins(cfg):
    mask = np.ones(cfg.fft_size, dtype=bool)
    mask[_active_bins(cfg)] = False
    g = np.flatnonzero(mask)
    g.setflags(write=False)
    return g


def active_bins(cfg):
    """FFT bins of carriers ``0 .. active_carriers-1`` in carrier order."""
    return _active_bins(cfg)


def guard_bins(cfg):
    return _guard_bins(cfg)


@lru_cache(maxsize=64)
def _pilot_carriers(symbol_index, cfg):
    c = np.arange(cfg.active_carriers)
    offset = cfg.pilot_phase_stride * (symbol_index % 4)
    mask = (c % cfg.pilot_spacing) == (offset % cfg.pilot_spacing)
    mask[0] = mask[-1] = True
    out = c[mask]
    out.setflags(write=False)
    return out


def pilot_carriers(symbol_index, cfg):
    """Scattered pilot carriers of a symbol plus the two band-edge pilots."""
    return _pilot_carriers(int(symbol_index) % 4, cfg)


def data_carriers(symbol_index, cfg):
    mask = np.ones(cfg.active_carriers, dtype=bool)
    mask[pilot_carriers(symbol_index, cfg)] = False
    return np.flatnonzero(mask)


@lru_cache(maxsize=8)
def _prbs(n, seed):
    # x^11 + x^2 + 1 generator; one output bit per carrier index
    if not 0 < seed < (1 << 11):
        raise ValueError("pilot_prbs_seed must be a nonzero 11-bit value")
    reg = [(seed >> k) & 1 for k in range(11)]
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        out[i] = reg[10]
        fb = reg[10] ^ reg[1]
        reg = [fb] + reg[:10]
    out.setflags(write=False)
    return out


def pilot_values(carriers, cfg, pilot_prbs_seed=DEFAULT_PRBS_SEED):
    """Boosted BPSK pilot symbols ``boost * (1 - 2*w[c])``."""
    w = _prbs(cfg.active_carriers, pilot_prbs_seed)
    return cfg.pilot_boost * (1.0 - 2.0 * w[np.asarray(carriers)]).astype(np.complex128)


def build_symbol(data, symbol_index, cfg, pilot_prbs_seed=DEFAULT_PRBS_SEED):
    """Place data and pilots on the active carriers; guard bins stay zero."""
    pc = pilot_carriers(symbol_index, cfg)
    dc = data_carriers(symbol_index, cfg)
    data = check_complex_vector(data, "data", length=dc.size)
    bins = np.zeros(cfg.fft_size, dtype=np.complex128)
    act = active_bins(cfg)
    bins[act[pc]] = pilot_values(pc, cfg, pilot_prbs_seed)
    bins[act[dc]] = data
    return FreqGrid(bins=bins, symbol_index=int(symbol_index))


def add_cp(time, cfg):
    time = check_complex_vector(time, "time", length=cfg.fft_size)
    return np.concatenate([time[cfg.fft_size - cfg.cp_len:], time])


def remove_cp(time, cfg):
    time = check_complex_vector(time, "time", length=cfg.fft_size + cfg.cp_len)
    return time[cfg.cp_len:].copy()


def extract_pilots(rx, cfg, pilot_prbs_seed=DEFAULT_PRBS_SEED):
    """Divide the known pilots out of the received grid."""
    pc = pilot_carriers(rx.symbol_index, cfg)
    pb = active_bins(cfg)[pc]
    values = rx.bins[pb] / pilot_values(pc, cfg, pilot_prbs_seed)
    return PilotObservation(pilot_bins=pb, values=values, symbol_index=rx.symbol_index)


def equalize(rx, cfr, cfg, noise_var=0.0):
    """Zero-forcing equalization of the data carriers.

    Returns ``(x_hat, eff_noise_var, erased)`` where ``eff_noise_var`` is the
    per-carrier total noise variance ``2*noise_var/|H|^2``. Carriers with
    ``|H| < ERASURE_THRESHOLD`` are flagged as erased and set to 0.
    """
    cfr = check_complex_vector(cfr, "cfr", length=cfg.fft_size)
    db = active_bins(cfg)[data_carriers(rx.symbol_index, cfg)]
    h = cfr[db]
    erased = np.abs(h) < ERASURE_THRESHOLD
    safe = np.where(erased, 1.0, h)
    x_hat = np.where(erased, 0.0, rx.bins[db] / safe)
    eff = np.where(erased, np.inf, 2.0 * noise_var / np.abs(safe) ** 2)
    return x_hat, eff, erased


def estimate_noise_from_guard(grids, cfg):
    """Per-dimension noise variance from the received guard bins."""
    grids = list(grids)
    if not grids:
        raise ValueError("need at least one grid")
    gb = guard_bins(cfg)
    if gb.size == 0:
        raise ValueError("configuration has no guard bins")
    power = np.mean([np.mean(np.abs(g.bins[gb]) ** 2) for g in grids])
    return float(power) / 2.0
