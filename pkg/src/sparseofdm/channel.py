"""Sparse multipath channel: tapped-delay-line profiles, Jakes fading, AWGN.

Fading is quasi-static: tap gains are constant over one OFDM symbol and move
between symbols, so the channel acts as a per-bin multiplication in the
frequency domain.
"""
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import dft
from .ofdm_phy import FreqGrid

__all__ = [
    "ChannelProfile",
    "CirState",
    "BRAZIL_D",
    "BUILTIN_PROFILES",
    "sample_profile",
    "evolve_taps",
    "channel_cfr",
    "apply_channel",
    "add_awgn",
    "snr_to_sigma2",
]

N_OSCILLATORS = 16


@dataclass(frozen=True)
class ChannelProfile:
    """Tap delays in microseconds and average powers in dB."""

    taps: tuple
    name: str = "custom"

    def __post_init__(self):
        taps = tuple((float(d), float(p)) for d, p in self.taps)
        if not taps:
            raise ValueError("profile needs at least one tap")
        delays = np.array([d for d, _ in taps])
        if np.any(delays < 0) or np.any(np.diff(delays) <= 0):
            raise ValueError("tap delays must be nonnegative and strictly increasing")
        object.__setattr__(self, "taps", taps)

    @property
    def delays_us(self):
        return np.array([d for d, _ in self.taps])

    @property
    def powers_db(self):
        return np.array([p for _, p in self.taps])

    @classmethod
    def from_file(cls, path):
        """Read ``delay_us power_db`` pairs, one per line.

        Fields may be separated by whitespace or commas; ``#`` starts a
        comment.
        """
        taps = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'delay_us power_db'")
            taps.append((float(parts[0]), float(parts[1])))
        return cls(taps=tuple(taps), name=Path(path).stem)


BRAZIL_D = ChannelProfile(
    taps=((0.0, -0.1), (0.48, -3.9), (2.07, -2.6), (2.90, -1.3), (5.71, 0.0), (5.78, -2.8)),
    name="brazil_d",
)
BUILTIN_PROFILES = {"brazil_d": BRAZIL_D}


@dataclass
class CirState:
    """Instantaneous sparse CIR on the sample grid.

    ``angles`` and ``phases`` hold the sum-of-sinusoids oscillators
    (shape ``(n_taps, N_OSCILLATORS)``; phases carry an extra leading axis for
    the in-phase / quadrature branches). They are ``None`` for static
    channels.
    """

    indices: np.ndarray
    gains: np.ndarray
    normalized_powers: np.ndarray
    doppler_hz: float = 0.0
    time: float = 0.0
    angles: np.ndarray = field(default=None, repr=False)
    phases: np.ndarray = field(default=None, repr=False)

    def cir(self, n):
        h = np.zeros(n, dtype=np.complex128)
        np.add.at(h, self.indices, self.gains)
        return h


def _sos_gains(state, t):
    # Zheng-Xiao sum of sinusoids; unit power per branch pair, scaled per tap
    wd = 2 * np.pi * state.doppler_hz
    xc = np.cos(wd * t * np.cos(state.angles) + state.phases[0]).sum(axis=-1)
    xs = np.cos(wd * t * np.sin(state.angles) + state.phases[1]).sum(axis=-1)
    g = (xc + 1j * xs) / np.sqrt(N_OSCILLATORS)
    return np.sqrt(state.normalized_powers) * g


def sample_profile(profile, cfg, doppler_hz=0.0, rng=None, rayleigh=False):
    """Map a profile onto the sample grid of ``cfg``.

    Delays are rounded to the nearest elementary period and powers are
    normalized to unit sum. With ``doppler_hz == 0`` and ``rayleigh=False``
    the gains are ``sqrt(power)`` with zero phase; ``rayleigh=True`` draws one
    complex Gaussian gain per tap and holds it. A positive ``doppler_hz``
    sets up a Jakes process per tap, seeded from ``rng``.
    """
    delays = profile.delays_us * 1e-6
    indices = np.rint(delays / cfg.elementary_period).astype(np.int64)
    if np.any(indices >= cfg.cp_len):
        raise ValueError(
            f"tap delay {delays.max() * 1e6:.3f} us exceeds the cyclic prefix "
            f"({cfg.cp_len} samples of {cfg.elementary_period * 1e6:.5f} us)"
        )
    p = 10.0 ** (profile.powers_db / 10.0)
    p = p / p.sum()
    if doppler_hz < 0:
        raise ValueError("doppler_hz must be nonnegative")
    if doppler_hz == 0:
        if rayleigh:
            if rng is None:
                raise ValueError("rayleigh gains need an rng")
            z = rng.standard_normal(p.size) + 1j * rng.standard_normal(p.size)
            gains = np.sqrt(p / 2) * z
        else:
            gains = np.sqrt(p).astype(np.complex128)
        return CirState(indices=indices, gains=gains, normalized_powers=p)

    if rng is None:
        raise ValueError("a fading channel needs an rng")
    n_taps = p.size
    theta = rng.uniform(-np.pi, np.pi, size=(n_taps, 1))
    n = np.arange(1, N_OSCILLATORS + 1)
    angles = (2 * np.pi * n - np.pi + theta) / (4 * N_OSCILLATORS)
    phases = rng.uniform(-np.pi, np.pi, size=(2, n_taps, N_OSCILLATORS))
    state = CirState(
        indices=indices,
        gains=np.zeros(n_taps, dtype=np.complex128),
        normalized_powers=p,
        doppler_hz=float(doppler_hz),
        angles=angles,
        phases=phases,
    )
    state.gains = _sos_gains(state, 0.0)
    return state


def evolve_taps(state, dt, rng=None):
    """Advance the channel by ``dt`` seconds.

    The oscillators are fixed when the profile is sampled, so ``rng`` is not
    consumed; it is accepted to keep the call signature uniform with other
    fading models.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    new = dataclasses.replace(state, time=state.time + dt)
    if state.doppler_hz == 0 or state.angles is None:
        new.gains = state.gains.copy()
    else:
        new.gains = _sos_gains(state, new.time)
    return new


def channel_cfr(state, n):
    """Frequency response: DFT of the zero-extended CIR."""
    return dft(state.cir(n))


def apply_channel(tx, state):
    """``Y[k] = X[k] * H[k]`` for every bin."""
    h = channel_cfr(state, tx.bins.size)
    return FreqGrid(bins=tx.bins * h, symbol_index=tx.symbol_index)


def add_awgn(grid, sigma2, rng):
    """Add complex white Gaussian noise with ``sigma2`` per real dimension."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    n = grid.bins.size
    noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return FreqGrid(bins=grid.bins + np.sqrt(sigma2) * noise, symbol_index=grid.symbol_index)


def snr_to_sigma2(snr_db, cfg=None):
    """Per-dimension noise variance for a unit-power channel and constellation."""
    return 10.0 ** (-snr_db / 10.0) / 2.0
