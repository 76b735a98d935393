"""Seeded link-level experiments: SNR x Doppler x estimator sweeps.

A cell pushes ``n_symbols`` OFDM symbols through
encode -> interleave -> map -> frame -> channel -> noise -> estimate ->
equalize -> LLR -> deinterleave -> decode, one codeword per symbol.

Cell seeds are derived from the master seed and the cell's SNR and Doppler
*values*, not from the estimator, so every estimator in a cell sees the same
bits, channel and noise, and dropping a grid point leaves the other rows
unchanged.
"""
import csv
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
import yaml

from . import fec
from .channel import BUILTIN_PROFILES, BRAZIL_D, ChannelProfile, add_awgn, apply_channel, channel_cfr, evolve_taps, sample_profile, snr_to_sigma2
from .estimators import AtssdParams, atssd_estimate, estimate_channel_power, genie_estimate, li_estimate
from .ofdm_phy import (
    DEFAULT_PRBS_SEED,
    OfdmConfig,
    active_bins,
    build_symbol,
    data_carriers,
    equalize,
    estimate_noise_from_guard,
    extract_pilots,
)

__all__ = [
    "ESTIMATORS",
    "CSV_HEADER",
    "ExperimentConfig",
    "LinkMetrics",
    "CellError",
    "ConfigError",
    "load_config",
    "config_from_dict",
    "cell_seed",
    "run_cell",
    "sweep",
    "write_csv",
    "read_csv",
]

log = logging.getLogger(__name__)

ESTIMATORS = ("atssd", "linear", "genie")
CSV_HEADER = ["snr_db", "doppler_hz", "estimator", "cfr_mse", "ber_raw", "ber_coded",
              "mean_iterations", "symbols", "seed"]
# smallest noise variance used to scale LLRs on a noiseless link
_LLR_NOISE_FLOOR = 1e-12


class ConfigError(ValueError):
    pass


class CellError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    ofdm: OfdmConfig = OfdmConfig()
    profile: ChannelProfile = BRAZIL_D
    atssd: AtssdParams = AtssdParams()
    snr_db_list: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
    doppler_hz_list: tuple = (0.0,)
    n_symbols: int = 400
    estimators: tuple = ESTIMATORS
    master_seed: int = 0
    output: str = "results.csv"
    rayleigh_static: bool = False
    interleaver_rows: int = 64
    decoding: str = "soft"
    pilot_prbs_seed: int = DEFAULT_PRBS_SEED
    workers: int = 1

    def __post_init__(self):
        if self.n_symbols < 1:
            raise ConfigError("sweep.n_symbols must be >= 1")
        if not self.snr_db_list:
            raise ConfigError("sweep.snr_db must not be empty")
        if not self.doppler_hz_list:
            raise ConfigError("sweep.doppler_hz must not be empty")
        if any(d < 0 for d in self.doppler_hz_list):
            raise ConfigError("sweep.doppler_hz values must be >= 0")
        if not self.estimators:
            raise ConfigError("sweep.estimators must not be empty")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad:
            raise ConfigError(f"sweep.estimators: unknown estimator(s) {bad}; choose from {list(ESTIMATORS)}")
        if self.decoding not in ("soft", "hard"):
            raise ConfigError("fec.decoding must be 'soft' or 'hard'")
        if self.interleaver_rows < 1:
            raise ConfigError("fec.interleaver_rows must be >= 1")
        if self.workers < 1:
            raise ConfigError("sweep.workers must be >= 1")


@dataclass
class LinkMetrics:
    snr_db: float
    doppler_hz: float
    estimator: str
    cfr_mse: float
    ber_raw: float
    ber_coded: float
    mean_iterations: float
    symbols: int
    seed: int


_SCHEMA = {
    "ofdm": {f.name for f in fields(OfdmConfig)},
    "channel": {"profile", "taps", "profile_file", "rayleigh_static"},
    "atssd": {f.name for f in fields(AtssdParams)},
    "fec": {"interleaver_rows", "decoding"},
    "sweep": {"snr_db", "doppler_hz", "n_symbols", "estimators", "master_seed", "output",
              "pilot_prbs_seed", "workers"},
}


def _as_tuple(value, key, cast=float):
    if not isinstance(value, (list, tuple)):
        value = [value]
    try:
        return tuple(cast(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def config_from_dict(data, base_dir="."):
    """Build an :class:`ExperimentConfig` from nested sections.

    Unknown sections or keys raise :class:`ConfigError` naming the key.
    """
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    for section, body in data.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section '{section}'")
        if body is None:
            continue
        if not isinstance(body, dict):
            raise ConfigError(f"section '{section}' must be a mapping")
        for key in body:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key '{section}.{key}'")

    def section(name):
        return data.get(name) or {}

    kw = {}
    try:
        kw["ofdm"] = OfdmConfig(**section("ofdm"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"ofdm: {exc}") from exc

    ch = section("channel")
    given = [k for k in ("profile", "taps", "profile_file") if k in ch]
    if len(given) > 1:
        raise ConfigError(f"channel: give only one of {given}")
    try:
        if "taps" in ch:
            kw["profile"] = ChannelProfile(taps=tuple(tuple(t) for t in ch["taps"]))
        elif "profile_file" in ch:
            kw["profile"] = ChannelProfile.from_file(Path(base_dir) / ch["profile_file"])
        elif "profile" in ch:
            if ch["profile"] not in BUILTIN_PROFILES:
                raise ConfigError(f"channel.profile: unknown built-in '{ch['profile']}'")
            kw["profile"] = BUILTIN_PROFILES[ch["profile"]]
    except (TypeError, ValueError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"channel: {exc}") from exc
    if "rayleigh_static" in ch:
        kw["rayleigh_static"] = bool(ch["rayleigh_static"])

    try:
        kw["atssd"] = AtssdParams(**section("atssd"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"atssd: {exc}") from exc

    fe = section("fec")
    if "interleaver_rows" in fe:
        kw["interleaver_rows"] = int(fe["interleaver_rows"])
    if "decoding" in fe:
        kw["decoding"] = fe["decoding"]

    sw = section("sweep")
    if "snr_db" in sw:
        kw["snr_db_list"] = _as_tuple(sw["snr_db"], "sweep.snr_db")
    if "doppler_hz" in sw:
        kw["doppler_hz_list"] = _as_tuple(sw["doppler_hz"], "sweep.doppler_hz")
    if "estimators" in sw:
        kw["estimators"] = _as_tuple(sw["estimators"], "sweep.estimators", str)
    for key, cast in (("n_symbols", int), ("master_seed", int), ("output", str),
                      ("pilot_prbs_seed", int), ("workers", int)):
        if key in sw:
            try:
                kw[key] = cast(sw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"sweep.{key}: {exc}") from exc
    return ExperimentConfig(**kw)


def load_config(path):
    """Read a YAML experiment file; an empty file yields the defaults."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data, base_dir=path.parent)


def cell_seed(master_seed, snr_db, doppler_hz):
    """Deterministic 63-bit seed for one (SNR, Doppler) cell."""
    key = zlib.crc32(f"{float(snr_db)!r}|{float(doppler_hz)!r}".encode())
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, key])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _codeword_layout(n_data, rows):
    # coded bits fill whole interleaver blocks; the remainder carries zero padding
    n_mapped = 4 * n_data
    n_coded = rows * (n_mapped // rows)
    n_info = n_coded // 2 - fec.DEFAULT_CODE.memory
    if n_info < 1:
        raise ValueError(f"{n_data} data carriers are too few for one codeword")
    return n_info, n_coded, n_mapped - n_coded


def run_cell(config, snr_db, doppler_hz, estimator, seed):
    """Simulate one sweep cell and aggregate its metrics."""
    try:
        return _run_cell(config, snr_db, doppler_hz, estimator, seed)
    except Exception as exc:
        raise CellError(
            f"cell snr_db={snr_db} doppler_hz={doppler_hz} estimator={estimator}: {exc}"
        ) from exc


def _run_cell(config, snr_db, doppler_hz, estimator, seed):
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator '{estimator}'")
    cfg = config.ofdm
    rows = config.interleaver_rows
    bit_rng, chan_rng, noise_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))
    sigma2 = snr_to_sigma2(snr_db, cfg)
    state = sample_profile(config.profile, cfg, doppler_hz=doppler_hz, rng=chan_rng,
                           rayleigh=config.rayleigh_static)
    act = active_bins(cfg)

    mse_sum = 0.0
    raw_err = raw_total = 0
    iters = 0
    tx_info, rx_llrs = [], []
    for n in range(config.n_symbols):
        if n:
            state = evolve_taps(state, cfg.symbol_duration)
        n_data = data_carriers(n, cfg).size
        n_info, n_coded, n_pad = _codeword_layout(n_data, rows)
        info = bit_rng.integers(0, 2, n_info, dtype=np.uint8)
        coded = fec.interleave(fec.conv_encode(info), rows)
        mapped = np.concatenate([coded, np.zeros(n_pad, dtype=np.uint8)])
        tx = build_symbol(fec.qam16_map(mapped), n, cfg, config.pilot_prbs_seed)
        rx = add_awgn(apply_channel(tx, state), sigma2, noise_rng)
        h_true = channel_cfr(state, cfg.fft_size)

        if config.atssd.lambda_mode == "genie":
            noise_var = sigma2
            p_h = float(np.sum(np.abs(state.gains) ** 2))
        else:
            noise_var = estimate_noise_from_guard([rx], cfg)
            p_h = estimate_channel_power(rx, cfg)

        if estimator == "atssd":
            obs = extract_pilots(rx, cfg, config.pilot_prbs_seed)
            est = atssd_estimate(obs, config.atssd, cfg, noise_var, max(p_h, 1e-12))
            iters += est.iterations_used
        elif estimator == "linear":
            est = li_estimate(extract_pilots(rx, cfg, config.pilot_prbs_seed), cfg)
        else:
            est = genie_estimate(state, cfg)

        mse_sum += float(np.mean(np.abs(est.cfr[act] - h_true[act]) ** 2))
        x_hat, eff_var, erased = equalize(rx, est.cfr, cfg, max(noise_var, _LLR_NOISE_FLOOR))
        hard = fec.qam16_demap_hard(x_hat)
        raw_err += int(np.count_nonzero(hard != mapped))
        raw_total += mapped.size

        if config.decoding == "soft":
            llr = fec.qam16_llr(x_hat, np.where(erased, 1.0, eff_var))
            llr[erased] = 0.0
            llr = llr.reshape(-1)
        else:
            llr = fec.hard_bits_to_llr(hard)
        tx_info.append(info)
        rx_llrs.append(fec.deinterleave(llr[:n_coded], rows))

    bit_err = bit_total = 0
    lengths = np.array([x.size for x in rx_llrs])
    for length in np.unique(lengths):
        sel = np.flatnonzero(lengths == length)
        decoded = fec.viterbi_decode(np.stack([rx_llrs[i] for i in sel]))
        truth = np.stack([tx_info[i] for i in sel])
        bit_err += int(np.count_nonzero(decoded != truth))
        bit_total += truth.size

    return LinkMetrics(
        snr_db=float(snr_db),
        doppler_hz=float(doppler_hz),
        estimator=estimator,
        cfr_mse=mse_sum / config.n_symbols,
        ber_raw=raw_err / raw_total,
        ber_coded=bit_err / bit_total,
        mean_iterations=iters / config.n_symbols,
        symbols=config.n_symbols,
        seed=int(seed),
    )


def _cells(config):
    for snr in config.snr_db_list:
        for fd in config.doppler_hz_list:
            seed = cell_seed(config.master_seed, snr, fd)
            for est in config.estimators:
                yield snr, fd, est, seed


def _run_packed(args):
    return run_cell(*args)


def sweep(config, workers=None):
    """Run every (SNR, Doppler, estimator) cell; rows come back in grid order."""
    workers = config.workers if workers is None else workers
    jobs = [(config, *cell) for cell in _cells(config)]
    if workers <= 1 or len(jobs) <= 1:
        out = []
        for job in jobs:
            log.info("cell snr=%s doppler=%s estimator=%s", *job[1:4])
            out.append(run_cell(*job))
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_packed, jobs))


def write_csv(metrics, path):
    """Write metrics with a fixed header; floats use shortest round-trip repr."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for m in metrics:
            row = asdict(m)
            writer.writerow([repr(row[k]) if isinstance(row[k], float) else row[k] for k in CSV_HEADER])


def read_csv(path):
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for r in reader:
            rows.append(LinkMetrics(
                snr_db=float(r["snr_db"]), doppler_hz=float(r["doppler_hz"]), estimator=r["estimator"],
                cfr_mse=float(r["cfr_mse"]), ber_raw=float(r["ber_raw"]), ber_coded=float(r["ber_coded"]),
                mean_iterations=float(r["mean_iterations"]), symbols=int(r["symbols"]), seed=int(r["seed"]),
            ))
    return rows
