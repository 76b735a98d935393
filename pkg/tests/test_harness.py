import dataclasses

import numpy as np
import pytest

from sparseofdm.channel import BRAZIL_D, ChannelProfile
from sparseofdm.estimators import AtssdParams
from sparseofdm.harness import (
    CSV_HEADER,
    CellError,
    ConfigError,
    ExperimentConfig,
    cell_seed,
    config_from_dict,
    load_config,
    read_csv,
    run_cell,
    sweep,
    write_csv,
)
from sparseofdm.ofdm_phy import OfdmConfig

SMALL = ExperimentConfig(n_symbols=8, snr_db_list=(10.0, 20.0), estimators=("atssd", "genie"))


def test_empty_file_gives_defaults(tmp_path):
    f = tmp_path / "empty.yaml"
    f.write_text("")
    cfg = load_config(f)
    assert cfg == ExperimentConfig()
    assert (cfg.ofdm.fft_size, cfg.ofdm.active_carriers, cfg.ofdm.cp_len) == (2048, 1705, 256)
    assert cfg.ofdm.constellation == "qam16"
    assert (cfg.atssd.iter_max, cfg.atssd.alpha, cfg.atssd.beta) == (5, 0.8, 0.008)
    assert cfg.profile == BRAZIL_D


def test_overrides(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text(
        "sweep:\n  doppler_hz: [0]\n  snr_db: [5, 10]\n  n_symbols: 3\n"
        "atssd:\n  iter_max: 3\nfec:\n  decoding: hard\n"
    )
    cfg = load_config(f)
    assert cfg.doppler_hz_list == (0.0,)
    assert cfg.snr_db_list == (5.0, 10.0)
    assert cfg.n_symbols == 3 and cfg.atssd == AtssdParams(iter_max=3) and cfg.decoding == "hard"


def test_profile_sources(tmp_path):
    (tmp_path / "p.txt").write_text("0 0\n1.0 -3\n")
    cfg = config_from_dict({"channel": {"profile_file": "p.txt"}}, base_dir=tmp_path)
    assert cfg.profile.taps == ((0.0, 0.0), (1.0, -3.0))
    cfg = config_from_dict({"channel": {"taps": [[0, 0], [2, -1]]}})
    assert len(cfg.profile.taps) == 2


@pytest.mark.parametrize("data,needle", [
    ({"ofdm": {"cp_len": 2048}}, "ofdm"),
    ({"ofdm": {"bogus": 1}}, "ofdm.bogus"),
    ({"nope": {}}, "nope"),
    ({"sweep": {"estimators": ["magic"]}}, "estimator"),
    ({"sweep": {"n_symbols": 0}}, "n_symbols"),
    ({"channel": {"profile": "unknown"}}, "channel.profile"),
    ({"channel": {"profile": "brazil_d", "taps": [[0, 0]]}}, "channel"),
    ({"fec": {"decoding": "fuzzy"}}, "fec.decoding"),
])
def test_config_errors_name_the_key(data, needle):
    with pytest.raises(ConfigError, match=needle):
        config_from_dict(data)


def test_genie_noiseless_is_error_free():
    m = run_cell(dataclasses.replace(SMALL, n_symbols=4), np.inf, 0.0, "genie", 1)
    assert m.ber_coded == 0 and m.ber_raw == 0 and m.cfr_mse == 0


def test_atssd_noiseless_is_error_free():
    m = run_cell(dataclasses.replace(SMALL, n_symbols=4), np.inf, 0.0, "atssd", 1)
    assert m.ber_coded == 0 and m.cfr_mse < 1e-20
    assert 1 <= m.mean_iterations <= 5


def test_run_cell_deterministic():
    a = run_cell(SMALL, 10.0, 35.0, "atssd", 99)
    b = run_cell(SMALL, 10.0, 35.0, "atssd", 99)
    assert a == b


def test_run_cell_error_has_context():
    with pytest.raises(CellError, match="estimator=bogus"):
        run_cell(SMALL, 10.0, 0.0, "bogus", 1)


def test_cell_seed_keys_on_values():
    assert cell_seed(0, 10, 0) == cell_seed(0, 10.0, 0.0)
    assert cell_seed(0, 10, 0) != cell_seed(0, 15, 0)
    assert cell_seed(0, 10, 0) != cell_seed(1, 10, 0)
    assert 0 <= cell_seed(2**64 - 1, 5, 70) < 2**63


def test_sweep_rows_and_order():
    cfg = dataclasses.replace(SMALL, n_symbols=2, snr_db_list=(0.0, 10.0, 20.0), estimators=("atssd", "linear"))
    rows = sweep(cfg)
    assert len(rows) == 6
    assert [(r.snr_db, r.estimator) for r in rows] == [
        (0.0, "atssd"), (0.0, "linear"), (10.0, "atssd"), (10.0, "linear"), (20.0, "atssd"), (20.0, "linear")]
    assert rows == sweep(cfg, workers=2)


def test_cell_independence():
    full = sweep(dataclasses.replace(SMALL, n_symbols=3, snr_db_list=(5.0, 10.0, 15.0)))
    part = sweep(dataclasses.replace(SMALL, n_symbols=3, snr_db_list=(5.0, 15.0)))
    keep = [r for r in full if r.snr_db != 10.0]
    assert keep == part


def test_genie_ber_nonincreasing_in_snr():
    cfg = ExperimentConfig(snr_db_list=(4.0, 8.0, 12.0), estimators=("genie",), n_symbols=400)
    ber = [r.ber_raw for r in sweep(cfg)]
    assert ber[0] >= ber[1] >= ber[2]


def test_csv_round_trip_and_format(tmp_path):
    p = tmp_path / "empty.csv"
    write_csv([], p)
    assert p.read_text() == ",".join(CSV_HEADER) + "\n"
    assert ",".join(CSV_HEADER) == "snr_db,doppler_hz,estimator,cfr_mse,ber_raw,ber_coded,mean_iterations,symbols,seed"

    m = run_cell(dataclasses.replace(SMALL, n_symbols=2), 10.0, 0.0, "atssd", 3)
    p = tmp_path / "one.csv"
    write_csv([m], p)
    lines = p.read_text().splitlines()
    assert len(lines) == 2 and len(lines[1].split(",")) == 9
    assert read_csv(p) == [m]


def test_csv_byte_identical(tmp_path):
    cfg = dataclasses.replace(SMALL, n_symbols=2)
    write_csv(sweep(cfg), tmp_path / "a.csv")
    write_csv(sweep(cfg), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_read_csv_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(p)


def test_small_numerology_runs():
    # a custom grid exercises the layout arithmetic away from the 2K defaults;
    # the profile stays inside the 512 // 12 = 42 sample search window
    ofdm = OfdmConfig(fft_size=512, active_carriers=427, cp_len=64, pilot_spacing=12)
    profile = ChannelProfile(taps=((0.0, 0.0), (0.48, -3.0), (2.07, -2.6)))
    cfg = ExperimentConfig(ofdm=ofdm, profile=profile, n_symbols=4, snr_db_list=(30.0,), estimators=("genie", "atssd"),
                           interleaver_rows=16)
    rows = sweep(cfg)
    assert all(r.ber_coded == 0 for r in rows)


def test_shipped_config_loads():
    from pathlib import Path

    cfg = load_config(Path(__file__).resolve().parents[1] / "configs" / "brazil_d.yaml")
    assert cfg.doppler_hz_list == (0.0, 10.0, 35.0, 70.0)
    assert cfg.ofdm == OfdmConfig() and cfg.atssd == AtssdParams()
