import csv
from pathlib import Path as FilePath

import pytest

from ddshaper.core.config import DDGridParams
from ddshaper.core.utils import THREADS_ENV_VAR
from ddshaper.modem.frame import DDSymbolFrame
from ddshaper.modem.io import read_frame_csv, read_waveform, write_frame_csv
from ddshaper.scripts import cli
from ddshaper.scripts.cli import build_parser, main, resolve_run_config
from ddshaper.verify.suites import CheckResult

SMALL = ["--M", "4", "--N", "4", "--Q", "4", "--progress", "false"]


def _read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def _metrics(text):
    return dict(line.split("=", 1) for line in text.strip().split("\n"))


def test_defaults_are_presets():
    args = build_parser().parse_args(["verify"])
    run = resolve_run_config("verify", args["verify"])
    assert (run.grid.M, run.grid.N, run.grid.T, run.grid.Q) == (32, 32, 1.0, 8)
    assert run.chain.preset == "sinc_sinc"
    assert run.chain.cp_length == 1.0
    assert run.explicit == frozenset()
    assert run.grid_overrides() == {}


def test_flags_override_config_file(temp_dir):
    config = FilePath(temp_dir) / "run.yaml"
    config.write_text("M: 4\nN: 16\npreset: rrc_rrc\nbeta: 0.5\n")
    args = build_parser().parse_args(["txchain", "--N", "8", "--config", str(config)])
    run = resolve_run_config("txchain", args["txchain"])
    assert (run.grid.M, run.grid.N) == (4, 8)
    assert run.chain.preset == "rrc_rrc"
    assert run.chain.fw.rolloff == 0.5
    assert run.grid_overrides() == {"M": 4, "N": 8}


def test_bad_config_file(temp_dir):
    config = FilePath(temp_dir) / "bad.yaml"
    config.write_text("M: 4\nwindow: hann\n")
    assert main(["verify", "--config", str(config)] + SMALL) == 2
    config.write_text("M: four\n")
    assert main(["verify", "--config", str(config)] + SMALL) == 2


def test_unknown_preset():
    assert main(["ambiguity-cut", "--preset", "gauss"] + SMALL) == 2


def test_unknown_suite():
    with pytest.raises(SystemExit):
        main(["verify", "--suite", "theorem4"])


def test_invalid_thread_count(monkeypatch):
    monkeypatch.setenv(THREADS_ENV_VAR, "zero")
    assert main(["ambiguity-cut"] + SMALL) == 2


def test_ambiguity_cut(temp_dir):
    out = FilePath(temp_dir) / "cut.csv"
    assert main(["ambiguity-cut", "--cut", "zero-doppler", "--out", str(out)] + SMALL) == 0
    rows = _read_csv(out)
    assert list(rows[0]) == ["normalized_offset", "re", "im", "mag", "mag_db"]
    assert len(rows) == 4 * 4 + 1
    assert float(rows[0]["normalized_offset"]) == pytest.approx(-0.5)

    peak = max(rows, key=lambda row: float(row["mag"]))
    assert float(peak["normalized_offset"]) == 0.0
    assert float(peak["mag_db"]) == 0.0
    for row in rows:
        offset = float(row["normalized_offset"]) * 4
        if offset != 0 and offset == round(offset):
            assert float(row["mag_db"]) <= -60.0

    again = FilePath(temp_dir) / "cut_again.csv"
    main(["ambiguity-cut", "--cut", "zero-doppler", "--out", str(again)] + SMALL)
    assert out.read_bytes() == again.read_bytes()


def test_ambiguity_surface_to_stdout(capsys):
    assert main(["ambiguity-cut", "--cut", "surface", "--resolution", "1"] + SMALL) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "normalized_delay,normalized_doppler,re,im,mag,mag_db"
    assert len(lines) == 1 + 5 * 5


def test_pulse_spectrum(temp_dir):
    out = FilePath(temp_dir) / "spectrum.csv"
    assert main(["pulse-spectrum", "--preset", "rrc_rrc", "--out", str(out)] + SMALL) == 0
    rows = _read_csv(out)
    assert len(rows) == 2 * 16 + 1
    assert max(float(row["mag_db"]) for row in rows) == 0.0


def test_txchain_loopback(temp_dir, capsys):
    waveform = FilePath(temp_dir) / "tx.ddwv"
    rx_frame = FilePath(temp_dir) / "rx.csv"
    argv = ["txchain", "--preset", "rrc_rrc", "--M", "8", "--N", "8", "--rx", "--out", str(waveform)]
    assert main(argv + ["--rx_frame", str(rx_frame)]) == 0

    metrics = _metrics(capsys.readouterr().out)
    assert float(metrics["ser"]) == 0.0
    assert float(metrics["evm_db"]) <= -30.0
    assert float(metrics["gain_re"]) == pytest.approx(1.0)
    assert len(read_waveform(waveform)) > 0
    assert read_frame_csv(rx_frame).values.shape == (8, 8)


def test_txchain_zero_frame(temp_dir, capsys):
    frame_path = FilePath(temp_dir) / "zeros.csv"
    waveform = FilePath(temp_dir) / "zeros.ddwv"
    write_frame_csv(frame_path, DDSymbolFrame.zeros(DDGridParams(M=4, N=4, Q=4)))
    argv = ["txchain", "--frame", str(frame_path), "--out", str(waveform), "--rx"] + SMALL
    assert main(argv) == 0
    assert float(read_waveform(waveform).samples.abs().max()) <= 1e-15
    assert capsys.readouterr().out == ""


def test_txchain_frame_size_mismatch(temp_dir):
    frame_path = FilePath(temp_dir) / "wrong.csv"
    write_frame_csv(frame_path, DDSymbolFrame.zeros(DDGridParams(M=8, N=8)))
    assert main(["txchain", "--frame", str(frame_path), "--rx"] + SMALL) == 2


def test_txchain_path_longer_than_prefix(temp_dir):
    paths = FilePath(temp_dir) / "paths.csv"
    paths.write_text("gain,delay,doppler\n1,0,0\n0.5,2,0\n")
    assert main(["txchain", "--paths", str(paths)] + SMALL) == 2


def test_txchain_warns_on_crystallization_violation(temp_dir, caplog):
    paths = FilePath(temp_dir) / "spread.csv"
    paths.write_text("gain,delay,doppler\n1,0,-0.75\n0.5,0.25,0.75\n")
    assert main(["txchain", "--paths", str(paths), "--cp_length", "1"] + SMALL) == 0
    assert "crystallization" in caplog.text


def test_txchain_needs_an_output():
    assert main(["txchain"] + SMALL) == 2


def test_verify_exit_codes(monkeypatch, capsys):
    def failing(suite, grid_overrides=None, progress=False):
        return [
            CheckResult("good", "4x4x8", 0.0, 1e-9, True),
            CheckResult("bad", "4x4x8", 1.0, 1e-9, False),
        ]

    monkeypatch.setattr(cli, "run_suites", failing)
    assert main(["verify", "--suite", "lemmas"]) == 1
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "check_name,size,max_err,tol,pass"
    assert lines[2] == "bad,4x4x8,1,1.0000000000000001e-09,false"


def test_verify_lemmas(capsys):
    assert main(["verify", "--suite", "lemmas", "--M", "4", "--N", "4", "--progress", "false"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.strip().split("\n")))
    assert {row["size"] for row in rows} == {"4x4x8"}
    assert all(row["pass"] == "true" for row in rows)
