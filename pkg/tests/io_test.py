import io
import struct
from pathlib import Path as FilePath

import pytest
import torch

from ddshaper.core.errors import DomainError, FormatError
from ddshaper.core.signal import SampledSignal
from ddshaper.modem.frame import qpsk_frame
from ddshaper.modem.io import (
    format_complex,
    format_float,
    read_frame_csv,
    read_paths_csv,
    read_waveform,
    write_frame_csv,
    write_rows_csv,
    write_waveform,
)
from tests.utils import random_complex


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1) == "1"
    assert format_complex(1.5 - 0.25j) == "1.5-0.25j"
    assert complex(format_complex(0.1 + 0.2j)) == 0.1 + 0.2j


def test_waveform_round_trip(temp_dir):
    path = FilePath(temp_dir) / "signal.ddwv"
    signal = SampledSignal(t0=-1.0, dt=1 / 256, samples=random_complex(100, seed=9))
    write_waveform(path, signal)

    raw = path.read_bytes()
    assert len(raw) == 32 + 16 * 100
    assert raw[:4] == b"DDWV"
    assert struct.unpack("<IQdd", raw[4:32]) == (1, 100, 1 / 256, -1.0)

    restored = read_waveform(path)
    assert torch.equal(restored.samples, signal.samples)
    assert (restored.t0, restored.dt) == (signal.t0, signal.dt)


def test_waveform_format_errors(temp_dir):
    path = FilePath(temp_dir) / "broken.ddwv"
    path.write_bytes(b"DDWV")
    with pytest.raises(FormatError):
        read_waveform(path)

    write_waveform(path, SampledSignal(0.0, 0.5, random_complex(4)))
    raw = bytearray(path.read_bytes())
    path.write_bytes(b"XXXX" + bytes(raw[4:]))
    with pytest.raises(FormatError):
        read_waveform(path)

    path.write_bytes(bytes(raw[:-16]))
    with pytest.raises(FormatError):
        read_waveform(path)

    raw[4] = 2
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_waveform(path)


def test_frame_csv_round_trip(temp_dir, grid):
    path = FilePath(temp_dir) / "frame.csv"
    frame = qpsk_frame(grid, seed=1)
    write_frame_csv(path, frame)

    lines = path.read_text().split("\n")
    assert len(lines) == grid.M + 1 and lines[-1] == ""
    assert len(lines[0].split(",")) == grid.N

    restored = read_frame_csv(path, grid)
    assert torch.equal(restored.values, frame.values)


def test_frame_csv_errors(temp_dir, grid):
    path = FilePath(temp_dir) / "bad_frame.csv"
    path.write_text("1+1j,2\n3\n")
    with pytest.raises(FormatError):
        read_frame_csv(path)

    path.write_text("1+1j,abc\n")
    with pytest.raises(FormatError):
        read_frame_csv(path)

    path.write_text("")
    with pytest.raises(FormatError):
        read_frame_csv(path)

    path.write_text("1,2\n3,4\n")
    assert read_frame_csv(path).values.shape == (2, 2)
    with pytest.raises(DomainError):
        read_frame_csv(path, grid)


def test_paths_csv(temp_dir):
    path = FilePath(temp_dir) / "paths.csv"
    path.write_text("gain,delay,doppler\n1,0,0\n0.5-0.5j,0.125,-0.25\n")
    paths = read_paths_csv(path)
    assert len(paths) == 2
    assert paths.paths[1].gain == 0.5 - 0.5j
    assert paths.max_delay == 0.125

    path.write_text("gain,doppler,delay\n1,0,0\n")
    with pytest.raises(FormatError):
        read_paths_csv(path)

    path.write_text("gain,delay,doppler\n1,x,0\n")
    with pytest.raises(FormatError):
        read_paths_csv(path)

    path.write_text("gain,delay,doppler\n1,-1,0\n")
    with pytest.raises(DomainError):
        read_paths_csv(path)


def test_write_rows_csv(temp_dir):
    stream = io.StringIO()
    write_rows_csv(stream, ["name", "value", "ok"], [["a", 1 / 3, True], ["b", 2, False]])
    assert stream.getvalue() == "name,value,ok\na,0.33333333333333331,true\nb,2,false\n"

    path = FilePath(temp_dir) / "rows.csv"
    write_rows_csv(path, ["x"], [[0.5]])
    assert path.read_bytes() == b"x\n0.5\n"
