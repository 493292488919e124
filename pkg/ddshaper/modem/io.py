import csv
import io
import logging
from pathlib import Path as FilePath
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np
import torch

from ddshaper.core.config import DDGridParams
from ddshaper.core.errors import FormatError
from ddshaper.core.signal import SampledSignal
from ddshaper.modem.channel import Path, PathSet
from ddshaper.modem.frame import DDSymbolFrame

logger = logging.getLogger(__name__)

WAVEFORM_MAGIC = b"DDWV"
WAVEFORM_VERSION = 1
WAVEFORM_HEADER = np.dtype(
    [("magic", "S4"), ("version", "<u4"), ("sample_count", "<u8"), ("dt", "<f8"), ("t0", "<f8")]
)
PATH_COLUMNS = ["gain", "delay", "doppler"]

PathLike = Union[str, FilePath]


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def format_complex(value: complex) -> str:
    value = complex(value)
    return f"{format_float(value.real)}{format(value.imag, '+.17g')}j"


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(value)
    if isinstance(value, complex):
        return format_complex(value)
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def _parse_complex(cell: str, where: str) -> complex:
    try:
        return complex(cell.strip().replace(" ", ""))
    except ValueError:
        raise FormatError(f"{where}: cannot parse {cell!r} as a complex number")


def write_waveform(path: PathLike, signal: SampledSignal):
    """Writes the 32-byte header followed by little-endian ``(re, im)`` float64 pairs."""
    header = np.zeros(1, dtype=WAVEFORM_HEADER)
    header["magic"] = WAVEFORM_MAGIC
    header["version"] = WAVEFORM_VERSION
    header["sample_count"] = len(signal)
    header["dt"] = signal.dt
    header["t0"] = signal.t0
    data = signal.samples.numpy().astype("<c16")
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(data.tobytes())
    logger.debug("wrote %d samples to %s", len(signal), path)


def read_waveform(path: PathLike) -> SampledSignal:
    raw = FilePath(path).read_bytes()
    if len(raw) < WAVEFORM_HEADER.itemsize:
        raise FormatError(f"{path}: waveform file is shorter than its header")
    header = np.frombuffer(raw, dtype=WAVEFORM_HEADER, count=1)[0]
    if bytes(header["magic"]) != WAVEFORM_MAGIC:
        raise FormatError(f"{path}: bad magic {bytes(header['magic'])!r}")
    if int(header["version"]) != WAVEFORM_VERSION:
        raise FormatError(f"{path}: unsupported waveform version {int(header['version'])}")

    count = int(header["sample_count"])
    payload = raw[WAVEFORM_HEADER.itemsize :]
    if len(payload) != count * 16:
        raise FormatError(f"{path}: header announces {count} samples but the file holds {len(payload) / 16}")
    data = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    return SampledSignal(t0=float(header["t0"]), dt=float(header["dt"]), samples=torch.from_numpy(data.copy()))


def write_frame_csv(path: PathLike, frame: DDSymbolFrame):
    """One row per delay bin ``l``, one column per Doppler bin ``k``, cells ``re+imj``."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in frame.values.tolist():
            writer.writerow([format_complex(value) for value in row])


def read_frame_csv(path: PathLike, grid: Optional[DDGridParams] = None, constellation: Optional[str] = None):
    with open(path, newline="") as f:
        rows = [row for row in csv.reader(f) if row]
    if not rows:
        raise FormatError(f"{path}: frame file is empty")
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise FormatError(f"{path}: frame rows have different lengths {sorted(widths)}")
    values = [[_parse_complex(cell, f"{path}:{i + 1}") for cell in row] for i, row in enumerate(rows)]
    frame = DDSymbolFrame(torch.tensor(values, dtype=torch.complex128), constellation=constellation)
    return frame if grid is None else frame.check(grid)


def read_paths_csv(path: PathLike) -> PathSet:
    """Path file with header ``gain,delay,doppler``; gains may be complex."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or [name.strip() for name in reader.fieldnames] != PATH_COLUMNS:
            raise FormatError(f"{path}: expected header {','.join(PATH_COLUMNS)}")
        paths = []
        for i, row in enumerate(reader, start=2):
            where = f"{path}:{i}"
            try:
                delay = float(row["delay"])
                doppler = float(row["doppler"])
            except (TypeError, ValueError):
                raise FormatError(f"{where}: delay and doppler must be real numbers")
            paths.append(Path(_parse_complex(row["gain"], where), delay, doppler))
    return PathSet(tuple(paths))


def write_rows_csv(target: Union[PathLike, TextIO], header: Sequence[str], rows: Iterable[Sequence]):
    """CSV with ``.17g`` floats and ``\\n`` line endings, to a file path or an open text stream."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(value) for value in row])
    if isinstance(target, (str, FilePath)):
        with open(target, "w", newline="") as f:
            f.write(buffer.getvalue())
    else:
        target.write(buffer.getvalue())
