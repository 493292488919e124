import logging
import sys
from dataclasses import dataclass
from importlib.resources import path
from typing import Callable, Dict, FrozenSet, Optional, Sequence

import torch
import yaml
from jsonargparse import ArgumentParser, Namespace

from ddshaper.core.config import ChainConfig, DDGridParams, preset_chain_config, PRESETS
from ddshaper.core.errors import ConfigError, DDShaperError, DomainError
from ddshaper.core.utils import configure_threads
from ddshaper.dsp.ambiguity import cut_axes, DB_FLOOR, extract_cut, pulse_ambiguity
from ddshaper.dsp.basis import truncated_pulse
from ddshaper.dsp.windows import spectral_transform
from ddshaper.modem.chain import matched_filter_receive, RECEIVERS, shape_transmit
from ddshaper.modem.channel import apply_paths, PathSet
from ddshaper.modem.frame import qpsk_frame
from ddshaper.modem.io import (
    format_float,
    read_frame_csv,
    read_paths_csv,
    write_frame_csv,
    write_rows_csv,
    write_waveform,
)
from ddshaper.modem.metrics import evm_ser_report
from ddshaper.verify.suites import ALL_SUITES, CHECK_COLUMNS, run_suites, SUITES

logger = logging.getLogger(__name__)

GRID_KEYS = ("M", "N", "T", "Q")
COMMON_KEYS = GRID_KEYS + ("preset", "beta", "cp_length")
KEY_TYPES = {"M": int, "N": int, "T": float, "Q": int, "preset": str, "beta": float, "cp_length": float}

CUT_CHOICES = ["zero-doppler", "zero-delay", "surface"]
SPECTRUM_COLUMNS = ["normalized_frequency", "re", "im", "mag", "mag_db"]
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one command: shipped defaults, then ``--config``, then explicit flags."""

    command: str
    chain: ChainConfig
    out: Optional[str] = None
    explicit: FrozenSet[str] = frozenset()

    @property
    def grid(self) -> DDGridParams:
        return self.chain.grid

    def grid_overrides(self) -> Dict[str, float]:
        return {key: getattr(self.grid, key) for key in GRID_KEYS if key in self.explicit}


def load_defaults() -> dict:
    with path("ddshaper.scripts", "defaults.yaml") as p:
        return _read_settings(p)


def _read_settings(file) -> dict:
    with open(file) as f:
        try:
            settings = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"{file}: {e}")
    if not isinstance(settings, dict):
        raise ConfigError(f"{file}: expected a mapping of key: value lines")
    unknown = sorted(set(settings) - set(COMMON_KEYS))
    if unknown:
        raise ConfigError(f"{file}: unknown keys {unknown}, allowed are {list(COMMON_KEYS)}")
    return {key: _typed(key, value, file) for key, value in settings.items()}


def _typed(key: str, value, where):
    if value is None:
        return None
    try:
        return KEY_TYPES[key](value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: {key} must be of type {KEY_TYPES[key].__name__} but is {value!r}")


def resolve_run_config(command: str, args: Namespace) -> RunConfig:
    settings = load_defaults()
    explicit = set()
    if args.config is not None:
        from_file = _read_settings(args.config)
        settings.update(from_file)
        explicit.update(from_file)

    flags = {key: args[key] for key in COMMON_KEYS if args[key] is not None}
    settings.update(flags)
    explicit.update(flags)

    if settings["preset"] not in PRESETS:
        raise ConfigError(f"preset must be one of {PRESETS} but is {settings['preset']!r}")
    grid = DDGridParams(**{key: settings[key] for key in GRID_KEYS})
    chain = preset_chain_config(settings["preset"], grid, beta=settings["beta"], cp_length=settings["cp_length"])
    logger.debug("resolved %s with %s", command, settings)
    return RunConfig(command=command, chain=chain, out=args.out, explicit=frozenset(explicit))


def _output(run: RunConfig):
    return sys.stdout if run.out in (None, "-") else run.out


def _db(mag: torch.Tensor) -> torch.Tensor:
    peak = float(mag.max())
    if peak == 0:
        return torch.full_like(mag, DB_FLOOR)
    return torch.clamp(20 * torch.log10(mag / peak), min=DB_FLOOR)


def cmd_ambiguity_cut(run: RunConfig, args: Namespace) -> int:
    cut = args.cut.replace("-", "_")
    grid = run.grid
    tau, nu = cut_axes(grid, cut, args.resolution)
    surface = pulse_ambiguity(run.chain, tau, nu, progress=args.progress)

    if cut == "surface":
        mag = surface.values.abs()
        mag_db = _db(mag)
        header = ["normalized_delay", "normalized_doppler", "re", "im", "mag", "mag_db"]
        rows = []
        for i in range(len(tau)):
            for j in range(len(nu)):
                v = complex(surface.values[i, j])
                offsets = [float(tau[i]) / grid.T, float(nu[j]) * grid.T]
                rows.append(offsets + [v.real, v.imag, float(mag[i, j]), float(mag_db[i, j])])
    else:
        result = extract_cut(surface, cut)
        scale = 1.0 / grid.T if cut == "zero_doppler" else grid.T
        header = ["normalized_offset", "re", "im", "mag", "mag_db"]
        rows = [
            [float(offset) * scale, v.real, v.imag, float(mag), float(mag_db)]
            for offset, v, mag, mag_db in zip(result.offsets, map(complex, result.values), result.mag, result.mag_db)
        ]
    write_rows_csv(_output(run), header, rows)
    logger.info("wrote %d %s rows for %s", len(rows), cut, run.chain.preset)
    return 0


def cmd_pulse_spectrum(run: RunConfig, args: Namespace) -> int:
    grid = run.grid
    resolution = args.resolution or 1
    if resolution < 1:
        raise DomainError(f"resolution must be positive but is {resolution}")
    step = grid.doppler_step / resolution
    half = grid.M * grid.N * resolution

    pulse = truncated_pulse(run.chain.fw, run.chain.tw, grid)
    spectrum = spectral_transform(pulse, -half * step, step, 2 * half + 1)
    mag = spectrum.samples.abs()
    rows = [
        [float(f) * grid.T, v.real, v.imag, float(m), float(m_db)]
        for f, v, m, m_db in zip(spectrum.freq_axis, map(complex, spectrum.samples), mag, _db(mag))
    ]
    write_rows_csv(_output(run), SPECTRUM_COLUMNS, rows)
    return 0


def cmd_txchain(run: RunConfig, args: Namespace) -> int:
    cfg = run.chain
    grid = run.grid
    frame = read_frame_csv(args.frame, grid) if args.frame else qpsk_frame(grid, seed=args.seed)
    receive = args.rx or args.rx_frame is not None or args.paths is not None
    if run.out is None and not receive:
        raise ConfigError("txchain needs --out, --rx, --rx_frame or --paths")

    s = shape_transmit(frame, cfg)
    if run.out is not None:
        write_waveform(run.out, s)
        logger.info("wrote %d samples to %s", len(s), run.out)
    if not receive:
        return 0

    paths = read_paths_csv(args.paths) if args.paths else PathSet.identity()
    if paths.max_delay > cfg.cp_length:
        raise DomainError(f"cyclic prefix {cfg.cp_length} is shorter than the max path delay {paths.max_delay}")
    if not paths.crystallization_ok(grid):
        logger.warning(
            "path set violates the crystallization condition: delay spread %g, Doppler spread %g",
            paths.delay_spread,
            paths.doppler_spread,
        )

    received = matched_filter_receive(apply_paths(s, paths), cfg, receiver=args.receiver)
    if args.rx_frame is not None:
        write_frame_csv(args.rx_frame, received)
    if frame.energy == 0:
        logger.warning("transmitted frame is all zero, no link metrics")
        return 0
    for key, value in evm_ser_report(received, frame).items():
        print(f"{key}={format_float(value)}")
    return 0


def cmd_verify(run: RunConfig, args: Namespace) -> int:
    results = run_suites(args.suite, run.grid_overrides(), progress=args.progress)
    write_rows_csv(_output(run), CHECK_COLUMNS, [result.row() for result in results])
    failed = [result.check_name for result in results if not result.passed]
    if failed:
        logger.error("%d of %d checks failed: %s", len(failed), len(results), ", ".join(failed))
        return 1
    return 0


def _add_common(parser: ArgumentParser):
    parser.add_argument("--M", type=Optional[int], default=None, help="delay bins per frame")
    parser.add_argument("--N", type=Optional[int], default=None, help="Doppler bins per frame")
    parser.add_argument("--T", type=Optional[float], default=None, help="delay period")
    parser.add_argument("--Q", type=Optional[int], default=None, help="oversampling per delay bin")
    parser.add_argument("--preset", type=Optional[str], default=None, help=f"window case, one of {PRESETS}")
    parser.add_argument("--beta", type=Optional[float], default=None, help="root raised cosine rolloff")
    parser.add_argument("--cp_length", type=Optional[float], default=None, help="cyclic prefix length")
    parser.add_argument("--out", type=Optional[str], default=None, help="output file, '-' or unset for stdout")
    parser.add_argument("--config", type=Optional[str], default=None, help="YAML file of key: value settings")
    parser.add_argument("--progress", type=bool, default=True, help="show progress bars on stderr")


def _ambiguity_cut_parser() -> ArgumentParser:
    parser = ArgumentParser(description="Ambiguity cut of the preset's truncated (0, 0) pulse")
    _add_common(parser)
    parser.add_argument("--cut", default="zero-doppler", choices=CUT_CHOICES)
    parser.add_argument("--resolution", type=Optional[int], default=None, help="points per lattice step")
    return parser


def _txchain_parser() -> ArgumentParser:
    parser = ArgumentParser(description="Shape a symbol frame, optionally pass it through a channel and receive it")
    _add_common(parser)
    parser.add_argument("--frame", type=Optional[str], default=None, help="frame CSV, random QPSK if unset")
    parser.add_argument("--seed", type=int, default=0, help="seed of the random QPSK frame")
    parser.add_argument("--paths", type=Optional[str], default=None, help="path CSV with header gain,delay,doppler")
    parser.add_argument("--rx", action="store_true", help="receive and print link metrics")
    parser.add_argument("--rx_frame", type=Optional[str], default=None, help="received frame CSV")
    parser.add_argument("--receiver", default="truncated", choices=list(RECEIVERS))
    return parser


def _verify_parser() -> ArgumentParser:
    parser = ArgumentParser(description="Numerical checks of the transform, ambiguity and shaping identities")
    _add_common(parser)
    parser.add_argument("--suite", default="all", choices=sorted(SUITES) + ["all"], help=f"all = {ALL_SUITES}")
    return parser


def _pulse_spectrum_parser() -> ArgumentParser:
    parser = ArgumentParser(description="Spectrum of the preset's truncated (0, 0) pulse")
    _add_common(parser)
    parser.add_argument("--resolution", type=Optional[int], default=None, help="points per Doppler bin")
    return parser


COMMANDS: Dict[str, Callable[[RunConfig, Namespace], int]] = {
    "ambiguity-cut": cmd_ambiguity_cut,
    "txchain": cmd_txchain,
    "verify": cmd_verify,
    "pulse-spectrum": cmd_pulse_spectrum,
}

COMMAND_PARSERS: Dict[str, Callable[[], ArgumentParser]] = {
    "ambiguity-cut": _ambiguity_cut_parser,
    "txchain": _txchain_parser,
    "verify": _verify_parser,
    "pulse-spectrum": _pulse_spectrum_parser,
}


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="ddshaper", description="Delay-Doppler pulse shaping toolkit")
    parser.add_argument("--log_level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subcommands = parser.add_subcommands(dest="subcommand")
    for name, make_parser in COMMAND_PARSERS.items():
        subparser = make_parser()
        subcommands.add_subcommand(name, subparser, help=subparser.description)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(None if argv is None else list(argv))
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, stream=sys.stderr)

    command = args.subcommand
    try:
        configure_threads()
        run = resolve_run_config(command, args[command])
        return COMMANDS[command](run, args[command])
    except (DDShaperError, OSError) as e:
        logger.error("%s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
