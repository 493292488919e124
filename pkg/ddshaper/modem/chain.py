import logging
import math
from typing import Tuple

import torch
from einops import rearrange

from ddshaper.core.config import ChainConfig
from ddshaper.core.errors import DomainError, PreconditionError
from ddshaper.core.signal import SampledSignal
from ddshaper.core.utils import cexp, GRID_TOL, grid_indices, grid_ratio, lookup
from ddshaper.dsp.basis import frequency_window_samples, time_window
from ddshaper.dsp.windows import window_energy
from ddshaper.dsp.zakcore import dzt, idzt
from ddshaper.modem.frame import DDSymbolFrame

logger = logging.getLogger(__name__)

RECEIVERS = ("truncated", "ideal")


def shaping_coefficients(cfg: ChainConfig) -> Tuple[torch.Tensor, torch.Tensor]:
    """Harmonic indices ``q`` and weights ``FW_F(q / NT) / sqrt(E_FW)`` of the unit-energy shaping pulse."""
    fw_f = frequency_window_samples(cfg.fw, cfg.grid)
    q = torch.round(fw_f.freq_axis / cfg.grid.doppler_step).to(torch.int64)
    return q, fw_f.samples / math.sqrt(window_energy(cfg.fw))


def _core_window(cfg: ChainConfig) -> SampledSignal:
    core = time_window(cfg.tw, cfg.grid)
    if abs(core.value_at(0.0)) == 0:
        raise PreconditionError("time window vanishes at t = 0")
    return core


def shape_transmit(frame: DDSymbolFrame, cfg: ChainConfig) -> SampledSignal:
    """DD Nyquist transmitter: IDZT, cyclic prefix, frequency-window convolution and time windowing.

    Evaluates ``sqrt(NT) sum_p x_T[p] sum_m FW_T(t - pT/M - mNT) TW_T(t) / ||TW_T||`` through the
    Fourier series of the ``NT``-periodic pulse train, so every train alias is included. The cyclic
    prefix is the periodic extension of the time window over ``[-cp_length, 0)``.
    """
    grid = cfg.grid
    frame.check(grid)
    grid_ratio(cfg.cp_length, grid.delay_step, "cp_length")
    core = _core_window(cfg)
    window = time_window(cfg.tw, grid, guard=cfg.cp_length)
    if cfg.tw.kind == "rrc_dual" and cfg.cp_length > 0:
        logger.debug("rrc_dual time window is not extended by the cyclic prefix")

    MN = grid.M * grid.N
    L = MN * grid.Q
    NT = grid.frame_duration

    spectrum = torch.fft.fft(idzt(frame.values))
    q, c = shaping_coefficients(cfg)
    harmonics = c * spectrum[torch.remainder(q, MN)] * cexp(q.to(torch.float64) * window.t0 / NT)
    folded = torch.zeros(L, dtype=torch.complex128).index_add_(0, torch.remainder(q, L), harmonics)
    train = torch.fft.ifft(folded, norm="forward") / math.sqrt(NT)

    index = torch.remainder(torch.arange(len(window)), L)
    samples = train[index] * window.samples / math.sqrt(core.energy)
    logger.debug("shaped %d x %d frame into %d samples", grid.M, grid.N, len(samples))
    return SampledSignal(t0=window.t0, dt=window.dt, samples=samples)


def _ideal_statistics(r: SampledSignal, cfg: ChainConfig) -> torch.Tensor:
    grid = cfg.grid
    n = torch.arange(grid.N, dtype=torch.float64)
    t = rearrange(grid.delay_lattice(), "m -> m 1") + rearrange(n * grid.T, "n -> 1 n")
    index = grid_indices(t.reshape(-1), r.t0, r.dt, "lattice instants").reshape(grid.M, grid.N)
    return math.sqrt(grid.T) * torch.fft.fft(lookup(r.samples, index), dim=1)


def matched_filter_receive(r: SampledSignal, cfg: ChainConfig, receiver: str = "truncated") -> DDSymbolFrame:
    """Matched-filter statistics ``Y[l, k]``, normalized so the identity channel returns the sent frame.

    The ``truncated`` receiver correlates with the transmitted truncated basis over the frame
    window, the ``ideal`` receiver samples the ideal pulsones ``sqrt(T) sum_n r(tau_l + nT)
    exp(-j2pi k n/N)`` and divides by the statistic of a unit symbol.
    """
    grid = cfg.grid
    if receiver not in RECEIVERS:
        raise DomainError(f"receiver must be one of {RECEIVERS} but is {receiver!r}")
    if abs(r.dt - grid.dt) > GRID_TOL * grid.dt:
        raise DomainError(f"received signal step {r.dt} differs from the grid step {grid.dt}")

    if receiver == "ideal":
        reference = _ideal_statistics(shape_transmit(DDSymbolFrame.unit(grid), cfg), cfg)[0, 0]
        if abs(complex(reference)) == 0:
            raise PreconditionError("ideal receiver has zero response to a unit symbol")
        return DDSymbolFrame(_ideal_statistics(r, cfg) / reference)

    core = _core_window(cfg)
    offset = grid_ratio(core.t0 - r.t0, r.dt, "received signal origin")
    if offset < 0 or offset + len(core) > len(r):
        raise DomainError(f"received signal [{r.t0}, {r.end}) does not cover the frame [{core.t0}, {core.end})")

    MN = grid.M * grid.N
    L = MN * grid.Q
    NT = grid.frame_duration

    windowed = r.samples[offset : offset + len(core)] * core.samples.conj() / math.sqrt(core.energy)
    folded = torch.zeros(L, dtype=torch.complex128).index_add_(0, torch.remainder(torch.arange(len(core)), L), windowed)
    harmonics = core.dt * torch.fft.fft(folded)

    q, c = shaping_coefficients(cfg)
    correlations = c.conj() * harmonics[torch.remainder(q, L)] * cexp(-q.to(torch.float64) * core.t0 / NT)
    spectrum = torch.zeros(MN, dtype=torch.complex128).index_add_(0, torch.remainder(q, MN), correlations)
    x = torch.fft.ifft(spectrum, norm="forward") / math.sqrt(NT)
    return DDSymbolFrame(dzt(x, grid.M, grid.N).values)
