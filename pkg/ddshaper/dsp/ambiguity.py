import cmath
import logging
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple

import torch
from tqdm import tqdm

from ddshaper.core.config import ChainConfig, DDGridParams, WindowSpec
from ddshaper.core.errors import DomainError, GridMismatchError, PreconditionError
from ddshaper.core.signal import inner_product, SampledSignal, SpectrumSignal
from ddshaper.core.utils import as_axis, cexp, GRID_TOL, grid_indices, grid_ratio
from ddshaper.dsp.basis import BasisId, frequency_support, frequency_window, time_window, truncated_pulse
from ddshaper.dsp.windows import (
    asinc_eval,
    AtomPair,
    periodicity_check,
    realize_window,
    window_dual,
    window_values,
)
from ddshaper.dsp.zakcore import twisted_shift, ZakImage

logger = logging.getLogger(__name__)

# magnitude floor of dB-normalized cuts
DB_FLOOR = -300.0

# one-sided extent of a sampled frequency-domain window's time dual, in delay bins
FW_DUAL_HALF_SPAN = 16

CUTS = ("zero_doppler", "zero_delay", "surface")


@dataclass(frozen=True)
class AmbiguitySurface:
    tau_axis: torch.Tensor
    nu_axis: torch.Tensor
    values: torch.Tensor

    @property
    def peak(self) -> float:
        return float(self.values.abs().max())

    @property
    def peak_location(self) -> Tuple[float, float]:
        index = int(torch.argmax(self.values.abs()))
        row, col = divmod(index, self.values.shape[1])
        return float(self.tau_axis[row]), float(self.nu_axis[col])


@dataclass(frozen=True)
class AmbiguityCut:
    axis: str
    offsets: torch.Tensor
    values: torch.Tensor
    mag: torch.Tensor
    mag_db: torch.Tensor


def cross_ambiguity(
    x: SampledSignal,
    y: SampledSignal,
    tau_axis,
    nu_axis,
    chunk_size: int = 64,
    progress: bool = False,
) -> AmbiguitySurface:
    """Cross-ambiguity ``dt sum_t x(t) y*(t - tau) exp(-j2pi nu (t - tau))``.

    Delays must be sample-aligned with the two signals, Doppler values are arbitrary.
    """
    if abs(x.dt - y.dt) > GRID_TOL * x.dt:
        raise DomainError(f"signals have different sample steps {x.dt} and {y.dt}")
    tau = as_axis(tau_axis)
    nu = as_axis(nu_axis)
    shifts = grid_indices(tau, x.t0 - y.t0, x.dt, "tau_axis")

    kernel = cexp(-x.time_axis[:, None] * nu[None, :])
    index = torch.arange(len(x), dtype=torch.int64)
    padded = torch.cat([y.samples.conj(), y.samples.new_zeros(1)])

    chunks = []
    starts = range(0, len(tau), chunk_size)
    for lo in tqdm(starts, desc="ambiguity", disable=not progress, leave=False):
        y_index = index[None, :] - shifts[lo : lo + chunk_size, None]
        valid = (y_index >= 0) & (y_index < len(y))
        y_conj = padded[torch.where(valid, y_index, torch.full_like(y_index, len(y)))]
        chunks.append((x.samples[None, :] * y_conj) @ kernel)
    logger.debug("ambiguity over %d x %d points in %d chunks", len(tau), len(nu), len(starts))

    values = x.dt * cexp(tau[:, None] * nu[None, :]) * torch.cat(chunks)
    return AmbiguitySurface(tau_axis=tau, nu_axis=nu, values=values)


def _ambiguity_at(x: SampledSignal, y: SampledSignal, tau: float, nu: float) -> complex:
    return complex(cross_ambiguity(x, y, [tau], [nu]).values[0, 0])


def _full_period(Z: ZakImage) -> Tuple[int, int]:
    tau_step, nu_step = Z.tau_step, Z.nu_step
    if tau_step is None or nu_step is None:
        raise DomainError("Zak image must be sampled on uniform delay and Doppler axes")
    s = grid_ratio(Z.grid.T, tau_step, "delay period over tau step")
    r = grid_ratio(1.0 / Z.grid.T, nu_step, "Doppler period over nu step")
    if len(Z.tau_axis) < s or len(Z.nu_axis) < r:
        raise DomainError("Zak image does not cover the fundamental rectangle")
    return s, r


def af_lattice_from_zak(Zx: ZakImage, Zy: ZakImage, n: int, m: int) -> complex:
    """Rectangle-rule ``int_0^T int_0^{1/T} Zx Zy* exp(-j2pi m tau/T) exp(j2pi n nu T)``, the AF at ``(nT, m/T)``."""
    s, r = _full_period(Zx)
    if (
        Zx.tau_axis.shape != Zy.tau_axis.shape
        or Zx.nu_axis.shape != Zy.nu_axis.shape
        or not torch.allclose(Zx.tau_axis, Zy.tau_axis)
        or not torch.allclose(Zx.nu_axis, Zy.nu_axis)
    ):
        raise GridMismatchError("Zak images are sampled on different grids")

    T = Zx.grid.T
    tau, nu = Zx.tau_axis[:s], Zx.nu_axis[:r]
    product = Zx.values[:s, :r] * Zy.values[:s, :r].conj()
    weight = cexp(-m * tau[:, None] / T) * cexp(n * nu[None, :] * T)
    return complex(Zx.tau_step * Zx.nu_step * torch.sum(product * weight))


def dd_inner_product(Zx: ZakImage, Zy: ZakImage) -> complex:
    return af_lattice_from_zak(Zx, Zy, 0, 0)


def zak_product_series(
    af_lattice: Mapping[Tuple[int, int], complex],
    tau,
    nu,
    trunc: int,
    period: float = 1.0,
    m_range: Optional[Sequence[int]] = None,
):
    """Lattice Fourier series ``sum_n sum_m A(nT, m/T) exp(-j2pi n nu T) exp(j2pi m tau/T)``.

    Sums ``|n| <= trunc`` and ``|m| <= trunc`` unless ``m_range`` is given; a missing lattice entry
    raises instead of being treated as zero.
    """
    scalar = not isinstance(tau, torch.Tensor) and not isinstance(nu, torch.Tensor)
    tau = torch.as_tensor(tau, dtype=torch.float64)
    nu = torch.as_tensor(nu, dtype=torch.float64)
    m_values = range(-trunc, trunc + 1) if m_range is None else m_range

    total = torch.zeros(torch.broadcast_shapes(tau.shape, nu.shape), dtype=torch.complex128)
    for n in range(-trunc, trunc + 1):
        for m in m_values:
            if (n, m) not in af_lattice:
                raise DomainError(f"lattice value at (n, m) = ({n}, {m}) is missing")
            total = total + af_lattice[(n, m)] * cexp(-n * nu * period) * cexp(m * tau / period)
    return complex(total) if scalar else total


def theorem1_decomposition(atoms: AtomPair, tau: float, nu: float, trunc: int) -> complex:
    """AF of the basis built from ``atoms`` over ``2 * trunc + 1`` periods, via the atoms' own AFs.

    Evaluates ``sum_d A_htau(tau + dT, nu) sum_m A_hnu(-dT, nu + m/T)`` where ``h_nu`` is realized on
    ``[-trunc T, trunc T]`` and ``m`` runs over one alias period of the sample grid.
    """
    if atoms.is_impulse_pair:
        raise DomainError("impulse atoms have no sampled ambiguity function, use localized_af_prediction")
    h = atoms.h_tau
    T = atoms.period
    period = grid_ratio(T, h.dt, "period T over atom step")

    t = (torch.arange(2 * trunc * period + 1, dtype=torch.float64) - trunc * period) * h.dt
    h_nu = SampledSignal(t0=float(t[0]), dt=h.dt, samples=atoms.doppler_time_dual(t))

    d = torch.arange(-2 * trunc, 2 * trunc + 1, dtype=torch.float64)
    m = torch.arange(period, dtype=torch.float64)
    delay_af = cross_ambiguity(h, h, tau + d * T, [nu]).values[:, 0]
    doppler_af = cross_ambiguity(h_nu, h_nu, -d * T, nu + m / T).values.sum(dim=1)
    return complex(torch.sum(delay_af * doppler_af))


def localized_af_prediction(grid: DDGridParams, h_nu_0: complex, H_tau_0: complex, tau: float, nu: float) -> float:
    """``|h_nu(0)|^2 |H_tau(0)|^2`` on the ``(nT, m/T)`` lattice, zero elsewhere."""
    T = grid.T
    delay_snap = 0.5 * grid.dt / T
    doppler_snap = 0.5 / (grid.N * grid.Q)
    on_delay = abs(tau / T - round(tau / T)) <= delay_snap
    on_doppler = abs(nu * T - round(nu * T)) <= doppler_snap
    if on_delay and on_doppler:
        return abs(h_nu_0) ** 2 * abs(H_tau_0) ** 2
    return 0.0


def frequency_window_time_dual(fw: WindowSpec, grid: DDGridParams) -> SampledSignal:
    """``FW_T`` on the time grid; frequency-domain windows are sampled over ``+-16 T/M``."""
    if fw.domain == "time":
        return realize_window(fw, grid.dt)
    half = FW_DUAL_HALF_SPAN * grid.Q
    return window_dual(fw, -half * grid.dt, grid.dt, 2 * half + 1)


def theorem3_af(
    fw: WindowSpec,
    tw: WindowSpec,
    grid: DDGridParams,
    tau: float,
    nu: float,
    trunc: Optional[int] = None,
    h_nu_0: complex = 1.0,
    H_tau_0: complex = 1.0,
) -> complex:
    """AF of a frequency-then-time truncated basis from the windows' AFs.

    ``|h_nu(0)|^2 |H_tau(0)|^2 sum_n A_FW(tau - nT, 0) sum_m A_TW(tau, nu - m/T) exp(j2pi m tau/T)``,
    the ``m`` sum running over one alias period of the time grid.
    """
    if abs(complex(frequency_window(fw, [0.0])[0])) == 0:
        raise PreconditionError("frequency window vanishes at f = 0")
    tw_t = time_window(tw, grid)
    if abs(tw_t.value_at(0.0)) == 0:
        raise PreconditionError("time window vanishes at t = 0")

    T = grid.T
    fw_t = frequency_window_time_dual(fw, grid)
    if trunc is None:
        n = torch.arange(math.floor((tau - fw_t.end) / T), math.ceil((tau - fw_t.t0) / T) + 1, dtype=torch.float64)
    else:
        n = torch.arange(-trunc, trunc + 1, dtype=torch.float64)

    P = grid.samples_per_period
    m = torch.arange(-(P // 2), P - P // 2, dtype=torch.float64)
    fw_af = cross_ambiguity(fw_t, fw_t, tau - n * T, [0.0]).values.sum()
    tw_af = cross_ambiguity(tw_t, tw_t, [tau], nu - m / T).values[0]
    tw_sum = torch.sum(tw_af * cexp(m * tau / T))
    return abs(h_nu_0) ** 2 * abs(H_tau_0) ** 2 * complex(fw_af * tw_sum)


def corollary1_closed_form(
    fw: WindowSpec,
    tw: WindowSpec,
    m_tilde: int,
    n_tilde: int,
    grid: DDGridParams,
    tau,
    nu,
    h_nu_0: complex = 1.0,
    H_tau_0: complex = 1.0,
):
    """Aliased-sinc closed form of the AF for windows periodic inside their supports.

    ``FW_F`` must be ``1/T``-periodic and ``TW_T`` ``T``-periodic, otherwise a ``PreconditionError``
    is raised. The time window covers the instants ``0, T, ..., (n_tilde - 1)T`` and the lag is
    taken from its periodic extension, which fixes the Doppler phase to ``exp(-jpi (n_tilde - 1) nu T)``
    under the ``exp(-j2pi nu (t - tau))`` kernel of ``cross_ambiguity``.
    """
    T = grid.T
    lo, hi = frequency_support(fw)
    df = 1.0 / (T * grid.Q)
    f = lo + df * torch.arange(round((hi - lo) / df), dtype=torch.float64)
    fw_f = SpectrumSignal(f0=lo, df=df, samples=frequency_window(fw, f))
    tw_t = time_window(tw, grid)
    try:
        fw_periodic = periodicity_check(fw_f, 1.0 / T)
        tw_periodic = periodicity_check(tw_t, T)
    except (DomainError, GridMismatchError) as e:
        raise PreconditionError(f"windows too short for the periodic closed form: {e}")
    if not fw_periodic:
        raise PreconditionError("frequency window is not 1/T-periodic inside its support")
    if not tw_periodic:
        raise PreconditionError("time window is not T-periodic inside its support")

    scalar = not isinstance(tau, torch.Tensor) and not isinstance(nu, torch.Tensor)
    tau = torch.as_tensor(tau, dtype=torch.float64)
    nu = torch.as_tensor(nu, dtype=torch.float64)

    fw_0 = frequency_window(fw, [0.0])[0]
    tw_0 = window_values(tw, [0.0])[0]
    tw_lag = window_values(tw, torch.remainder(-tau, T).reshape(-1)).reshape(tau.shape)
    scale = abs(h_nu_0) ** 2 * abs(H_tau_0) ** 2 * fw_0.abs().square() * tw_0 * tw_lag.conj()

    phase = cexp(nu * tau) * cexp(((m_tilde - 1) * tau / T - (n_tilde - 1) * nu * T) / 2)
    values = scale * phase * asinc_eval(tau / T, m_tilde) * asinc_eval(nu * T, n_tilde)
    return complex(values) if scalar else values


def matched_filter_identity(
    x: SampledSignal, grid: DDGridParams, first: BasisId, second: BasisId
) -> Tuple[complex, complex]:
    """Both sides of ``<x_2, x_1> = exp(j2pi nu_2 (tau_1 - tau_2)) A_x(tau_1 - tau_2, nu_1 - nu_2)``.

    ``x_i`` is ``x`` twisted-shifted to lattice point ``i``.
    """
    tau_1, nu_1 = grid.tau(first.l), grid.nu(first.k)
    tau_2, nu_2 = grid.tau(second.l), grid.nu(second.k)
    lhs = inner_product(twisted_shift(x, tau_2, nu_2), twisted_shift(x, tau_1, nu_1))
    rhs = cmath.exp(2j * math.pi * nu_2 * (tau_1 - tau_2)) * _ambiguity_at(x, x, tau_1 - tau_2, nu_1 - nu_2)
    return lhs, rhs


def _zero_index(axis: torch.Tensor, what: str) -> int:
    index = int(torch.argmin(axis.abs()))
    step = float((axis[1:] - axis[:-1]).abs().min()) if len(axis) > 1 else 1.0
    if abs(float(axis[index])) > GRID_TOL * step:
        raise GridMismatchError(f"{what} axis has no sample at zero")
    return index


def extract_cut(surface: AmbiguitySurface, axis: str = "zero_doppler") -> AmbiguityCut:
    """The ``nu = 0`` row or ``tau = 0`` column of a surface with dB magnitudes relative to the cut peak."""
    if axis == "zero_doppler":
        values = surface.values[:, _zero_index(surface.nu_axis, "Doppler")]
        offsets = surface.tau_axis
    elif axis == "zero_delay":
        values = surface.values[_zero_index(surface.tau_axis, "delay"), :]
        offsets = surface.nu_axis
    else:
        raise DomainError(f"cut axis must be zero_doppler or zero_delay but is {axis!r}")

    mag = values.abs()
    peak = float(mag.max())
    if peak > 0:
        mag_db = torch.clamp(20 * torch.log10(mag / peak), min=DB_FLOOR)
    else:
        mag_db = torch.full_like(mag, DB_FLOOR)
    return AmbiguityCut(axis=axis, offsets=offsets, values=values, mag=mag, mag_db=mag_db)


def cut_axes(grid: DDGridParams, cut: str, resolution: Optional[int] = None) -> Tuple[torch.Tensor, torch.Tensor]:
    """Centered delay and Doppler axes of a cut or surface, ``resolution`` points per lattice step."""
    if cut not in CUTS:
        raise DomainError(f"cut must be one of {CUTS} but is {cut!r}")
    if resolution is None:
        resolution = 2 if cut == "surface" else grid.Q
    if resolution < 1:
        raise DomainError(f"resolution must be positive but is {resolution}")

    grid_ratio(grid.delay_step / resolution, grid.dt, "delay resolution step")
    half_tau = grid.M * resolution // 2
    half_nu = grid.N * resolution // 2
    tau = torch.arange(-half_tau, half_tau + 1, dtype=torch.float64) * grid.delay_step / resolution
    nu = torch.arange(-half_nu, half_nu + 1, dtype=torch.float64) * grid.doppler_step / resolution
    zero = torch.zeros(1, dtype=torch.float64)
    if cut == "zero_doppler":
        return tau, zero
    if cut == "zero_delay":
        return zero, nu
    return tau, nu


def pulse_ambiguity(cfg: ChainConfig, tau_axis, nu_axis, progress: bool = False) -> AmbiguitySurface:
    """Ambiguity of the truncated ``(0, 0)`` pulse against its cyclic-prefixed copy.

    Negative delays correlate the prefixed copy against the plain pulse, so both halves see one
    full frame of the periodically extended pulse.
    """
    tau = as_axis(tau_axis)
    nu = as_axis(nu_axis)
    plain = truncated_pulse(cfg.fw, cfg.tw, cfg.grid)
    guarded = truncated_pulse(cfg.fw, cfg.tw, cfg.grid, guard=cfg.cp_length)

    negative = tau < 0
    values = torch.zeros(len(tau), len(nu), dtype=torch.complex128)
    if bool(negative.any()):
        values[negative] = cross_ambiguity(guarded, plain, tau[negative], nu, progress=progress).values
    if bool((~negative).any()):
        values[~negative] = cross_ambiguity(plain, guarded, tau[~negative], nu, progress=progress).values
    return AmbiguitySurface(tau_axis=tau, nu_axis=nu, values=values)
