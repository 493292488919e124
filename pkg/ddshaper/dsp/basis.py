import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple, Union

import torch

from ddshaper.core.config import DDGridParams, WindowSpec
from ddshaper.core.errors import DomainError
from ddshaper.core.signal import SampledSignal, SpectrumSignal
from ddshaper.core.utils import as_axis, cexp, GRID_TOL, grid_indices, grid_ratio, lookup
from ddshaper.dsp.windows import AtomPair, dual_support, dual_values, window_support, window_values
from ddshaper.dsp.zakcore import ZakImage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BasisId:
    l: int
    k: int

    def check(self, grid: DDGridParams) -> "BasisId":
        if not (0 <= self.l < grid.M and 0 <= self.k < grid.N):
            raise DomainError(f"basis id ({self.l}, {self.k}) outside the {grid.M} x {grid.N} lattice")
        return self


@dataclass(frozen=True)
class ImpulseTrain:
    """Weighted impulses at ``positions`` times a tone.

    In the time domain the tone is ``exp(j2pi nu (t - tau_ref))``, in the frequency domain it is
    the linear phase ``exp(-j2pi f tau_ref)``; ``tone_frequency`` is then the Doppler offset the
    positions were shifted by.
    """

    positions: torch.Tensor
    amplitudes: torch.Tensor
    tone_frequency: float = 0.0
    tone_reference: float = 0.0
    domain: str = "time"

    def __post_init__(self):
        positions = torch.as_tensor(self.positions, dtype=torch.float64).reshape(-1)
        amplitudes = torch.as_tensor(self.amplitudes, dtype=torch.complex128).reshape(-1)
        if positions.numel() == 0:
            raise DomainError("impulse train is empty")
        if positions.shape != amplitudes.shape:
            raise DomainError("impulse train needs one amplitude per position")
        if positions.numel() > 1 and not bool((positions[1:] > positions[:-1]).all()):
            raise DomainError("impulse positions must be strictly increasing")
        if not bool(torch.isfinite(amplitudes).all()):
            raise DomainError("impulse amplitudes must be finite")
        if self.domain not in ("time", "frequency"):
            raise DomainError(f"unknown impulse train domain {self.domain!r}")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "amplitudes", amplitudes)

    def __len__(self):
        return self.positions.numel()

    def tone(self, axis: torch.Tensor) -> torch.Tensor:
        if self.domain == "time":
            return cexp(self.tone_frequency * (axis - self.tone_reference))
        return cexp(-axis * self.tone_reference)


def basis_family(grid: DDGridParams) -> Iterator[BasisId]:
    for l in range(grid.M):
        for k in range(grid.N):
            yield BasisId(l, k)


def time_basis_pulsone(bid: BasisId, grid: DDGridParams, n_range: Optional[Sequence[int]] = None) -> ImpulseTrain:
    """Time pulsone ``sqrt(T) sum_n delta(t - tau_l - nT)`` with tone ``exp(j2pi nu_k (t - tau_l))``."""
    bid.check(grid)
    n = torch.as_tensor(list(range(grid.N)) if n_range is None else list(n_range), dtype=torch.float64)
    return ImpulseTrain(
        positions=grid.tau(bid.l) + n * grid.T,
        amplitudes=torch.full_like(n, math.sqrt(grid.T)),
        tone_frequency=grid.nu(bid.k),
        tone_reference=grid.tau(bid.l),
        domain="time",
    )


def freq_basis_pulsone(bid: BasisId, grid: DDGridParams, m_range: Optional[Sequence[int]] = None) -> ImpulseTrain:
    """Frequency pulsone ``1/sqrt(T) sum_m delta(f - nu_k - m/T)`` with phase ``exp(-j2pi f tau_l)``."""
    bid.check(grid)
    m = torch.as_tensor(list(range(grid.M)) if m_range is None else list(m_range), dtype=torch.float64)
    return ImpulseTrain(
        positions=grid.nu(bid.k) + m / grid.T,
        amplitudes=torch.full_like(m, 1 / math.sqrt(grid.T)),
        tone_frequency=grid.nu(bid.k),
        tone_reference=grid.tau(bid.l),
        domain="frequency",
    )


def _covering_signal(train: ImpulseTrain, fw: SampledSignal) -> SampledSignal:
    offset = grid_indices(train.positions, 0.0, fw.dt, "impulse positions")
    start = int(offset.min())
    count = int(offset.max()) - start + len(fw)
    return SampledSignal(t0=fw.t0 + start * fw.dt, dt=fw.dt, samples=torch.ones(count, dtype=torch.complex128))


def truncate_basis(
    train: ImpulseTrain,
    fw: Union[SampledSignal, SpectrumSignal],
    tw: Optional[SampledSignal] = None,
) -> SampledSignal:
    """Convolves the train with the frequency window and applies the time window on ``tw``'s grid.

    A time train takes ``fw`` as the time-domain dual ``FW_T`` and places shifted copies of it, a
    frequency train takes ``fw`` as ``FW_F`` sampled on a grid holding every impulse position.
    Without ``tw`` a time train is realized over the support of all copies.
    """
    if train.domain == "time":
        if not isinstance(fw, SampledSignal):
            raise DomainError("a time impulse train is convolved with a time-domain window")
        if tw is None:
            tw = _covering_signal(train, fw)
        if abs(tw.dt - fw.dt) > GRID_TOL * fw.dt:
            raise DomainError(f"window steps differ: {fw.dt} and {tw.dt}")

        t = tw.time_axis
        shifts = grid_indices(train.positions + fw.t0 - tw.t0, 0.0, tw.dt, "impulse positions")
        index = torch.arange(len(tw), dtype=torch.int64)
        copies = lookup(fw.samples, index[None, :] - shifts[:, None])
        convolved = train.amplitudes @ copies
        return SampledSignal(t0=tw.t0, dt=tw.dt, samples=convolved * train.tone(t) * tw.samples)

    if not isinstance(fw, SpectrumSignal):
        raise DomainError("a frequency impulse train is weighted by a frequency-domain window")
    if tw is None:
        raise DomainError("a frequency impulse train needs a time window to be realized on")

    f = train.positions
    weights = train.amplitudes * lookup(fw.samples, grid_indices(f, fw.f0, fw.df, "impulse positions"))
    weights = weights * train.tone(f)
    t = tw.time_axis
    samples = cexp(t[:, None] * f[None, :]) @ weights
    return SampledSignal(t0=tw.t0, dt=tw.dt, samples=samples * tw.samples)


def realize_pulsone(train: ImpulseTrain, fw: SampledSignal) -> SampledSignal:
    """Time pulsone convolved with ``fw`` over the full support of the shifted copies."""
    return truncate_basis(train, fw)


def time_basis_from_atoms(
    bid: BasisId,
    grid: DDGridParams,
    atoms: AtomPair,
    n_range: Optional[Sequence[int]] = None,
) -> SampledSignal:
    """``sqrt(T) exp(j2pi nu_k (t - tau_l)) sum_n h_nu(nT) h_tau(t - tau_l - nT)`` from sampled atoms."""
    bid.check(grid)
    if atoms.is_impulse_pair:
        raise DomainError("impulse atoms are realized through time_basis_pulsone")
    h = atoms.h_tau
    period = grid_ratio(grid.T, h.dt, "period T over atom step")
    shift = grid_ratio(grid.tau(bid.l), h.dt, "delay offset")

    n = torch.as_tensor(list(range(grid.N)) if n_range is None else list(n_range), dtype=torch.int64)
    weights = atoms.doppler_time_dual(n.to(torch.float64) * grid.T)

    n_min, n_max = int(n.min()), int(n.max())
    count = (n_max - n_min) * period + len(h)
    samples = torch.zeros(count, dtype=torch.complex128)
    for n_i, weight in zip(n.tolist(), weights):
        start = (n_i - n_min) * period
        samples[start : start + len(h)] += weight * h.samples

    t0 = h.t0 + (shift + n_min * period) * h.dt
    signal = SampledSignal(t0=t0, dt=h.dt, samples=math.sqrt(grid.T) * samples)
    tone = cexp(grid.nu(bid.k) * (signal.time_axis - grid.tau(bid.l)))
    return SampledSignal(t0=t0, dt=h.dt, samples=signal.samples * tone)


def _period_range(lo: float, hi: float, support: Tuple[float, float], period: float) -> torch.Tensor:
    """Integers ``n`` with ``[lo, hi] - n * period`` meeting ``support``."""
    n_min = math.floor((lo - support[1]) / period) - 1
    n_max = math.ceil((hi - support[0]) / period) + 1
    return torch.arange(n_min, n_max + 1, dtype=torch.int64)


def dd_basis_image(
    bid: BasisId,
    grid: DDGridParams,
    atoms: AtomPair,
    tau_axis: Optional[torch.Tensor] = None,
    nu_axis: Optional[torch.Tensor] = None,
    n_range: Optional[Sequence[int]] = None,
    m_range: Optional[Sequence[int]] = None,
) -> ZakImage:
    """DD basis function ``sum_n sum_m phi(tau - tau_l - nT, nu - nu_k - m/T)`` with its twisted phases.

    The period sums default to every term that reaches the requested axes.
    """
    bid.check(grid)
    if atoms.is_impulse_pair:
        raise DomainError("impulse atoms have no sampled DD image, use the pulsone forms")
    h, H = atoms.h_tau, atoms.H_nu
    T = grid.T
    tau_l, nu_k = grid.tau(bid.l), grid.nu(bid.k)
    delay_period = grid_ratio(T, h.dt, "period T over delay atom step")
    doppler_period = grid_ratio(1.0 / T, H.df, "period 1/T over Doppler atom step")

    tau_axis = as_axis(torch.arange(delay_period, dtype=torch.float64) * h.dt if tau_axis is None else tau_axis)
    nu_axis = as_axis(torch.arange(doppler_period, dtype=torch.float64) * H.df if nu_axis is None else nu_axis)

    tau_rel = tau_axis - tau_l
    nu_rel = nu_axis - nu_k
    if n_range is None:
        n = _period_range(float(tau_rel.min()), float(tau_rel.max()), (h.t0, h.end), T)
    else:
        n = torch.as_tensor(list(n_range), dtype=torch.int64)
    if m_range is None:
        m = _period_range(float(nu_rel.min()), float(nu_rel.max()), (H.f0, H.end), 1.0 / T)
    else:
        m = torch.as_tensor(list(m_range), dtype=torch.int64)

    tau_index = grid_indices(tau_rel, h.t0, h.dt, "tau_axis")
    nu_index = grid_indices(nu_rel, H.f0, H.df, "nu_axis")

    delay_terms = lookup(h.samples, tau_index[:, None] - n[None, :] * delay_period)
    delay_factor = delay_terms @ cexp(n.to(torch.float64)[:, None] * nu_rel[None, :] * T)
    doppler_factor = lookup(H.samples, nu_index[:, None] - m[None, :] * doppler_period).sum(dim=1)
    logger.debug("basis image (%d, %d) with %d delay and %d Doppler periods", bid.l, bid.k, len(n), len(m))

    values = cexp(nu_k * tau_rel)[:, None] * delay_factor * doppler_factor[None, :]
    return ZakImage(grid=grid, tau_axis=tau_axis, nu_axis=nu_axis, values=values)


def frequency_support(spec: WindowSpec) -> Tuple[float, float]:
    """Support of ``FW_F``, the frequency window as seen in the frequency domain."""
    if spec.domain == "frequency":
        return window_support(spec)
    support = dual_support(spec)
    if support is None:
        raise DomainError(f"a time-domain {spec.kind} window is not band-limited")
    return support


def frequency_window(spec: WindowSpec, f) -> torch.Tensor:
    """``FW_F`` at frequencies ``f``."""
    if spec.domain == "frequency":
        return window_values(spec, f)
    return dual_values(spec, f)


def frequency_window_samples(spec: WindowSpec, grid: DDGridParams) -> SpectrumSignal:
    """``FW_F`` on the Doppler lattice step ``1/(NT)`` across its support."""
    lo, hi = frequency_support(spec)
    df = grid.doppler_step
    start = math.ceil(lo / df - GRID_TOL)
    stop = math.floor(hi / df + GRID_TOL)
    f = (start + torch.arange(stop - start + 1, dtype=torch.float64)) * df
    return SpectrumSignal(f0=start * df, df=df, samples=frequency_window(spec, f))


def time_window_support(spec: WindowSpec, grid: DDGridParams) -> Tuple[float, float]:
    """Placement of ``TW_T``: ``[0, span)`` for time windows, centered on the frame for ``rrc_dual``."""
    if spec.domain == "time" and spec.kind != "rrc_dual":
        return window_support(spec)
    if spec.domain == "frequency" and spec.kind == "rrc_dual":
        half = (1 + spec.rolloff) / (2 * spec.orth_period)
        center = grid.frame_duration / 2
        return center - half, center + half
    raise DomainError(f"{spec.kind} window in the {spec.domain} domain is not usable as a time window")


def time_window(spec: WindowSpec, grid: DDGridParams, guard: float = 0.0, offset: float = 0.0) -> SampledSignal:
    """``TW_T`` on the time grid ``dt = T/(MQ)``.

    ``rect`` and ``periodic_cosine`` windows cover the frame ``[-offset, span - offset)`` of their
    periodic extension and are extended further over the ``guard`` before it; ``rrc_dual`` windows
    are never extended or moved.
    """
    dt = grid.dt
    lo, hi = time_window_support(spec, grid)
    if spec.kind == "rrc_dual":
        if offset != 0:
            raise DomainError("rrc_dual time windows stay centered on the frame")
        start = math.floor(lo / dt + GRID_TOL)
        stop = math.ceil(hi / dt - GRID_TOL)
        t = (start + torch.arange(stop - start + 1, dtype=torch.float64)) * dt
        samples = dual_values(spec, t - grid.frame_duration / 2)
        return SampledSignal(t0=start * dt, dt=dt, samples=samples)

    lead = grid_ratio(guard, dt, "guard") + grid_ratio(offset, dt, "offset")
    count = grid_ratio(hi - lo, dt, "time window span")
    t = (torch.arange(count + lead, dtype=torch.float64) - lead) * dt
    samples = window_values(spec, torch.remainder(t, spec.span))
    return SampledSignal(t0=-lead * dt, dt=dt, samples=samples)


def truncated_pulse(
    fw: WindowSpec,
    tw: WindowSpec,
    grid: DDGridParams,
    bid: BasisId = BasisId(0, 0),
    guard: float = 0.0,
    normalize: bool = False,
    offset: float = 0.0,
) -> SampledSignal:
    """Basis function truncated first in frequency by ``fw`` and then in time by ``tw``.

    ``guard`` and ``offset`` place the time window as in ``time_window``.
    """
    lo, hi = frequency_support(fw)
    nu_k = grid.nu(bid.k)
    m_range = range(math.ceil((lo - nu_k) * grid.T - GRID_TOL), math.floor((hi - nu_k) * grid.T + GRID_TOL) + 1)
    train = freq_basis_pulsone(bid, grid, m_range)
    pulse = truncate_basis(train, frequency_window_samples(fw, grid), time_window(tw, grid, guard, offset))
    if normalize:
        energy = pulse.energy
        if energy == 0:
            raise DomainError("truncated pulse has zero energy")
        pulse = pulse.scaled(1 / math.sqrt(energy))
    return pulse
