import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import torch
from einops import rearrange

from ddshaper.core.config import DDGridParams
from ddshaper.core.errors import DomainError
from ddshaper.core.signal import SampledSignal
from ddshaper.core.utils import (
    as_axis,
    axis_step,
    cexp,
    GRID_TOL,
    grid_indices,
    grid_ratio,
    lookup,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ZakImage:
    """Samples of a delay-Doppler function on the grid ``tau_axis x nu_axis``."""

    grid: DDGridParams
    tau_axis: torch.Tensor
    nu_axis: torch.Tensor
    values: torch.Tensor

    def __post_init__(self):
        tau_axis = as_axis(self.tau_axis)
        nu_axis = as_axis(self.nu_axis)
        values = torch.as_tensor(self.values, dtype=torch.complex128)
        if values.shape != (tau_axis.numel(), nu_axis.numel()):
            raise DomainError(
                f"values must have shape {(tau_axis.numel(), nu_axis.numel())} but have {tuple(values.shape)}"
            )

        tau_step = axis_step(tau_axis)
        nu_step = axis_step(nu_axis)
        if tau_step is not None:
            grid_ratio(self.grid.delay_step, tau_step, "delay step T/M over tau axis step")
        if nu_step is not None:
            grid_ratio(self.grid.doppler_step, nu_step, "Doppler step 1/(NT) over nu axis step")

        object.__setattr__(self, "tau_axis", tau_axis)
        object.__setattr__(self, "nu_axis", nu_axis)
        object.__setattr__(self, "values", values)

    @property
    def tau_step(self) -> Optional[float]:
        return axis_step(self.tau_axis)

    @property
    def nu_step(self) -> Optional[float]:
        return axis_step(self.nu_axis)

    @property
    def periods_covered(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """Indices ``(n_min, n_max), (m_min, m_max)`` of the delay and Doppler periods touched by the axes."""
        T = self.grid.T
        tau, nu = self.tau_axis, self.nu_axis
        n_min = math.floor(float(tau[0]) / T + GRID_TOL)
        n_max = math.floor(float(tau[-1]) / T + GRID_TOL)
        m_min = math.floor(float(nu[0]) * T + GRID_TOL)
        m_max = math.floor(float(nu[-1]) * T + GRID_TOL)
        return (n_min, n_max), (m_min, m_max)


@dataclass(frozen=True)
class ZakMatrix:
    """Discrete Zak coefficients ``values[l, k]`` of an ``M x N`` frame."""

    values: torch.Tensor

    def __post_init__(self):
        values = torch.as_tensor(self.values, dtype=torch.complex128)
        if values.dim() != 2:
            raise DomainError(f"Zak matrix must be 2-D but has shape {tuple(values.shape)}")
        if not bool(torch.isfinite(values).all()):
            raise DomainError("Zak matrix entries must be finite")
        object.__setattr__(self, "values", values)

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class QuasiPeriodicityReport:
    max_delay_err: float
    max_doppler_err: float
    passed: bool
    worst_delay_location: Tuple[float, float]


def zak_transform(
    x: SampledSignal,
    grid: DDGridParams,
    tau_axis: Optional[torch.Tensor] = None,
    nu_axis: Optional[torch.Tensor] = None,
) -> ZakImage:
    """Zak transform ``sqrt(T) * sum_k x(tau + kT) exp(-j2pi k nu T)`` of a finitely supported signal.

    The default axes are one delay period ``[0, T)`` at the signal's sample step and ``N * Q``
    Doppler points on ``[0, 1/T)``.
    """
    if len(x) == 0:
        raise DomainError("cannot transform an empty signal")

    T = grid.T
    grid_ratio(grid.delay_step, x.dt, "delay step T/M over signal step")
    period = grid_ratio(T, x.dt, "period T over signal step")

    tau_axis = as_axis(torch.arange(period, dtype=torch.float64) * x.dt if tau_axis is None else tau_axis)
    nu_axis = as_axis(grid.nu_axis() if nu_axis is None else nu_axis)

    base = grid_indices(tau_axis, x.t0, x.dt, "tau_axis")
    k_min = math.floor(-int(base.max()) / period)
    k_max = math.ceil((len(x) - 1 - int(base.min())) / period)
    shifts = torch.arange(k_min, k_max + 1, dtype=torch.int64)

    gathered = lookup(x.samples, base[:, None] + shifts[None, :] * period)
    kernel = cexp(-shifts.to(torch.float64)[:, None] * nu_axis[None, :] * T)
    logger.debug("zak transform over %d x %d points with %d period shifts", len(tau_axis), len(nu_axis), len(shifts))

    values = math.sqrt(T) * (gathered @ kernel)
    return ZakImage(grid=grid, tau_axis=tau_axis, nu_axis=nu_axis, values=values)


def inverse_zak(Z: ZakImage, t_axis: Optional[torch.Tensor] = None) -> SampledSignal:
    """Rectangle-rule inverse ``sqrt(T) * int_0^{1/T} Z(t, nu) dnu``.

    Points of ``t_axis`` outside the delay axis are recovered through the quasi-periodic extension
    ``Z(tau + nT, nu) = exp(j2pi n nu T) Z(tau, nu)``. Defaults to the delay axis itself.
    """
    T = Z.grid.T
    tau_step, nu_step = Z.tau_step, Z.nu_step
    if tau_step is None or nu_step is None:
        raise DomainError("inverse Zak transform needs uniformly sampled delay and Doppler axes")

    per_doppler = grid_ratio(1.0 / T, nu_step, "Doppler period 1/T over nu step")
    if Z.nu_axis.numel() < per_doppler:
        raise DomainError(f"nu axis covers {Z.nu_axis.numel()} of {per_doppler} points of a Doppler period")
    per_delay = grid_ratio(T, tau_step, "delay period T over tau step")
    if Z.tau_axis.numel() < per_delay:
        raise DomainError(f"tau axis covers {Z.tau_axis.numel()} of {per_delay} points of a delay period")

    values = Z.values[:, :per_doppler]
    nu = Z.nu_axis[:per_doppler]
    tau_start = float(Z.tau_axis[0])

    if t_axis is None:
        samples = math.sqrt(T) * nu_step * values.sum(dim=1)
        return SampledSignal(t0=tau_start, dt=tau_step, samples=samples)

    t_axis = as_axis(t_axis)
    t_step = axis_step(t_axis) or tau_step
    n = torch.floor((t_axis - tau_start) / T + GRID_TOL)
    rows = grid_indices(t_axis - n * T, tau_start, tau_step, "t_axis")
    phase = cexp(n[:, None] * nu[None, :] * T)
    samples = math.sqrt(T) * nu_step * (values[rows] * phase).sum(dim=1)
    return SampledSignal(t0=float(t_axis[0]), dt=t_step, samples=samples)


def dzt(x: torch.Tensor, M: int, N: int) -> ZakMatrix:
    """Discrete Zak transform ``Z[l, k] = 1/sqrt(N) sum_n x[l + nM] exp(-j2pi kn/N)``."""
    x = torch.as_tensor(x, dtype=torch.complex128)
    if x.dim() != 1 or x.numel() != M * N:
        raise DomainError(f"dzt expects {M * N} samples but got shape {tuple(x.shape)}")
    return ZakMatrix(torch.fft.fft(rearrange(x, "(n m) -> m n", m=M), dim=-1, norm="ortho"))


def idzt(X) -> torch.Tensor:
    """Inverse discrete Zak transform ``x[l + nM] = 1/sqrt(N) sum_k X[l, k] exp(j2pi kn/N)``."""
    if not isinstance(X, ZakMatrix):
        X = ZakMatrix(X)
    return rearrange(torch.fft.ifft(X.values, dim=-1, norm="ortho"), "m n -> (n m)")


def twisted_shift(x: SampledSignal, tau0: float, nu0: float) -> SampledSignal:
    """Returns ``exp(j2pi nu0 (t - tau0)) x(t - tau0)``, ``tau0`` must lie on the sample grid."""
    grid_ratio(tau0, x.dt, "tau0")
    samples = x.samples * cexp(nu0 * x.time_axis)
    return SampledSignal(t0=x.t0 + tau0, dt=x.dt, samples=samples)


def quasi_periodicity_check(Z: ZakImage, tol: float = 1e-9) -> QuasiPeriodicityReport:
    """Measures ``|Z(tau+T, nu) - exp(j2pi T nu) Z(tau, nu)|`` and ``|Z(tau, nu+1/T) - Z(tau, nu)|``."""
    T = Z.grid.T
    tau_step, nu_step = Z.tau_step, Z.nu_step
    if tau_step is None or nu_step is None:
        raise DomainError("quasi-periodicity check needs at least two points on each axis")

    s = grid_ratio(T, tau_step, "delay period T over tau step")
    r = grid_ratio(1.0 / T, nu_step, "Doppler period 1/T over nu step")
    if Z.tau_axis.numel() < 2 * s or Z.nu_axis.numel() < 2 * r:
        raise DomainError("quasi-periodicity check needs at least two delay and two Doppler periods")

    values = Z.values
    delay_err = (values[s:] - cexp(T * Z.nu_axis)[None, :] * values[:-s]).abs()
    doppler_err = (values[:, r:] - values[:, :-r]).abs()

    worst = int(torch.argmax(delay_err))
    row, col = divmod(worst, delay_err.shape[1])
    max_delay_err = float(delay_err.max())
    max_doppler_err = float(doppler_err.max())

    bound = tol * float(values.abs().max())
    passed = max_delay_err <= bound and max_doppler_err <= bound
    if not passed:
        logger.debug("quasi-periodicity violated: delay err %.3e, doppler err %.3e", max_delay_err, max_doppler_err)

    return QuasiPeriodicityReport(
        max_delay_err=max_delay_err,
        max_doppler_err=max_doppler_err,
        passed=passed,
        worst_delay_location=(float(Z.tau_axis[row]), float(Z.nu_axis[col])),
    )
