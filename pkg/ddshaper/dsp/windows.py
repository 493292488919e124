import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import torch

from ddshaper.core.config import WindowSpec
from ddshaper.core.errors import DomainError, PreconditionError
from ddshaper.core.signal import SampledSignal, SpectrumSignal
from ddshaper.core.utils import as_axis, cexp, GRID_TOL, grid_ratio

logger = logging.getLogger(__name__)

Realized = Union[SampledSignal, SpectrumSignal]

# |sin(pi x)| below which asinc_eval uses the integer-point limit
ASINC_SINGULARITY_TOL = 1e-12


def _step(w: Realized) -> float:
    return w.dt if isinstance(w, SampledSignal) else w.df


def _origin(w: Realized) -> float:
    return w.t0 if isinstance(w, SampledSignal) else w.f0


def _make(domain: str, start: float, step: float, samples: torch.Tensor) -> Realized:
    if domain == "time":
        return SampledSignal(t0=start, dt=step, samples=samples)
    return SpectrumSignal(f0=start, df=step, samples=samples)


def window_support(spec: WindowSpec) -> Tuple[float, float]:
    """Support ``[lo, hi)`` of a window in its native domain."""
    if spec.kind == "rrc_dual":
        return -spec.span / 2, spec.span / 2
    return 0.0, spec.span


def dual_support(spec: WindowSpec) -> Optional[Tuple[float, float]]:
    """Support of the Fourier dual, ``None`` when the dual is not band-limited."""
    if spec.kind != "rrc_dual":
        return None
    edge = (1 + spec.rolloff) / (2 * spec.orth_period)
    return -edge, edge


def window_energy(spec: WindowSpec) -> float:
    """Analytic energy of the window; the untruncated pulse for ``rrc_dual``."""
    if spec.kind == "rect":
        return spec.span
    if spec.kind == "periodic_cosine":
        return spec.span / 2
    return 1.0


def _rrc(t: torch.Tensor, p: float, beta: float) -> torch.Tensor:
    """Unit-energy root-raised-cosine pulse with zero crossings of its autocorrelation at multiples of ``p``."""
    if beta == 0:
        return torch.sinc(t / p) / math.sqrt(p)

    u = t / p
    origin = (1 - beta + 4 * beta / math.pi) / math.sqrt(p)
    singular = beta / math.sqrt(2 * p) * (
        (1 + 2 / math.pi) * math.sin(math.pi / (4 * beta)) + (1 - 2 / math.pi) * math.cos(math.pi / (4 * beta))
    )

    num = torch.sin(math.pi * u * (1 - beta)) + 4 * beta * u * torch.cos(math.pi * u * (1 + beta))
    den = math.pi * u * (1 - (4 * beta * u) ** 2)
    at_origin = u.abs() < 1e-12
    at_singular = (u.abs() - 1 / (4 * beta)).abs() < 1e-12
    safe = torch.where(at_origin | at_singular, torch.ones_like(den), den)

    values = num / safe / math.sqrt(p)
    values = torch.where(at_singular, torch.full_like(values, singular), values)
    return torch.where(at_origin, torch.full_like(values, origin), values)


def _sqrt_rc(f: torch.Tensor, p: float, beta: float) -> torch.Tensor:
    """Fourier transform of ``_rrc``, flat top ``sqrt(p)`` and cosine taper."""
    f = f.abs()
    inner = (1 - beta) / (2 * p)
    outer = (1 + beta) / (2 * p)
    flat = torch.full_like(f, math.sqrt(p))
    if beta == 0:
        return torch.where(f <= inner, flat, torch.zeros_like(f))
    taper = math.sqrt(p) * torch.cos(math.pi * p / (2 * beta) * (f - inner))
    return torch.where(f <= inner, flat, torch.where(f <= outer, taper, torch.zeros_like(f)))


def window_values(spec: WindowSpec, u) -> torch.Tensor:
    """Window evaluated at native-domain points ``u`` (zero outside its support)."""
    u = as_axis(u)
    lo, hi = window_support(spec)
    eps = GRID_TOL * spec.span
    inside = (u >= lo - eps) & (u < hi - eps)

    if spec.kind == "rect":
        values = torch.ones_like(u)
    elif spec.kind == "periodic_cosine":
        values = torch.cos(2 * math.pi * u / spec.period)
    else:
        inside = (u >= lo - eps) & (u <= hi + eps)
        values = _rrc(u, spec.orth_period, spec.rolloff)
    return torch.where(inside, values, torch.zeros_like(values)).to(torch.complex128)


def _rect_dual(v: torch.Tensor, span: float, sign: int) -> torch.Tensor:
    return span * cexp(sign * v * span / 2) * torch.sinc(v * span)


def dual_values(spec: WindowSpec, v) -> torch.Tensor:
    """Analytic Fourier dual of the window at points ``v`` of the other domain.

    Time windows map to spectra with kernel ``exp(-j2pi f t)``, frequency windows to time
    signals with kernel ``exp(+j2pi f t)``.
    """
    v = as_axis(v)
    sign = -1 if spec.domain == "time" else 1
    if spec.kind == "rect":
        return _rect_dual(v, spec.span, sign)
    if spec.kind == "periodic_cosine":
        shift = 1.0 / spec.period
        return 0.5 * (_rect_dual(v + shift, spec.span, sign) + _rect_dual(v - shift, spec.span, sign))
    return _sqrt_rc(v, spec.orth_period, spec.rolloff).to(torch.complex128)


def realize_window(spec: WindowSpec, step: float) -> Realized:
    """Samples the window in its native domain.

    ``rect`` and ``periodic_cosine`` start at the origin and must hold an integer number of steps,
    ``rrc_dual`` is sampled symmetrically around the origin.
    """
    if not step > 0:
        raise DomainError(f"step must be positive but is {step}")

    if spec.kind == "rrc_dual":
        half = math.floor(spec.span / (2 * step) + GRID_TOL)
        start = -half * step
        count = 2 * half + 1
    else:
        start = 0.0
        count = grid_ratio(spec.span, step, "window span")

    u = start + step * torch.arange(count, dtype=torch.float64)
    samples = window_values(spec, u)
    if spec.kind == "rrc_dual":
        origin = samples[half]
    else:
        origin = samples[0]
    if abs(complex(origin)) == 0:
        raise PreconditionError(f"{spec.kind} window vanishes at its origin")

    logger.debug("realized %s window with %d samples at step %g", spec.kind, count, step)
    return _make(spec.domain, start, step, samples)


def window_dual(spec: WindowSpec, start: float, step: float, count: int) -> Realized:
    """Analytic Fourier dual sampled at ``start + i * step`` in the dual domain."""
    v = start + step * torch.arange(count, dtype=torch.float64)
    return _make(spec.dual_domain, start, step, dual_values(spec, v))


def spectral_transform(x: Realized, start: float, step: float, count: int, chunk_size: int = 512) -> Realized:
    """Rectangle-rule Fourier transform of a sampled signal or spectrum onto a uniform dual axis."""
    if count < 1:
        raise DomainError(f"count must be positive but is {count}")
    sign = -1 if isinstance(x, SampledSignal) else 1
    src_axis = x.time_axis if isinstance(x, SampledSignal) else x.freq_axis
    dst_axis = start + step * torch.arange(count, dtype=torch.float64)

    chunks = []
    for lo in range(0, count, chunk_size):
        kernel = cexp(sign * dst_axis[lo : lo + chunk_size, None] * src_axis[None, :])
        chunks.append(kernel @ x.samples)
    samples = _step(x) * torch.cat(chunks)
    return _make("frequency" if sign < 0 else "time", start, step, samples)


def asinc_eval(x, count: int):
    """Aliased sinc ``sin(pi count x) / sin(pi x)``, ``count * (-1)^((count-1) x)`` at integers."""
    if count < 1:
        raise DomainError(f"count must be positive but is {count}")
    scalar = not isinstance(x, torch.Tensor)
    x = torch.as_tensor(x, dtype=torch.float64)

    den = torch.sin(math.pi * x)
    singular = den.abs() < ASINC_SINGULARITY_TOL
    safe = torch.where(singular, torch.ones_like(den), den)
    values = torch.sin(math.pi * count * x) / safe

    parity = torch.remainder((count - 1) * torch.round(x), 2)
    limit = count * (1 - 2 * parity)
    values = torch.where(singular, limit, values)
    return float(values) if scalar else values


@dataclass(frozen=True)
class OrthogonalityReport:
    max_offpeak: float
    passed: bool


def orthogonality_check(w: Realized, period: float, tol: float = 1e-3) -> OrthogonalityReport:
    """Largest normalized autocorrelation of ``w`` at non-zero lags ``j * period`` inside its span."""
    lag = grid_ratio(period, _step(w), "orthogonality period")
    samples = w.samples
    energy = float(samples.abs().square().sum())
    if energy == 0:
        raise DomainError("window has zero energy")

    max_offpeak = 0.0
    shift = lag
    while 0 < shift < len(samples):
        corr = torch.sum(samples[shift:] * samples[:-shift].conj())
        max_offpeak = max(max_offpeak, abs(complex(corr)) / energy)
        shift += lag
    return OrthogonalityReport(max_offpeak=max_offpeak, passed=max_offpeak <= tol)


def periodicity_check(w: Realized, period: float, tol: float = 1e-9) -> bool:
    """Whether ``w`` repeats with ``period`` inside its support, relative to its peak."""
    lag = grid_ratio(period, _step(w), "periodicity period")
    if len(w) < 2 * lag:
        raise DomainError(f"span {len(w) * _step(w)} is shorter than two periods of {period}")
    samples = w.samples
    err = float((samples[lag:] - samples[:-lag]).abs().max())
    return err <= tol * float(samples.abs().max())


@dataclass(frozen=True)
class AtomPair:
    """Delay atom ``h_tau`` and Doppler atom ``H_nu`` of a separable pulse ``h_tau(tau) H_nu(nu)``.

    The impulse pair ``h_tau = delta``, ``H_nu = delta`` is kept symbolic and never sampled.
    """

    h_tau: Optional[SampledSignal]
    H_nu: Optional[SpectrumSignal]
    period: float = 1.0
    is_impulse_pair: bool = False

    def __post_init__(self):
        if self.is_impulse_pair:
            if self.h_tau is not None or self.H_nu is not None:
                raise DomainError("the impulse pair carries no sampled atoms")
            return
        if self.h_tau is None or self.H_nu is None:
            raise DomainError("sampled atom pairs need both h_tau and H_nu")

        T = self.period
        if self.h_tau.t0 < -GRID_TOL * T or self.h_tau.end > T * (1 + GRID_TOL):
            raise DomainError(f"delay atom support [{self.h_tau.t0}, {self.h_tau.end}) exceeds [0, {T})")
        if self.H_nu.f0 < -GRID_TOL / T or self.H_nu.end > (1 + GRID_TOL) / T:
            raise DomainError(f"Doppler atom support [{self.H_nu.f0}, {self.H_nu.end}) exceeds [0, {1 / T})")

    @classmethod
    def impulse(cls, period: float = 1.0) -> "AtomPair":
        return cls(h_tau=None, H_nu=None, period=period, is_impulse_pair=True)

    def doppler_time_dual(self, t) -> torch.Tensor:
        """``h_nu(t) = int H_nu(f) exp(j2pi f t) df``."""
        t = as_axis(t)
        if self.is_impulse_pair:
            return torch.ones_like(t, dtype=torch.complex128)
        kernel = cexp(t[:, None] * self.H_nu.freq_axis[None, :])
        return self.H_nu.df * (kernel @ self.H_nu.samples)

    def delay_frequency_dual(self, f) -> torch.Tensor:
        """``H_tau(f) = int h_tau(t) exp(-j2pi f t) dt``."""
        f = as_axis(f)
        if self.is_impulse_pair:
            return torch.ones_like(f, dtype=torch.complex128)
        kernel = cexp(-f[:, None] * self.h_tau.time_axis[None, :])
        return self.h_tau.dt * (kernel @ self.h_tau.samples)

    def origin_values(self) -> Tuple[complex, complex]:
        """``(h_nu(0), H_tau(0))``."""
        if self.is_impulse_pair:
            return 1 + 0j, 1 + 0j
        return complex(self.H_nu.df * self.H_nu.samples.sum()), complex(self.h_tau.dt * self.h_tau.samples.sum())
