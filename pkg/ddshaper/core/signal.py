from dataclasses import dataclass

import torch

from ddshaper.core.errors import DomainError
from ddshaper.core.utils import grid_ratio


def _complex_samples(samples, what: str) -> torch.Tensor:
    samples = torch.as_tensor(samples, dtype=torch.complex128)
    if samples.dim() != 1:
        raise DomainError(f"{what} samples must be 1-D but have shape {tuple(samples.shape)}")
    if not bool(torch.isfinite(samples).all()):
        raise DomainError(f"{what} samples must be finite")
    return samples


@dataclass(frozen=True)
class SampledSignal:
    """Uniformly sampled complex time signal, sample ``i`` sits at ``t0 + i * dt``."""

    t0: float
    dt: float
    samples: torch.Tensor

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be positive but is {self.dt}")
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "samples", _complex_samples(self.samples, "signal"))

    def __len__(self):
        return self.samples.numel()

    @property
    def time_axis(self) -> torch.Tensor:
        return self.t0 + self.dt * torch.arange(len(self), dtype=torch.float64)

    @property
    def duration(self) -> float:
        return len(self) * self.dt

    @property
    def end(self) -> float:
        """End of the support, one step after the last sample."""
        return self.t0 + self.duration

    @property
    def energy(self) -> float:
        return self.dt * float(self.samples.abs().square().sum())

    def scaled(self, factor: complex) -> "SampledSignal":
        return SampledSignal(self.t0, self.dt, self.samples * factor)

    def value_at(self, t: float) -> complex:
        """Sample nearest to ``t``, zero outside the support."""
        index = round((t - self.t0) / self.dt)
        if not 0 <= index < len(self):
            return 0j
        return complex(self.samples[index])


@dataclass(frozen=True)
class SpectrumSignal:
    """Uniformly sampled complex spectrum, sample ``i`` sits at ``f0 + i * df``."""

    f0: float
    df: float
    samples: torch.Tensor

    def __post_init__(self):
        if not self.df > 0:
            raise DomainError(f"df must be positive but is {self.df}")
        object.__setattr__(self, "f0", float(self.f0))
        object.__setattr__(self, "df", float(self.df))
        object.__setattr__(self, "samples", _complex_samples(self.samples, "spectrum"))

    def __len__(self):
        return self.samples.numel()

    @property
    def freq_axis(self) -> torch.Tensor:
        return self.f0 + self.df * torch.arange(len(self), dtype=torch.float64)

    @property
    def bandwidth(self) -> float:
        return len(self) * self.df

    @property
    def end(self) -> float:
        return self.f0 + self.bandwidth

    @property
    def energy(self) -> float:
        return self.df * float(self.samples.abs().square().sum())


def inner_product(x: SampledSignal, y: SampledSignal) -> complex:
    """Rectangle-rule inner product ``dt * sum(x * conj(y))`` over the common support."""
    if abs(x.dt - y.dt) > 1e-12 * x.dt:
        raise DomainError(f"signals have different sample steps {x.dt} and {y.dt}")
    offset = grid_ratio(y.t0 - x.t0, x.dt, "signal offset")
    start = max(0, offset)
    stop = min(len(x), offset + len(y))
    if stop <= start:
        return 0j
    xs = x.samples[start:stop]
    ys = y.samples[start - offset : stop - offset]
    return complex(x.dt * torch.sum(xs * ys.conj()))
