import logging
from dataclasses import dataclass
from typing import Tuple

import torch

from ddshaper.core.config import DDGridParams
from ddshaper.core.errors import DomainError
from ddshaper.core.signal import SampledSignal
from ddshaper.core.utils import grid_ratio
from ddshaper.dsp.zakcore import twisted_shift

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Path:
    gain: complex
    delay: float
    doppler: float

    def __post_init__(self):
        if self.delay < 0:
            raise DomainError(f"path delay must be non-negative but is {self.delay}")
        object.__setattr__(self, "gain", complex(self.gain))
        object.__setattr__(self, "delay", float(self.delay))
        object.__setattr__(self, "doppler", float(self.doppler))


@dataclass(frozen=True)
class PathSet:
    """Sparse delay-Doppler channel, an empty set is the zero channel."""

    paths: Tuple[Path, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    @classmethod
    def identity(cls) -> "PathSet":
        return cls((Path(1.0, 0.0, 0.0),))

    @property
    def max_delay(self) -> float:
        return max((p.delay for p in self.paths), default=0.0)

    @property
    def delay_spread(self) -> float:
        if not self.paths:
            return 0.0
        return self.max_delay - min(p.delay for p in self.paths)

    @property
    def doppler_spread(self) -> float:
        if not self.paths:
            return 0.0
        dopplers = [p.doppler for p in self.paths]
        return max(dopplers) - min(dopplers)

    def crystallization_ok(self, grid: DDGridParams) -> bool:
        """Delay spread below ``T`` and Doppler spread below ``1/T``."""
        return self.delay_spread < grid.T and self.doppler_spread < 1.0 / grid.T


def apply_paths(s: SampledSignal, paths: PathSet) -> SampledSignal:
    """``sum_p gain_p exp(j2pi nu_p (t - tau_p)) s(t - tau_p)`` on a grid holding every delayed copy."""
    shifts = [grid_ratio(p.delay, s.dt, "path delay") for p in paths]
    samples = torch.zeros(len(s) + max(shifts, default=0), dtype=torch.complex128)
    for path, shift in zip(paths, shifts):
        shifted = twisted_shift(s, path.delay, path.doppler)
        samples[shift : shift + len(s)] += path.gain * shifted.samples
    logger.debug("applied %d paths, max delay %g", len(paths), paths.max_delay)
    return SampledSignal(t0=s.t0, dt=s.dt, samples=samples)
