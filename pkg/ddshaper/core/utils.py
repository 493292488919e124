import logging
import math
import os
from typing import Optional, Sequence, Union

import torch

from ddshaper.core.errors import ConfigError, DomainError, GridMismatchError

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "DD_SHAPER_THREADS"

# tolerance on step ratios, absorbs rounding of float grid arithmetic
GRID_TOL = 1e-6

AxisLike = Union[torch.Tensor, Sequence[float], float]


def grid_ratio(value: float, step: float, what: str = "value") -> int:
    """Returns ``value / step`` as integer or raises a ``GridMismatchError`` if it is not one."""
    if step <= 0:
        raise DomainError(f"step must be positive but is {step}")
    ratio = value / step
    nearest = round(ratio)
    if abs(ratio - nearest) > GRID_TOL:
        raise GridMismatchError(f"{what}={value} is not an integer multiple of step {step}")
    return int(nearest)


def is_on_grid(value: float, step: float) -> bool:
    ratio = value / step
    return abs(ratio - round(ratio)) <= GRID_TOL


def as_axis(axis: AxisLike) -> torch.Tensor:
    axis = torch.as_tensor(axis, dtype=torch.float64)
    if axis.dim() == 0:
        axis = axis.reshape(1)
    if axis.dim() != 1 or axis.numel() == 0:
        raise DomainError(f"axis must be a non-empty 1-D sequence but has shape {tuple(axis.shape)}")
    return axis


def axis_step(axis: torch.Tensor) -> Optional[float]:
    """Step of a uniformly spaced axis, ``None`` for single-point axes."""
    if axis.numel() < 2:
        return None
    steps = axis[1:] - axis[:-1]
    step = float(steps.mean())
    if step <= 0 or float((steps - step).abs().max()) > GRID_TOL * step:
        raise DomainError("axis must be uniformly spaced and increasing")
    return step


def grid_indices(axis: torch.Tensor, origin: float, step: float, what: str = "axis") -> torch.Tensor:
    """Integer sample indices of ``axis`` points on the grid ``origin + i * step``."""
    ratio = (axis - origin) / step
    nearest = torch.round(ratio)
    if float((ratio - nearest).abs().max()) > GRID_TOL:
        raise GridMismatchError(f"{what} is not on the sample grid (origin={origin}, step={step})")
    return nearest.to(torch.int64)


def lookup(samples: torch.Tensor, indices: torch.Tensor) -> torch.Tensor:
    """Gathers ``samples[indices]`` with zeros for out-of-range indices."""
    padded = torch.cat([samples, samples.new_zeros(1)])
    valid = (indices >= 0) & (indices < samples.numel())
    return padded[torch.where(valid, indices, torch.full_like(indices, samples.numel()))]


def cexp(phase: torch.Tensor) -> torch.Tensor:
    """``exp(j * 2 * pi * phase)`` for a real phase in cycles."""
    return torch.polar(torch.ones_like(phase), 2 * math.pi * phase)


def configure_threads() -> Optional[int]:
    """Caps torch intra-op parallelism from the ``DD_SHAPER_THREADS`` environment variable."""
    value = os.environ.get(THREADS_ENV_VAR)
    if value is None or value.strip() == "":
        return None
    try:
        num_threads = int(value)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be a positive integer but is {value!r}")
    if num_threads < 1:
        raise ConfigError(f"{THREADS_ENV_VAR} must be a positive integer but is {num_threads}")
    torch.set_num_threads(num_threads)
    logger.debug("using %d threads", num_threads)
    return num_threads
