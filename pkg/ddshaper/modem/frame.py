import math
from dataclasses import dataclass
from typing import Optional

import torch

from ddshaper.core.config import DDGridParams
from ddshaper.core.errors import DomainError

CONSTELLATIONS = ("qpsk",)


@dataclass(frozen=True)
class DDSymbolFrame:
    """``M x N`` delay-Doppler symbol frame ``values[l, k]``."""

    values: torch.Tensor
    constellation: Optional[str] = None

    def __post_init__(self):
        values = torch.as_tensor(self.values, dtype=torch.complex128)
        if values.dim() != 2:
            raise DomainError(f"symbol frame must be 2-D but has shape {tuple(values.shape)}")
        if not bool(torch.isfinite(values).all()):
            raise DomainError("symbol frame entries must be finite")
        if self.constellation is not None and self.constellation not in CONSTELLATIONS:
            raise DomainError(f"unknown constellation {self.constellation!r}")
        object.__setattr__(self, "values", values)

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    @property
    def energy(self) -> float:
        return float(self.values.abs().square().sum())

    def check(self, grid: DDGridParams) -> "DDSymbolFrame":
        if (self.M, self.N) != (grid.M, grid.N):
            raise DomainError(f"frame is {self.M} x {self.N} but the grid is {grid.M} x {grid.N}")
        return self

    @classmethod
    def zeros(cls, grid: DDGridParams) -> "DDSymbolFrame":
        return cls(torch.zeros(grid.M, grid.N, dtype=torch.complex128))

    @classmethod
    def unit(cls, grid: DDGridParams, l: int = 0, k: int = 0) -> "DDSymbolFrame":
        values = torch.zeros(grid.M, grid.N, dtype=torch.complex128)
        values[l, k] = 1
        return cls(values)


def qpsk_frame(grid: DDGridParams, seed: int = 0) -> DDSymbolFrame:
    """Random unit-energy QPSK frame, reproducible for a given seed."""
    generator = torch.Generator().manual_seed(seed)
    bits = torch.randint(0, 2, (grid.M, grid.N, 2), generator=generator).to(torch.float64)
    values = torch.complex(1 - 2 * bits[..., 0], 1 - 2 * bits[..., 1]) / math.sqrt(2)
    return DDSymbolFrame(values, constellation="qpsk")


def qpsk_decide(values: torch.Tensor) -> torch.Tensor:
    """Nearest unit-energy QPSK point of every value."""
    ones = torch.ones(values.shape, dtype=torch.float64)
    re = torch.where(values.real >= 0, ones, -ones)
    im = torch.where(values.imag >= 0, ones, -ones)
    return torch.complex(re, im) / math.sqrt(2)
