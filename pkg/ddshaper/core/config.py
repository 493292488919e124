from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

import torch

from ddshaper.core.errors import DomainError

WINDOW_KINDS = ("rect", "rrc_dual", "periodic_cosine")
WINDOW_DOMAINS = ("time", "frequency")
PRESETS = ("sinc_sinc", "rrc_rrc", "cos_rrc")

# default truncation of rrc_dual realizations, in orthogonal periods
RRC_SPAN_PERIODS = 32


@dataclass(frozen=True)
class DDGridParams:
    M: int = 32
    N: int = 32
    T: float = 1.0
    Q: int = 8

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise DomainError(f"M and N must be positive but are M={self.M}, N={self.N}")
        if not self.T > 0:
            raise DomainError(f"T must be positive but is {self.T}")
        if self.Q < 1:
            raise DomainError(f"Q must be positive but is {self.Q}")

    @property
    def delay_step(self) -> float:
        return self.T / self.M

    @property
    def doppler_step(self) -> float:
        return 1.0 / (self.N * self.T)

    @property
    def dt(self) -> float:
        """Time sample step ``T / (M * Q)``."""
        return self.T / (self.M * self.Q)

    @property
    def samples_per_period(self) -> int:
        return self.M * self.Q

    @property
    def frame_duration(self) -> float:
        return self.N * self.T

    def tau(self, l: int) -> float:
        return l * self.T / self.M

    def nu(self, k: int) -> float:
        return k / (self.N * self.T)

    def delay_lattice(self) -> torch.Tensor:
        return torch.arange(self.M, dtype=torch.float64) * self.T / self.M

    def doppler_lattice(self) -> torch.Tensor:
        return torch.arange(self.N, dtype=torch.float64) / (self.N * self.T)

    def tau_axis(self, periods: int = 1, start: int = 0) -> torch.Tensor:
        """Delay axis at step ``dt`` covering ``periods`` delay periods from ``start * T``."""
        count = self.samples_per_period * periods
        return (torch.arange(count, dtype=torch.float64) + start * self.samples_per_period) * self.dt

    def nu_axis(self, periods: int = 1, start: int = 0) -> torch.Tensor:
        """Doppler axis with ``N * Q`` points per Doppler period ``1 / T``."""
        per_period = self.N * self.Q
        count = per_period * periods
        return (torch.arange(count, dtype=torch.float64) + start * per_period) / (per_period * self.T)

    def with_size(self, **kwargs) -> "DDGridParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class WindowSpec:
    """Declarative truncation window.

    ``domain`` is the domain the window is realized in; its Fourier dual lives in the other domain.
    ``rect`` and ``periodic_cosine`` are supported on ``[0, span)``, ``rrc_dual`` is centered at the
    origin and truncated to ``[-span/2, span/2]``.
    """

    kind: str
    domain: str = "time"
    span: Optional[float] = None
    orth_period: Optional[float] = None
    rolloff: Optional[float] = None
    period: Optional[float] = None
    tilde_count: Optional[int] = None

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise DomainError(f"window kind must be one of {WINDOW_KINDS} but is {self.kind!r}")
        if self.domain not in WINDOW_DOMAINS:
            raise DomainError(f"window domain must be one of {WINDOW_DOMAINS} but is {self.domain!r}")

        if self.kind == "rect":
            self._require("span")
            self._forbid("orth_period", "rolloff", "period", "tilde_count")
        elif self.kind == "rrc_dual":
            self._require("orth_period", "rolloff")
            self._forbid("period", "tilde_count")
            if not 0.0 <= self.rolloff <= 1.0:
                raise DomainError(f"rolloff must be in [0, 1] but is {self.rolloff}")
            if not self.orth_period > 0:
                raise DomainError(f"orth_period must be positive but is {self.orth_period}")
            if self.span is None:
                object.__setattr__(self, "span", RRC_SPAN_PERIODS * self.orth_period)
        else:
            self._require("period", "tilde_count")
            self._forbid("orth_period", "rolloff")
            if not self.period > 0 or self.tilde_count < 1:
                raise DomainError(f"invalid periodic_cosine period={self.period}, tilde_count={self.tilde_count}")
            span = self.tilde_count * self.period
            if self.span is None:
                object.__setattr__(self, "span", span)
            elif abs(self.span - span) > 1e-9 * span:
                raise DomainError(f"periodic_cosine span {self.span} != tilde_count * period = {span}")

        if not self.span > 0:
            raise DomainError(f"span must be positive but is {self.span}")

    def _require(self, *names):
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise DomainError(f"{self.kind} window requires {', '.join(missing)}")

    def _forbid(self, *names):
        present = [name for name in names if getattr(self, name) is not None]
        if present:
            raise DomainError(f"{self.kind} window does not accept {', '.join(present)}")

    @property
    def dual_domain(self) -> str:
        return "frequency" if self.domain == "time" else "time"


@dataclass(frozen=True)
class ChainConfig:
    grid: DDGridParams
    fw: WindowSpec
    tw: WindowSpec
    cp_length: float = 1.0
    preset: str = "custom"

    def __post_init__(self):
        if self.cp_length < 0:
            raise DomainError(f"cp_length must be non-negative but is {self.cp_length}")
        if self.preset not in PRESETS + ("custom",):
            raise DomainError(f"unknown preset {self.preset!r}")

    def base_kwargs(self, exclude=("preset",)):
        return config_kwargs(self, exclude)


def config_kwargs(config, exclude=()):
    """Shallow field dict of a config dataclass, usable as keyword arguments."""
    return {f.name: getattr(config, f.name) for f in fields(config) if f.name not in exclude}


def config_dict(config):
    return asdict(config)


def preset_windows(preset: str, grid: DDGridParams, beta: float = 0.3):
    """Frequency and time windows of the three reference window cases."""
    if preset == "sinc_sinc":
        fw = WindowSpec(kind="rect", domain="frequency", span=grid.M / grid.T)
        tw = WindowSpec(kind="rect", domain="time", span=grid.N * grid.T)
    elif preset == "rrc_rrc":
        fw = WindowSpec(kind="rrc_dual", domain="time", orth_period=grid.T / grid.M, rolloff=beta)
        tw = WindowSpec(kind="rrc_dual", domain="frequency", orth_period=1.0 / (grid.N * grid.T), rolloff=beta)
    elif preset == "cos_rrc":
        # delay orthogonality needs orth period T/M
        fw = WindowSpec(kind="rrc_dual", domain="time", orth_period=grid.T / grid.M, rolloff=beta)
        tw = WindowSpec(kind="periodic_cosine", domain="time", period=grid.T, tilde_count=grid.N)
    else:
        raise DomainError(f"unknown preset {preset!r}, must be one of {PRESETS}")
    return fw, tw


def preset_chain_config(
    preset: str = "sinc_sinc",
    grid: Optional[DDGridParams] = None,
    beta: float = 0.3,
    cp_length: Optional[float] = None,
) -> ChainConfig:
    grid = grid or DDGridParams()
    fw, tw = preset_windows(preset, grid, beta)
    return ChainConfig(grid=grid, fw=fw, tw=tw, cp_length=grid.T if cp_length is None else cp_length, preset=preset)
