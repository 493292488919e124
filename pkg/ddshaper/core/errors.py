class DDShaperError(ValueError):
    """Base class of all errors raised by ``ddshaper``."""


class DomainError(DDShaperError):
    """An argument lies outside the domain of an operation (empty signal, wrong shape, bad range)."""


class GridMismatchError(DDShaperError):
    """A delay, step or period is not representable on the sample grid in use."""


class PreconditionError(DDShaperError):
    """A mathematical precondition of an analytic result is violated."""


class FormatError(DDShaperError):
    """A file does not follow the expected waveform, frame or path format."""


class ConfigError(DDShaperError):
    """Invalid configuration value (CLI flags, config files, environment)."""
