import math
from dataclasses import dataclass

import torch

from ddshaper.core.errors import DomainError
from ddshaper.modem.frame import CONSTELLATIONS, DDSymbolFrame, qpsk_decide

# EVM reported for an error-free frame
EVM_FLOOR_DB = -120.0


@dataclass(frozen=True)
class LinkReport:
    evm_db: float
    ser: float
    gain: complex

    def items(self):
        return [("evm_db", self.evm_db), ("ser", self.ser), ("gain_re", self.gain.real), ("gain_im", self.gain.imag)]


def evm_ser_report(Y: DDSymbolFrame, X: DDSymbolFrame, constellation: str = "qpsk") -> LinkReport:
    """Least-squares gain, EVM after gain removal and hard-decision symbol error rate of ``Y`` against ``X``."""
    if Y.values.shape != X.values.shape:
        raise DomainError(f"frames differ in shape: {tuple(Y.values.shape)} and {tuple(X.values.shape)}")
    if constellation not in CONSTELLATIONS:
        raise DomainError(f"unknown constellation {constellation!r}")
    x, y = X.values, Y.values
    power = float(x.abs().square().sum())
    if power == 0:
        raise DomainError("reference frame is all zero")

    gain = complex(torch.sum(y * x.conj())) / power
    if gain == 0:
        equalized = torch.zeros_like(y)
    else:
        equalized = y / gain
    error = float((equalized - x).abs().square().sum())
    evm_db = 10 * math.log10(error / power) if error > 0 else EVM_FLOOR_DB
    evm_db = max(evm_db, EVM_FLOOR_DB)

    errors = (qpsk_decide(equalized) != qpsk_decide(x)).sum()
    return LinkReport(evm_db=evm_db, ser=float(errors) / x.numel(), gain=gain)
