import math

import pytest
import torch

from ddshaper.core.config import RRC_SPAN_PERIODS, WindowSpec
from ddshaper.core.errors import DomainError
from ddshaper.core.signal import SampledSignal, SpectrumSignal
from ddshaper.dsp.windows import (
    asinc_eval,
    AtomPair,
    dual_support,
    orthogonality_check,
    periodicity_check,
    realize_window,
    spectral_transform,
    window_dual,
    window_energy,
    window_support,
    window_values,
)

DT = 1 / 64


@pytest.fixture(scope="module")
def rrc():
    yield WindowSpec(kind="rrc_dual", domain="time", orth_period=0.25, rolloff=0.3)


@pytest.fixture(scope="module")
def cosine():
    yield WindowSpec(kind="periodic_cosine", domain="time", period=1.0, tilde_count=4)


def test_window_spec_validation():
    with pytest.raises(DomainError):
        WindowSpec(kind="rect", domain="time")
    with pytest.raises(DomainError):
        WindowSpec(kind="rect", domain="time", span=1.0, rolloff=0.3)
    with pytest.raises(DomainError):
        WindowSpec(kind="rrc_dual", domain="time", orth_period=1.0, rolloff=1.5)
    with pytest.raises(DomainError):
        WindowSpec(kind="periodic_cosine", domain="time", period=1.0, tilde_count=4, span=3.0)
    with pytest.raises(DomainError):
        WindowSpec(kind="hann", domain="time", span=1.0)


def test_window_spec_defaults(rrc, cosine):
    assert rrc.span == pytest.approx(RRC_SPAN_PERIODS * 0.25)
    assert cosine.span == pytest.approx(4.0)
    assert rrc.dual_domain == "frequency"
    assert window_support(rrc) == (-rrc.span / 2, rrc.span / 2)
    assert dual_support(rrc) == pytest.approx((-1.3 / 0.5, 1.3 / 0.5))
    assert dual_support(cosine) is None


def test_rect_values():
    spec = WindowSpec(kind="rect", domain="time", span=2.0)
    values = window_values(spec, [-0.5, 0.0, 1.0, 1.999, 2.0, 3.0])
    assert values.real.tolist() == [0.0, 1.0, 1.0, 1.0, 0.0, 0.0]


def test_rrc_is_orthogonal_and_unit_energy(rrc):
    w = realize_window(rrc, DT)
    assert isinstance(w, SampledSignal)
    assert w.energy == pytest.approx(1.0, abs=1e-3)
    assert window_energy(rrc) == 1.0

    report = orthogonality_check(w, rrc.orth_period, tol=1e-2)
    assert report.passed
    assert report.max_offpeak < 1e-2


def test_rect_is_not_orthogonal_at_sub_span_lags():
    w = realize_window(WindowSpec(kind="rect", domain="time", span=1.0), DT)
    report = orthogonality_check(w, 0.25)
    assert not report.passed
    assert report.max_offpeak == pytest.approx(0.75)


def test_cosine_is_periodic_and_rrc_is_not(rrc, cosine):
    assert periodicity_check(realize_window(cosine, DT), cosine.period)
    assert window_energy(cosine) == pytest.approx(realize_window(cosine, DT).energy)
    assert not periodicity_check(realize_window(rrc, DT), 1.0)


def test_periodicity_check_needs_two_periods(cosine):
    with pytest.raises(DomainError):
        periodicity_check(realize_window(cosine, DT), 3.0)


def test_frequency_domain_window_is_spectrum():
    spec = WindowSpec(kind="rect", domain="frequency", span=4.0)
    w = realize_window(spec, 0.25)
    assert isinstance(w, SpectrumSignal)
    assert len(w) == 16


@pytest.mark.parametrize(
    "spec",
    [
        WindowSpec(kind="rect", domain="time", span=4.0),
        WindowSpec(kind="periodic_cosine", domain="time", period=1.0, tilde_count=4),
    ],
)
def test_analytic_dual_matches_rectangle_rule(spec):
    w = realize_window(spec, DT)
    numeric = spectral_transform(w, -3.0, 0.05, 121)
    analytic = window_dual(spec, -3.0, 0.05, 121)
    assert isinstance(analytic, SpectrumSignal)
    assert float((numeric.samples - analytic.samples).abs().max()) <= 2 * DT


def test_rrc_dual_matches_rectangle_rule(rrc):
    numeric = spectral_transform(realize_window(rrc, DT), -4.0, 0.05, 161)
    analytic = window_dual(rrc, -4.0, 0.05, 161)
    assert float((numeric.samples - analytic.samples).abs().max()) <= 5e-2 * math.sqrt(rrc.orth_period)


def test_frequency_window_dual_is_time_signal():
    spec = WindowSpec(kind="rect", domain="frequency", span=2.0)
    dual = window_dual(spec, -1.0, 0.125, 17)
    assert isinstance(dual, SampledSignal)
    assert complex(dual.samples[8]) == pytest.approx(2.0)


def test_asinc_eval():
    assert asinc_eval(0.0, 5) == pytest.approx(5.0)
    assert asinc_eval(1.0, 4) == pytest.approx(-4.0)
    assert asinc_eval(1.0, 5) == pytest.approx(5.0)
    assert asinc_eval(0.3, 4) == pytest.approx(math.sin(1.2 * math.pi) / math.sin(0.3 * math.pi))

    x = torch.tensor([0.0, 0.25, 0.5, 2.0], dtype=torch.float64)
    values = asinc_eval(x, 4)
    assert isinstance(values, torch.Tensor)
    assert values[2] == pytest.approx(0.0, abs=1e-12)
    assert values[3] == pytest.approx(4.0)

    with pytest.raises(DomainError):
        asinc_eval(0.1, 0)


def test_impulse_atoms():
    atoms = AtomPair.impulse()
    assert atoms.origin_values() == (1 + 0j, 1 + 0j)
    assert torch.allclose(atoms.doppler_time_dual([0.0, 0.3]), torch.ones(2, dtype=torch.complex128))
    with pytest.raises(DomainError):
        AtomPair(h_tau=None, H_nu=None)


def test_sampled_atoms():
    h = SampledSignal(0.0, 0.125, torch.ones(8, dtype=torch.complex128))
    H = SpectrumSignal(0.0, 0.125, torch.ones(8, dtype=torch.complex128))
    atoms = AtomPair(h_tau=h, H_nu=H, period=1.0)
    h_nu_0, H_tau_0 = atoms.origin_values()
    assert h_nu_0 == pytest.approx(1.0)
    assert H_tau_0 == pytest.approx(1.0)
    assert complex(atoms.delay_frequency_dual([0.0])[0]) == pytest.approx(1.0)

    with pytest.raises(DomainError):
        AtomPair(h_tau=SampledSignal(0.5, 0.125, torch.ones(8, dtype=torch.complex128)), H_nu=H, period=1.0)
