import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional

import torch
from tqdm import tqdm

from ddshaper.core.config import DDGridParams, preset_chain_config, WindowSpec
from ddshaper.core.errors import DomainError
from ddshaper.core.signal import SampledSignal, SpectrumSignal
from ddshaper.dsp.ambiguity import (
    af_lattice_from_zak,
    corollary1_closed_form,
    cross_ambiguity,
    cut_axes,
    extract_cut,
    pulse_ambiguity,
    theorem1_decomposition,
    theorem3_af,
    zak_product_series,
)
from ddshaper.dsp.basis import BasisId, time_basis_from_atoms, truncated_pulse
from ddshaper.dsp.windows import AtomPair
from ddshaper.dsp.zakcore import dzt, idzt, inverse_zak, quasi_periodicity_check, twisted_shift, zak_transform
from ddshaper.modem.chain import matched_filter_receive, shape_transmit
from ddshaper.modem.channel import apply_paths, PathSet
from ddshaper.modem.frame import qpsk_frame
from ddshaper.modem.metrics import evm_ser_report

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    check_name: str
    size: str
    max_err: float
    tol: float
    passed: bool

    def row(self):
        return [self.check_name, self.size, self.max_err, self.tol, self.passed]


CHECK_COLUMNS = ["check_name", "size", "max_err", "tol", "pass"]


def _size(grid: DDGridParams) -> str:
    return f"{grid.M}x{grid.N}x{grid.Q}"


def _result(name: str, grid: DDGridParams, max_err: float, tol: float) -> CheckResult:
    passed = math.isfinite(max_err) and max_err <= tol
    if not passed:
        logger.warning("check %s failed: %.3e > %.3e", name, max_err, tol)
    return CheckResult(check_name=name, size=_size(grid), max_err=float(max_err), tol=tol, passed=passed)


def _relative(a: torch.Tensor, b: torch.Tensor) -> float:
    scale = float(b.abs().max())
    return float((a - b).abs().max()) / (scale if scale > 0 else 1.0)


def _randn(count: int, generator: torch.Generator) -> torch.Tensor:
    re = torch.randn(count, generator=generator, dtype=torch.float64)
    im = torch.randn(count, generator=generator, dtype=torch.float64)
    return torch.complex(re, im)


def random_signal(grid: DDGridParams, periods: float, seed: int, t0: float = 0.0) -> SampledSignal:
    """Random complex signal of ``periods`` delay periods on the grid's time step."""
    generator = torch.Generator().manual_seed(seed)
    count = round(periods * grid.samples_per_period)
    return SampledSignal(t0=t0, dt=grid.dt, samples=_randn(count, generator))


def smooth_atoms(grid: DDGridParams, seed: int = 0) -> AtomPair:
    """Random atoms built from a few low harmonics under a half-sine taper."""
    generator = torch.Generator().manual_seed(seed)
    T = grid.T

    t = torch.arange(grid.samples_per_period, dtype=torch.float64) * grid.dt
    f = torch.arange(grid.N * grid.Q, dtype=torch.float64) / (grid.N * grid.Q * T)

    def smooth(u: torch.Tensor) -> torch.Tensor:
        coeffs = _randn(3, generator)
        harmonics = torch.stack([torch.ones_like(u), torch.cos(2 * math.pi * u), torch.sin(2 * math.pi * u)])
        return torch.sin(math.pi * u) * (coeffs @ harmonics.to(torch.complex128))

    h_tau = SampledSignal(t0=0.0, dt=grid.dt, samples=smooth(t / T))
    H_nu = SpectrumSignal(f0=0.0, df=1.0 / (grid.N * grid.Q * T), samples=smooth(f * T))
    return AtomPair(h_tau=h_tau, H_nu=H_nu, period=T)


def lemma_checks(grid: DDGridParams) -> List[CheckResult]:
    results = []
    T = grid.T
    MN = grid.M * grid.N

    generator = torch.Generator().manual_seed(0)
    x = _randn(MN, generator)
    Z = dzt(x, grid.M, grid.N)
    energy = float(x.abs().square().sum())
    parseval = abs(float(Z.values.abs().square().sum()) - energy) / energy
    results.append(_result("dzt_round_trip", grid, float((idzt(Z) - x).abs().max()), 1e-12))
    results.append(_result("dzt_parseval", grid, parseval, 1e-12))

    tau_2 = grid.tau_axis(periods=2)
    nu_2 = grid.nu_axis(periods=2)
    nu = grid.nu_axis()
    qp_err, shift_err, inv_err = 0.0, 0.0, 0.0
    for seed in range(10):
        s = random_signal(grid, 2.5, seed)
        image = zak_transform(s, grid, tau_2, nu_2)
        report = quasi_periodicity_check(image)
        scale = float(image.values.abs().max())
        qp_err = max(qp_err, max(report.max_delay_err, report.max_doppler_err) / scale)

        tau0, nu0 = 3 * grid.delay_step, 0.37 / T
        shifted = zak_transform(twisted_shift(s, tau0, nu0), grid)
        tau = shifted.tau_axis
        expected = zak_transform(s, grid, tau - tau0, nu - nu0).values
        expected = torch.polar(torch.ones_like(tau), 2 * math.pi * nu0 * (tau - tau0))[:, None] * expected
        shift_err = max(shift_err, _relative(shifted.values, expected))

        recovered = inverse_zak(zak_transform(s, grid), s.time_axis)
        inv_err = max(inv_err, _relative(recovered.samples, s.samples))

    results.append(_result("quasi_periodicity", grid, qp_err, 1e-9))
    results.append(_result("twisted_shift_commutation", grid, shift_err, 1e-9))
    results.append(_result("inverse_zak_round_trip", grid, inv_err, 1e-9))
    results.extend(lattice_duality_checks(grid))
    return results


def lattice_duality_checks(grid: DDGridParams, trunc: int = 2) -> List[CheckResult]:
    """AF lattice values from Zak products against direct AFs, and the lattice series back to the product."""
    T = grid.T
    x = random_signal(grid, 1.5, seed=11)
    y = random_signal(grid, 1.5, seed=12, t0=0.5 * T)
    Zx, Zy = zak_transform(x, grid), zak_transform(y, grid)

    n = torch.arange(-trunc, trunc + 1, dtype=torch.float64)
    m = torch.arange(-trunc, trunc + 1, dtype=torch.float64)
    direct = cross_ambiguity(x, y, n * T, m / T).values
    from_zak = torch.tensor(
        [[af_lattice_from_zak(Zx, Zy, int(n_i), int(m_i)) for m_i in m] for n_i in n], dtype=torch.complex128
    )
    duality_err = _relative(from_zak, direct)

    P = grid.samples_per_period
    m_full = torch.arange(P, dtype=torch.float64)
    lattice_values = cross_ambiguity(x, y, n * T, m_full / T).values
    lattice = {(int(n_i), m_i): complex(lattice_values[i, m_i]) for i, n_i in enumerate(n) for m_i in range(P)}
    series = zak_product_series(
        lattice, Zx.tau_axis[:, None], Zx.nu_axis[None, :], trunc, period=T, m_range=range(P)
    )
    series_err = _relative(series, Zx.values * Zy.values.conj())
    return [
        _result("af_lattice_from_zak", grid, duality_err, 1e-3),
        _result("zak_product_series", grid, series_err, 1e-6),
    ]


def theorem1_checks(grid: DDGridParams, trunc: int = 2) -> List[CheckResult]:
    atoms = smooth_atoms(grid, seed=3)
    basis = time_basis_from_atoms(BasisId(0, 0), grid, atoms, n_range=range(-trunc, trunc + 1))
    probes_tau = [-grid.delay_step, 0.0, grid.delay_step / 2]
    probes_nu = [-0.5 * grid.doppler_step, 0.0, grid.doppler_step]

    lhs, rhs = [], []
    for tau in probes_tau:
        for nu in probes_nu:
            lhs.append(complex(cross_ambiguity(basis, basis, [tau], [nu]).values[0, 0]))
            rhs.append(theorem1_decomposition(atoms, tau, nu, trunc))
    err = _relative(torch.tensor(rhs), torch.tensor(lhs))
    return [_result("theorem1_decomposition", grid, err, 1e-2)]


def localization_ratio(grid: DDGridParams, points: int = 65) -> float:
    """Ratio of the largest off-lattice zero-delay sidelobe for rect time windows spanning ``NT`` and ``2NT``.

    The sidelobe level is the peak of the energy-normalized cut over ``nu T`` in ``[1/2 - 1/N, 1/2]``,
    one full sidelobe of the shorter span where the aliased-sinc envelope is nearly flat. The
    windows sit half a period ahead of the lattice so no pulse peak falls on a window edge.
    """
    fw = WindowSpec(kind="rect", domain="frequency", span=grid.M / grid.T)
    nu = torch.linspace(0.5 - 1 / grid.N, 0.5, points, dtype=torch.float64) / grid.T
    levels = []
    for count in (grid.N, 2 * grid.N):
        tw = WindowSpec(kind="rect", domain="time", span=count * grid.T)
        pulse = truncated_pulse(fw, tw, grid, offset=grid.T / 2)
        cut = cross_ambiguity(pulse, pulse, [0.0], nu).values[0].abs() / pulse.energy
        levels.append(float(cut.max()))
    return levels[0] / levels[1]


def theorem2_checks(grid: DDGridParams) -> List[CheckResult]:
    ratio = localization_ratio(grid)
    logger.info("localization scaling ratio %.4f", ratio)
    return [_result("localization_scaling", grid, abs(ratio - 2.0), 0.2)]


def theorem3_checks(grid: DDGridParams) -> List[CheckResult]:
    cfg = preset_chain_config("rrc_rrc", grid)
    pulse = truncated_pulse(cfg.fw, cfg.tw, grid)
    offsets = (-1, 0, 1)
    tau = [i * grid.delay_step / 4 for i in offsets]
    nu = [i * grid.doppler_step / 4 for i in offsets]

    direct = cross_ambiguity(pulse, pulse, tau, nu).values
    predicted = torch.tensor([[theorem3_af(cfg.fw, cfg.tw, grid, t, v) for v in nu] for t in tau])
    results = [_result("theorem3_rrc_rrc", grid, _relative(predicted, direct), 1e-2)]

    sinc = preset_chain_config("sinc_sinc", grid)
    peak = abs(theorem3_af(sinc.fw, sinc.tw, grid, 0.0, 0.0))
    nulls = max(abs(theorem3_af(sinc.fw, sinc.tw, grid, 0.0, k * grid.doppler_step)) for k in range(1, grid.N))
    results.append(_result("theorem3_rect_doppler_nulls", grid, nulls / peak, 1e-9))
    return results


def edge_harmonic_bound(m_tilde: int, n_tilde: int, samples_per_period: int) -> float:
    """Largest peak-relative gap between the closed form and a basis built from ``m_tilde`` harmonics.

    Within half a Doppler period of the origin each harmonic missing from the Doppler-shifted
    copy contributes an alternating kernel tail no larger than its first term.
    """
    P = samples_per_period
    p = torch.arange(1, m_tilde + 1, dtype=torch.float64) - 0.5
    tails = 1 / (P * torch.sin(math.pi * p / P))
    return float(2 * tails.sum()) / (m_tilde * n_tilde * math.cos(math.pi / (2 * P)))


def corollary1_checks(grid: DDGridParams) -> List[CheckResult]:
    """Closed form against the rect/rect basis over the delay period and the centered Doppler period."""
    cfg = preset_chain_config("sinc_sinc", grid, cp_length=grid.T)
    half = grid.T / 2
    plain = truncated_pulse(cfg.fw, cfg.tw, grid, offset=half)
    guarded = truncated_pulse(cfg.fw, cfg.tw, grid, guard=grid.T, offset=half)

    tau = grid.tau_axis(periods=1)
    nu = grid.nu_axis(periods=1) - 1 / (2 * grid.T)
    numeric = cross_ambiguity(plain, guarded, tau, nu).values
    closed = corollary1_closed_form(cfg.fw, cfg.tw, grid.M, grid.N, grid, tau[:, None], nu[None, :])
    peak = float(numeric.abs().max())
    err = float((numeric - closed).abs().max()) / peak
    bound = edge_harmonic_bound(grid.M, grid.N, grid.samples_per_period)

    zero = int(torch.argmin(nu.abs()))
    zero_doppler_err = float((numeric[:, zero] - closed[:, zero]).abs().max()) / peak
    null_delay = cross_ambiguity(plain, guarded, grid.delay_lattice()[1:], [0.0]).values.abs().max()
    lattice_nu = torch.arange(1, grid.N, dtype=torch.float64) * grid.doppler_step
    null_doppler = cross_ambiguity(plain, guarded, [0.0], lattice_nu).values.abs().max()
    return [
        _result("corollary1_closed_form", grid, err, bound),
        _result("corollary1_zero_doppler", grid, zero_doppler_err, 1e-9),
        _result("corollary1_nulls", grid, float(max(null_delay, null_doppler)) / peak, 1e-9),
    ]


def _cut_db(cfg, cut: str) -> Dict[str, torch.Tensor]:
    tau, nu = cut_axes(cfg.grid, cut)
    result = extract_cut(pulse_ambiguity(cfg, tau, nu), cut)
    return {"offsets": result.offsets, "mag": result.mag / result.mag.max(), "mag_db": result.mag_db}


def cut_checks(grid: DDGridParams) -> List[CheckResult]:
    """Null depths and the cross-preset comparisons of the zero-Doppler and zero-delay cuts."""
    results = []
    cuts = {}
    null_levels = {"sinc_sinc": (-60.0, -60.0), "rrc_rrc": (-60.0, -60.0), "cos_rrc": (-40.0, -60.0)}
    for preset, (delay_level, doppler_level) in null_levels.items():
        cfg = preset_chain_config(preset, grid)
        cuts[preset] = {cut: _cut_db(cfg, cut) for cut in ("zero_doppler", "zero_delay")}
        for cut, step, level in (
            ("zero_doppler", grid.delay_step, delay_level),
            ("zero_delay", grid.doppler_step, doppler_level),
        ):
            ratio = cuts[preset][cut]["offsets"] / step
            on_lattice = ((ratio - ratio.round()).abs() < 1e-6) & (ratio.round() != 0)
            worst = float(cuts[preset][cut]["mag_db"][on_lattice].max())
            results.append(_result(f"{preset}_{cut}_nulls", grid, worst - level, 0.0))

    tau = cuts["sinc_sinc"]["zero_doppler"]["offsets"] / grid.T
    edge = (tau.abs() >= 0.4) & (tau.abs() <= 0.5)
    sinc_edge = float(cuts["sinc_sinc"]["zero_doppler"]["mag"][edge].max())
    rrc_edge = float(cuts["rrc_rrc"]["zero_doppler"]["mag"][edge].max())
    gap_db = 20 * math.log10(sinc_edge / max(rrc_edge, 1e-300))
    results.append(_result("rrc_edge_suppression", grid, 20.0 - gap_db, 0.0))

    diff = (cuts["cos_rrc"]["zero_delay"]["mag"] - cuts["sinc_sinc"]["zero_delay"]["mag"]).abs().max()
    results.append(_result("cos_sinc_zero_delay_match", grid, float(diff), 5e-2))
    return results


def loopback_checks(grid: DDGridParams) -> List[CheckResult]:
    """Identity-channel loopback of a QPSK frame for the presets whose receiver is exact."""
    results = []
    frame = qpsk_frame(grid, seed=7)
    for preset in ("sinc_sinc", "rrc_rrc"):
        cfg = preset_chain_config(preset, grid)
        received = matched_filter_receive(apply_paths(shape_transmit(frame, cfg), PathSet.identity()), cfg)
        report = evm_ser_report(received, frame)
        results.append(_result(f"{preset}_loopback_ser", grid, report.ser, 0.0))
        results.append(_result(f"{preset}_loopback_evm_db", grid, report.evm_db, -30.0))
    return results


SUITES: Dict[str, Callable[[DDGridParams], List[CheckResult]]] = {
    "lemmas": lemma_checks,
    "theorem1": theorem1_checks,
    "theorem2": theorem2_checks,
    "theorem3": theorem3_checks,
    "corollary1": corollary1_checks,
    "loopback": loopback_checks,
    "cuts": cut_checks,
}

# suites run by "all"; the full-size cut reproduction runs only on request
ALL_SUITES = ("lemmas", "theorem1", "theorem2", "theorem3", "corollary1", "loopback")

DEFAULT_GRIDS = {
    "lemmas": DDGridParams(M=4, N=4, T=1.0, Q=8),
    "theorem1": DDGridParams(M=4, N=4, T=1.0, Q=8),
    "theorem2": DDGridParams(M=8, N=8, T=1.0, Q=8),
    "theorem3": DDGridParams(M=8, N=8, T=1.0, Q=8),
    "corollary1": DDGridParams(M=8, N=8, T=1.0, Q=8),
    "loopback": DDGridParams(M=8, N=8, T=1.0, Q=8),
    "cuts": DDGridParams(M=32, N=32, T=1.0, Q=8),
}


def suite_names(suite: str) -> List[str]:
    if suite == "all":
        return list(ALL_SUITES)
    if suite not in SUITES:
        raise DomainError(f"unknown suite {suite!r}, must be one of {sorted(SUITES) + ['all']}")
    return [suite]


def run_suites(
    suite: str, grid_overrides: Optional[Mapping[str, float]] = None, progress: bool = False
) -> List[CheckResult]:
    """Runs a suite (or ``all``) on each suite's default grid with the ``grid_overrides`` fields replaced."""
    results = []
    for name in tqdm(suite_names(suite), desc="verify", disable=not progress):
        suite_grid = DEFAULT_GRIDS[name].with_size(**(grid_overrides or {}))
        logger.info("running suite %s on %s", name, _size(suite_grid))
        results.extend(SUITES[name](suite_grid))
    return results
