import pytest
import torch

from ddshaper.core.config import preset_chain_config
from ddshaper.core.errors import DomainError, GridMismatchError, PreconditionError
from ddshaper.core.signal import inner_product, SampledSignal
from ddshaper.dsp.ambiguity import (
    af_lattice_from_zak,
    AmbiguitySurface,
    corollary1_closed_form,
    cross_ambiguity,
    cut_axes,
    DB_FLOOR,
    dd_inner_product,
    extract_cut,
    localized_af_prediction,
    matched_filter_identity,
    pulse_ambiguity,
    theorem1_decomposition,
    theorem3_af,
    zak_product_series,
)
from ddshaper.dsp.basis import BasisId, time_basis_from_atoms, truncated_pulse
from ddshaper.dsp.windows import AtomPair
from ddshaper.dsp.zakcore import zak_transform
from ddshaper.verify.suites import edge_harmonic_bound, smooth_atoms
from tests.utils import ambiguity_brute, random_signal


@pytest.fixture(scope="module")
def signals(small_grid):
    x = random_signal(small_grid, 48, seed=1)
    y = random_signal(small_grid, 40, seed=2, t0=0.25)
    yield x, y


def test_cross_ambiguity_matches_brute_force(small_grid, signals):
    x, y = signals
    tau = [-0.5, 0.0, 0.125, 0.75]
    nu = [-1.3, 0.0, 0.4]
    surface = cross_ambiguity(x, y, tau, nu, chunk_size=3)
    assert surface.values.shape == (4, 3)
    for i, t in enumerate(tau):
        for j, v in enumerate(nu):
            assert complex(surface.values[i, j]) == pytest.approx(ambiguity_brute(x, y, t, v), abs=1e-12)


def test_cross_ambiguity_rejects_mismatched_steps(small_grid, signals):
    x, _ = signals
    y = SampledSignal(0.0, small_grid.dt / 2, x.samples)
    with pytest.raises(DomainError):
        cross_ambiguity(x, y, [0.0], [0.0])


def test_cross_ambiguity_rejects_off_grid_delay(small_grid, signals):
    x, y = signals
    with pytest.raises(GridMismatchError):
        cross_ambiguity(x, y, [small_grid.dt / 3], [0.0])


def test_auto_ambiguity_peaks_at_origin(small_grid, signals):
    x, _ = signals
    surface = cross_ambiguity(x, x, small_grid.tau_axis(start=0) - 0.5, torch.linspace(-1, 1, 21))
    assert surface.peak == pytest.approx(x.energy)
    assert surface.peak_location == pytest.approx((0.0, 0.0), abs=1e-12)


def test_af_lattice_from_zak(small_grid, signals):
    x, y = signals
    Zx, Zy = zak_transform(x, small_grid), zak_transform(y, small_grid)
    for n in (-1, 0, 1):
        for m in (-2, 0, 3):
            expected = complex(cross_ambiguity(x, y, [n * small_grid.T], [m / small_grid.T]).values[0, 0])
            assert af_lattice_from_zak(Zx, Zy, n, m) == pytest.approx(expected, abs=1e-10)
    assert dd_inner_product(Zx, Zy) == pytest.approx(inner_product(x, y), abs=1e-10)


def test_af_lattice_from_zak_rejects_different_grids(small_grid, signals):
    x, y = signals
    Zx = zak_transform(x, small_grid)
    Zy = zak_transform(y, small_grid, Zx.tau_axis + small_grid.delay_step)
    with pytest.raises(GridMismatchError):
        af_lattice_from_zak(Zx, Zy, 0, 0)


def test_zak_product_series_requires_every_lattice_value():
    with pytest.raises(DomainError):
        zak_product_series({(0, 0): 1.0}, 0.0, 0.0, trunc=1)
    assert zak_product_series({(0, 0): 2.0}, 0.3, 0.7, trunc=0) == pytest.approx(2.0)


def test_theorem1_decomposition(small_grid):
    atoms = smooth_atoms(small_grid, seed=5)
    basis = time_basis_from_atoms(BasisId(0, 0), small_grid, atoms, n_range=range(-2, 3))
    for tau, nu in [(0.0, 0.0), (small_grid.delay_step, 0.1), (-0.125, -0.05)]:
        direct = complex(cross_ambiguity(basis, basis, [tau], [nu]).values[0, 0])
        assert theorem1_decomposition(atoms, tau, nu, trunc=2) == pytest.approx(direct, rel=1e-2, abs=1e-9)


def test_theorem1_rejects_impulse_atoms():
    with pytest.raises(DomainError):
        theorem1_decomposition(AtomPair.impulse(), 0.0, 0.0, trunc=1)


def test_localized_af_prediction(small_grid):
    assert localized_af_prediction(small_grid, 2.0, 1j, 0.0, 0.0) == pytest.approx(4.0)
    assert localized_af_prediction(small_grid, 2.0, 1j, small_grid.T, -1 / small_grid.T) == pytest.approx(4.0)
    assert localized_af_prediction(small_grid, 2.0, 1j, small_grid.delay_step, 0.0) == 0.0
    assert localized_af_prediction(small_grid, 2.0, 1j, 0.0, 0.5 / small_grid.T) == 0.0


def test_theorem3_rect_time_window_has_doppler_nulls(grid):
    cfg = preset_chain_config("sinc_sinc", grid)
    peak = abs(theorem3_af(cfg.fw, cfg.tw, grid, 0.0, 0.0))
    assert peak > 0
    for k in range(1, grid.N):
        assert abs(theorem3_af(cfg.fw, cfg.tw, grid, 0.0, k * grid.doppler_step)) <= 1e-9 * peak


def test_corollary1_needs_periodic_windows(small_grid):
    cfg = preset_chain_config("rrc_rrc", small_grid)
    with pytest.raises(PreconditionError):
        corollary1_closed_form(cfg.fw, cfg.tw, small_grid.M, small_grid.N, small_grid, 0.0, 0.0)


def test_corollary1_zero_doppler_nulls(small_grid):
    cfg = preset_chain_config("sinc_sinc", small_grid)
    peak = abs(corollary1_closed_form(cfg.fw, cfg.tw, small_grid.M, small_grid.N, small_grid, 0.0, 0.0))
    tau = small_grid.delay_lattice()[1:]
    values = corollary1_closed_form(cfg.fw, cfg.tw, small_grid.M, small_grid.N, small_grid, tau, torch.zeros(1))
    assert float(values.abs().max()) <= 1e-9 * peak


@pytest.fixture(scope="module")
def rect_pair(grid):
    cfg = preset_chain_config("sinc_sinc", grid)
    plain = truncated_pulse(cfg.fw, cfg.tw, grid, offset=grid.T / 2)
    guarded = truncated_pulse(cfg.fw, cfg.tw, grid, guard=grid.T, offset=grid.T / 2)
    yield cfg, plain, guarded


@pytest.mark.parametrize("bins", [0.25, 0.5])
def test_corollary1_off_lattice_doppler_phase(grid, rect_pair, bins):
    cfg, plain, guarded = rect_pair
    nu = bins * grid.doppler_step
    numeric = complex(cross_ambiguity(plain, guarded, [0.0], [nu]).values[0, 0])
    closed = corollary1_closed_form(cfg.fw, cfg.tw, grid.M, grid.N, grid, 0.0, nu)
    assert numeric == pytest.approx(closed, rel=1e-2)


@pytest.mark.parametrize("bins", [0.25, 0.5, 3.5])
def test_corollary1_off_lattice_rows_within_edge_bound(grid, rect_pair, bins):
    cfg, plain, guarded = rect_pair
    tau = grid.tau_axis(periods=1)
    nu = torch.tensor([bins * grid.doppler_step], dtype=torch.float64)
    numeric = cross_ambiguity(plain, guarded, tau, nu).values
    closed = corollary1_closed_form(cfg.fw, cfg.tw, grid.M, grid.N, grid, tau[:, None], nu[None, :])
    peak = plain.energy
    bound = edge_harmonic_bound(grid.M, grid.N, grid.samples_per_period)
    assert float((numeric - closed).abs().max()) <= bound * peak


def test_corollary1_matches_zero_doppler_line(grid, rect_pair):
    cfg, plain, guarded = rect_pair
    tau = grid.tau_axis(periods=1)
    numeric = cross_ambiguity(plain, guarded, tau, [0.0]).values[:, 0]
    closed = corollary1_closed_form(cfg.fw, cfg.tw, grid.M, grid.N, grid, tau, torch.zeros(1))
    assert float((numeric - closed).abs().max()) <= 1e-9 * plain.energy


def test_edge_harmonic_bound_shrinks_with_span():
    assert edge_harmonic_bound(8, 8, 64) == pytest.approx(0.0404, abs=1e-3)
    assert edge_harmonic_bound(8, 16, 64) == pytest.approx(edge_harmonic_bound(8, 8, 64) / 2)


def test_matched_filter_identity(small_grid, signals):
    x, _ = signals
    for first, second in [(BasisId(1, 2), BasisId(3, 0)), (BasisId(0, 0), BasisId(2, 3))]:
        lhs, rhs = matched_filter_identity(x, small_grid, first, second)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_extract_cut(small_grid, signals):
    x, _ = signals
    tau, nu = cut_axes(small_grid, "surface")
    surface = cross_ambiguity(x, x, tau, nu)
    cut = extract_cut(surface, "zero_doppler")
    assert torch.equal(cut.offsets, tau)
    assert float(cut.mag_db.max()) == pytest.approx(0.0)
    assert float(cut.mag_db.min()) >= DB_FLOOR
    assert extract_cut(surface, "zero_delay").values.shape == nu.shape

    with pytest.raises(DomainError):
        extract_cut(surface, "diagonal")
    shifted = AmbiguitySurface(tau_axis=tau, nu_axis=nu + 0.01, values=surface.values)
    with pytest.raises(GridMismatchError):
        extract_cut(shifted, "zero_doppler")


def test_cut_axes(grid):
    tau, nu = cut_axes(grid, "zero_doppler")
    assert len(tau) == grid.M * grid.Q + 1
    assert float(tau[0]) == pytest.approx(-grid.T / 2)
    assert nu.tolist() == [0.0]
    tau, nu = cut_axes(grid, "zero_delay", resolution=2)
    assert tau.tolist() == [0.0]
    assert float(nu[-1]) == pytest.approx(1 / (2 * grid.T))
    with pytest.raises(DomainError):
        cut_axes(grid, "diagonal")


def test_pulse_ambiguity_is_symmetric_for_sinc_sinc(small_grid):
    cfg = preset_chain_config("sinc_sinc", small_grid)
    tau = torch.tensor([-0.25, 0.25], dtype=torch.float64)
    surface = pulse_ambiguity(cfg, tau, [0.0])
    origin = pulse_ambiguity(cfg, [0.0], [0.0])
    assert abs(complex(surface.values[0, 0])) == pytest.approx(abs(complex(surface.values[1, 0])), abs=1e-9)
    assert origin.peak == pytest.approx(small_grid.M * small_grid.N, rel=1e-9)
