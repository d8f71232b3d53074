import math

import numpy as np
import pytest

import shearspec as ss

from conftest import OMEGA0, FWHM_W


def test_pulse_spec_validation():
    with pytest.raises(ValueError):
        ss.PulseSpec(-830.0, 8.0)
    with pytest.raises(ValueError):
        ss.PulseSpec(830.0, 0.0)
    with pytest.raises(ValueError):
        ss.PulseSpec(830.0, 8.0, "sawtooth")
    with pytest.raises(ValueError):
        ss.PulseSpec(830.0, 8.0, "tabulated", table_omega=(1.0,), table_phase=(0.0,))
    with pytest.raises(ValueError):
        ss.PulseSpec(830.0, 8.0, "tabulated", table_omega=(1.0, 2.0), table_phase=(0.0,))


def test_pulse_spec_derived_quantities():
    spec = ss.PulseSpec(830.0, 8.0)
    assert spec.omega_center == pytest.approx(OMEGA0, rel=1e-14)
    assert spec.fwhm_omega == pytest.approx(FWHM_W, rel=1e-14)
    assert spec.fwhm_omega == pytest.approx(0.0218743, rel=1e-5)


def test_gaussian_spectrum_fwhm(grid):
    mode = ss.synthesize(ss.PulseSpec(830.0, 8.0), grid)
    inten = np.abs(mode.amplitude) ** 2
    peak = float(np.max(inten))
    for probe in (OMEGA0 - FWHM_W / 2, OMEGA0 + FWHM_W / 2):
        val = float(np.interp(probe, grid.omegas, inten))
        assert val == pytest.approx(0.5 * peak, rel=1e-3)
    assert np.sum(inten) * grid.omega_step == pytest.approx(1.0, rel=1e-12)


def test_polynomial_phase_applied(grid):
    coeffs = (120.0, 2.0e4, 1.0e5)
    mode = ss.synthesize(ss.PulseSpec(830.0, 8.0, "polynomial", coeffs), grid)
    x = grid.omegas - OMEGA0
    expected = coeffs[0] * x + coeffs[1] * x**2 / 2.0 + coeffs[2] * x**3 / 6.0
    got = np.unwrap(np.angle(mode.amplitude))
    core = np.abs(x) < 2.0 * FWHM_W
    d = got[core] - expected[core]
    d -= d[len(d) // 2]  # anchor constant
    assert np.max(np.abs(d)) < 1e-9


def test_grid_must_cover_pulse():
    tight = ss.make_grid(OMEGA0, 3.0 * FWHM_W, 64)
    with pytest.raises(ValueError):
        ss.synthesize(ss.PulseSpec(830.0, 8.0), tight)


def test_v_pulse_twin_lobes(grid):
    mode = ss.synthesize(ss.PulseSpec(830.0, 8.0, "v_lambda", v_slope=1050.0), grid)
    tm = ss.to_time_domain(mode)
    inten = tm.intensity()
    left = int(np.argmax(np.where(tm.times < 0, inten, 0.0)))
    right = int(np.argmax(np.where(tm.times > 0, inten, 0.0)))
    # lobes sit at the group delays +-v_slope, within one time bin
    assert tm.times[left] == pytest.approx(-1050.0, abs=tm.time_step)
    assert tm.times[right] == pytest.approx(1050.0, abs=tm.time_step)
    assert inten[left] == pytest.approx(inten[right], rel=1e-9)


def test_tabulated_phase_exact_on_linear_table(grid):
    # a linear table interpolates exactly, so the synthesized phase is phi1*x
    table_w = (grid.omegas[0], grid.omegas[-1])
    phi1 = 250.0
    table_p = tuple(phi1 * (w - OMEGA0) for w in table_w)
    mode = ss.synthesize(
        ss.PulseSpec(830.0, 8.0, "tabulated", table_omega=table_w, table_phase=table_p),
        grid,
    )
    x = grid.omegas - OMEGA0
    got = np.unwrap(np.angle(mode.amplitude))
    core = np.abs(x) < 2.0 * FWHM_W
    d = got[core] - phi1 * x[core]
    d -= d[len(d) // 2]
    assert np.max(np.abs(d)) < 1e-9


def test_apply_delay_shifts_centroid(grid):
    mode = ss.synthesize(ss.PulseSpec(830.0, 8.0), grid)
    moved = ss.apply_delay(mode, 300.0)
    ratio = moved.amplitude / mode.amplitude
    assert np.max(np.abs(ratio - np.exp(1j * grid.omegas * 300.0))) < 1e-12

    def centroid(m):
        tm = ss.to_time_domain(m)
        w = tm.intensity()
        return float(np.sum(tm.times * w) / np.sum(w))

    assert centroid(moved) - centroid(mode) == pytest.approx(300.0, abs=1e-6)
    assert np.sum(np.abs(moved.amplitude) ** 2) * grid.omega_step == pytest.approx(1.0, rel=1e-12)


def test_apply_shear_matches_trig_interpolant():
    rng = np.random.default_rng(7)
    g = ss.SpectralGrid(2.0, 4e-3, 128)
    v = rng.normal(size=128) + 1j * rng.normal(size=128)
    mode = ss.normalize(g, v, anchor=False)
    shear = 0.37 * g.omega_step  # deliberately off-grid
    out = ss.apply_shear(mode, -shear)
    tm = ss.to_time_domain(mode)
    direct = (g.time_step / math.sqrt(2.0 * math.pi)) * np.exp(
        1j * np.outer(g.omegas + shear, tm.times)
    ) @ tm.amplitude
    assert np.max(np.abs(out.amplitude - direct)) < 1e-10


def test_apply_shear_headroom_guard(grid, quad_mode):
    with pytest.raises(ValueError):
        ss.apply_shear(quad_mode, 0.3 * grid.span)
    same = ss.apply_shear(quad_mode, 0.0)
    assert np.array_equal(same.amplitude, quad_mode.amplitude)


def test_apply_shear_preserves_norm(grid, quad_mode):
    out = ss.apply_shear(quad_mode, -ss.shear_nm_to_omega(0.58, 830.0))
    assert np.sum(np.abs(out.amplitude) ** 2) * grid.omega_step == pytest.approx(1.0, rel=1e-9)


def test_default_grid():
    spec = ss.PulseSpec(830.0, 8.0)
    g = ss.default_grid(spec)
    assert g.n_points == 4096
    assert g.span == pytest.approx(10.0 * FWHM_W, rel=1e-12)
    # half-open interval: first bin sits at center - span/2 exactly
    assert g.omegas[0] == pytest.approx(OMEGA0 - 5.0 * FWHM_W, rel=1e-12)
    with pytest.raises(ValueError):
        ss.default_grid(spec, span_factor=3.0)
