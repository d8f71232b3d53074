"""Derived quantities: temporal profiles, mode comparisons, Wigner export."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SpectralMode, TemporalMode, WignerMap, mode_overlap, normalize, to_time_domain
from .reconstruction import _weighted_lstsq


@dataclass(frozen=True)
class TemporalProfile:
    """Temporal intensity summary of a mode."""

    temporal: TemporalMode
    fwhm_fs: float
    peak_count: int
    peak_times_fs: tuple


def _half_max_width(x: np.ndarray, y: np.ndarray) -> float:
    """Outermost half-maximum crossing distance, linearly interpolated."""
    half = 0.5 * float(np.max(y))
    above = y >= half
    idx = np.flatnonzero(above)
    if idx.size == 0:
        return 0.0
    i0, i1 = int(idx[0]), int(idx[-1])
    left = x[i0]
    if i0 > 0:
        f = (half - y[i0 - 1]) / (y[i0] - y[i0 - 1])
        left = x[i0 - 1] + f * (x[i0] - x[i0 - 1])
    right = x[i1]
    if i1 < len(x) - 1:
        f = (half - y[i1 + 1]) / (y[i1] - y[i1 + 1])
        right = x[i1 + 1] + f * (x[i1] - x[i1 + 1])
    return float(right - left)


def _find_peaks(x: np.ndarray, y: np.ndarray, threshold: float) -> list:
    """Local maxima above threshold * max, parabolically refined."""
    level = threshold * float(np.max(y))
    peaks = []
    for i in range(1, len(y) - 1):
        if y[i] >= level and y[i] > y[i - 1] and y[i] >= y[i + 1]:
            denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
            shift = 0.0
            if denom < 0:
                shift = 0.5 * (y[i - 1] - y[i + 1]) / denom
            peaks.append(float(x[i] + shift * (x[i] - x[i - 1])))
    return peaks


def temporal_profile(mode: SpectralMode, peak_threshold: float = 0.1) -> TemporalProfile:
    """Temporal intensity, its FWHM (outermost half-max crossings), and peaks."""
    if not 0 < peak_threshold < 1:
        raise ValueError("peak_threshold must lie in (0, 1)")
    tmode = to_time_domain(mode)
    intensity = tmode.intensity()
    times = tmode.times
    fwhm = _half_max_width(times, intensity)
    peaks = _find_peaks(times, intensity, peak_threshold)
    return TemporalProfile(tmode, fwhm, len(peaks), tuple(peaks))


def transform_limit_ratio(mode: SpectralMode) -> float:
    """Temporal FWHM relative to the zero-phase (transform-limited) version."""
    flat = normalize(mode.grid, np.abs(mode.amplitude), anchor=False)
    actual = temporal_profile(mode).fwhm_fs
    limit = temporal_profile(flat).fwhm_fs
    if limit <= 0:
        raise ValueError("transform-limited profile has no measurable width")
    return float(actual / limit)


@dataclass(frozen=True)
class OrthogonalityReport:
    """Pairwise mode comparison: overlap and intensity distances."""

    overlap: float
    spectral_intensity_distance: float
    temporal_intensity_distance: float


def orthogonality_report(a: SpectralMode, b: SpectralMode) -> OrthogonalityReport:
    """|<a|b>|^2 plus L1 distances of the normalized intensity profiles.

    Distances lie in [0, 2]; 0 for identical profiles, 2 for disjoint.
    """
    if a.grid != b.grid:
        raise ValueError("modes live on different grids")
    ov = mode_overlap(a, b)
    dw = a.grid.omega_step
    l1_spec = float(np.sum(np.abs(a.intensity() - b.intensity())) * dw)
    ta = to_time_domain(a)
    tb = to_time_domain(b)
    l1_temp = float(np.sum(np.abs(ta.intensity() - tb.intensity())) * ta.time_step)
    return OrthogonalityReport(ov, l1_spec, l1_temp)


def v_phase_slope(
    mode_phase: np.ndarray,
    weights: np.ndarray,
    grid,
    mask: np.ndarray | None = None,
) -> tuple[float, float]:
    """Signed V-slope: WLS coefficient of |omega-omega0| in the basis
    {|x|, x, 1}.  Positive for a V profile, negative for a Lambda.
    Returns (slope_fs, stderr_fs).
    """
    phase = np.asarray(mode_phase, dtype=float)
    weights = np.asarray(weights, dtype=float)
    use = weights > 0
    if mask is not None:
        use &= np.asarray(mask, dtype=bool)
    if int(use.sum()) < 5:
        raise ValueError("not enough weighted bins to fit a V slope")
    x = grid.omegas[use] - grid.omega_center
    design = np.column_stack([np.abs(x), x, np.ones_like(x)])
    coef, err = _weighted_lstsq(design, phase[use], weights[use])
    return float(coef[0]), float(err[0])


def save_wigner_csv(wmap: WignerMap, path) -> None:
    """Long-format CSV: t_fs,omega_rad_per_fs,w_value (one row per cell)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t_fs,omega_rad_per_fs,w_value\n")
        for i, t in enumerate(wmap.t_axis):
            for j, w in enumerate(wmap.omega_axis):
                fh.write(f"{float(t)!r},{float(w)!r},{float(wmap.values[i, j])!r}\n")
