"""Analytic test pulses: Gaussian envelope with parametric spectral phase."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    SpectralGrid,
    SpectralMode,
    fwhm_nm_to_omega,
    normalize,
    wavelength_to_omega,
)

PHASE_KINDS = ("polynomial", "v_lambda", "tabulated")

# intensity FWHM = sqrt(8*ln2) * sigma for a Gaussian
_FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class PulseSpec:
    """Parametric description of a test pulse.

    center_wavelength / fwhm_wavelength are in nm (intensity FWHM).
    Exactly one phase parametrization is active:

    - polynomial: poly_coeffs = (phi1 [fs], phi2 [fs^2], phi3 [fs^3], ...),
      phase = sum_n phi_n (omega-omega0)^n / n!
    - v_lambda: phase = v_slope * |omega - omega0|, v_slope in fs;
      positive slope is a V, negative a Lambda
    - tabulated: phase (and optionally amplitude) sampled on table_omega,
      linearly interpolated onto the grid
    """

    center_wavelength: float
    fwhm_wavelength: float
    phase_kind: str = "polynomial"
    poly_coeffs: tuple = (0.0,)
    v_slope: float = 0.0
    table_omega: tuple = field(default=())
    table_phase: tuple = field(default=())
    table_amplitude: tuple = field(default=())

    def __post_init__(self):
        if not self.center_wavelength > 0:
            raise ValueError("center_wavelength must be positive")
        if not self.fwhm_wavelength > 0:
            raise ValueError("fwhm_wavelength must be positive")
        if self.phase_kind not in PHASE_KINDS:
            raise ValueError(f"phase_kind must be one of {PHASE_KINDS}, got {self.phase_kind!r}")
        if self.phase_kind == "tabulated":
            if len(self.table_omega) < 2:
                raise ValueError("tabulated phase needs at least two table points")
            if len(self.table_phase) != len(self.table_omega):
                raise ValueError("table_phase length must match table_omega")
            if self.table_amplitude and len(self.table_amplitude) != len(self.table_omega):
                raise ValueError("table_amplitude length must match table_omega")

    @property
    def omega_center(self) -> float:
        return wavelength_to_omega(self.center_wavelength)

    @property
    def fwhm_omega(self) -> float:
        return fwhm_nm_to_omega(self.fwhm_wavelength, self.center_wavelength)


def synthesize(spec: PulseSpec, grid: SpectralGrid) -> SpectralMode:
    """Build the normalized mode sqrt(S(omega)) * exp(i*phi(omega)) on grid.

    The spectral intensity is Gaussian with the requested intensity FWHM
    unless a tabulated amplitude is supplied.  The grid must span at least
    4x the FWHM around the pulse carrier.
    """
    omega0 = spec.omega_center
    fwhm = spec.fwhm_omega
    omegas = grid.omegas
    if omega0 - 2.0 * fwhm < omegas[0] or omega0 + 2.0 * fwhm > omegas[-1]:
        raise ValueError(
            "grid does not cover the pulse: need at least +-2 FWHM around the carrier"
        )
    detuning = omegas - omega0

    if spec.phase_kind == "tabulated" and spec.table_amplitude:
        amp = np.interp(
            omegas, np.asarray(spec.table_omega), np.asarray(spec.table_amplitude),
            left=0.0, right=0.0,
        )
        if np.any(amp < 0):
            raise ValueError("tabulated amplitude must be non-negative")
    else:
        sigma = fwhm / _FWHM_PER_SIGMA
        amp = np.exp(-(detuning**2) / (4.0 * sigma**2))  # amplitude of Gaussian intensity

    if spec.phase_kind == "polynomial":
        phase = np.zeros_like(detuning)
        for n, coeff in enumerate(spec.poly_coeffs, start=1):
            phase += coeff * detuning**n / math.factorial(n)
    elif spec.phase_kind == "v_lambda":
        phase = spec.v_slope * np.abs(detuning)
    else:
        phase = np.interp(omegas, np.asarray(spec.table_omega), np.asarray(spec.table_phase))

    return normalize(grid, amp * np.exp(1j * phase), anchor=True)


def default_grid(spec: PulseSpec, span_factor: float = 10.0, n_points: int = 4096) -> SpectralGrid:
    """Grid centered on the pulse carrier spanning span_factor x FWHM."""
    if not span_factor >= 4.0:
        raise ValueError("span_factor below 4 cannot contain the pulse")
    from .core import make_grid

    return make_grid(spec.omega_center, span_factor * spec.fwhm_omega, n_points)
