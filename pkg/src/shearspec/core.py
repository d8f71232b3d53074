"""Spectral grids, complex modes, and the transforms connecting them.

Units are rad/fs for angular frequency, fs for time, nm for wavelength
throughout the package.  The Fourier convention is

    psi(t) = (1/sqrt(2*pi)) Int psi~(omega) exp(-i*omega*t) domega,

so a spectral phase factor exp(+i*omega*tau) delays the pulse to later
times and the group delay is +dphi/domega.  Both directions are unitary:
sum |psi~|^2 domega == sum |psi|^2 dt to machine precision.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError

C_NM_PER_FS = 299.792458  # speed of light [nm/fs]


def wavelength_to_omega(wavelength_nm: float) -> float:
    """Angular frequency [rad/fs] of a vacuum wavelength [nm]."""
    if not wavelength_nm > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength_nm}")
    return 2.0 * math.pi * C_NM_PER_FS / wavelength_nm


def shear_nm_to_omega(shear_nm: float, center_nm: float) -> float:
    """Convert a wavelength shear [nm] near center_nm to rad/fs.

    First-order conversion Omega = 2*pi*c*dlambda/lambda0^2.  Sign
    convention: a shift toward shorter wavelength is a positive omega
    shear, so positive shear_nm means the spectrum moves up in omega.
    """
    if not center_nm > 0:
        raise ValueError(f"center wavelength must be positive, got {center_nm}")
    return 2.0 * math.pi * C_NM_PER_FS * shear_nm / center_nm**2


def fwhm_nm_to_omega(fwhm_nm: float, center_nm: float) -> float:
    """Convert an intensity FWHM [nm] at center_nm to rad/fs (first order)."""
    if not fwhm_nm > 0:
        raise ValueError(f"FWHM must be positive, got {fwhm_nm}")
    return shear_nm_to_omega(fwhm_nm, center_nm)


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Uniform angular-frequency grid, half-open interval, power-of-two length."""

    omega_start: float
    omega_step: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.omega_start) and np.isfinite(self.omega_step)):
            raise ValueError("grid parameters must be finite")
        if not self.omega_step > 0:
            raise ValueError(f"omega_step must be positive, got {self.omega_step}")
        n = self.n_points
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"n_points must be a power of two >= 8, got {n}")

    @property
    def span(self) -> float:
        return self.omega_step * self.n_points

    @property
    def omega_center(self) -> float:
        # index n/2 exactly, n is even by construction
        return self.omega_start + self.omega_step * (self.n_points // 2)

    @property
    def omegas(self) -> np.ndarray:
        return self.omega_start + self.omega_step * np.arange(self.n_points)

    @property
    def time_step(self) -> float:
        return 2.0 * math.pi / (self.n_points * self.omega_step)

    @property
    def time_start(self) -> float:
        return -0.5 * self.n_points * self.time_step

    @property
    def times(self) -> np.ndarray:
        return self.time_start + self.time_step * np.arange(self.n_points)

    def __eq__(self, other):
        # same physical grid within a bin-position error of ~1e-5 bins;
        # serialization round trips must compare equal
        if not isinstance(other, SpectralGrid):
            return NotImplemented
        return (
            self.n_points == other.n_points
            and math.isclose(self.omega_start, other.omega_start, rel_tol=1e-9, abs_tol=0)
            and math.isclose(self.omega_step, other.omega_step, rel_tol=1e-9, abs_tol=0)
        )


def make_grid(center: float, span: float, n_points: int) -> SpectralGrid:
    """Grid of n_points covering [center - span/2, center + span/2)."""
    if not span > 0:
        raise ValueError(f"span must be positive, got {span}")
    return SpectralGrid(center - 0.5 * span, span / n_points, n_points)


NORM_TOL = 1e-9


@dataclass(frozen=True)
class SpectralMode:
    """Complex spectral amplitude on a grid, normalized so sum |a|^2 domega = 1."""

    grid: SpectralGrid
    amplitude: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=np.complex128)
        if amp.shape != (self.grid.n_points,):
            raise ValueError(
                f"amplitude length {amp.shape} does not match grid ({self.grid.n_points},)"
            )
        if not np.isfinite(amp).all():
            raise ValueError("amplitude contains non-finite values")
        nrm = float(np.sum(np.abs(amp) ** 2) * self.grid.omega_step)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"mode norm {nrm!r} deviates from 1 by more than {NORM_TOL}")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitude", amp)

    def intensity(self) -> np.ndarray:
        """Spectral intensity |psi~(omega)|^2."""
        return np.abs(self.amplitude) ** 2

    def phase(self) -> np.ndarray:
        """Wrapped spectral phase Arg psi~(omega)."""
        return np.angle(self.amplitude)


@dataclass(frozen=True)
class TemporalMode:
    """Complex temporal amplitude on the dual grid of a SpectralGrid."""

    time_start: float
    time_step: float
    amplitude: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=np.complex128)
        if amp.ndim != 1:
            raise ValueError("temporal amplitude must be one-dimensional")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitude", amp)

    @property
    def times(self) -> np.ndarray:
        return self.time_start + self.time_step * np.arange(len(self.amplitude))

    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2


def normalize(grid: SpectralGrid, values: np.ndarray, anchor: bool = True) -> SpectralMode:
    """Build a unit-norm SpectralMode from raw complex samples.

    With anchor=True the global phase is rotated so Arg psi~ = 0 at the
    grid center (or at the amplitude maximum if the center bin is empty).
    """
    vals = np.asarray(values, dtype=np.complex128).copy()
    nrm2 = float(np.sum(np.abs(vals) ** 2) * grid.omega_step)
    if nrm2 <= 0 or not np.isfinite(nrm2):
        raise ValueError("cannot normalize a zero or non-finite amplitude")
    vals /= math.sqrt(nrm2)
    if anchor:
        idx = grid.n_points // 2
        if abs(vals[idx]) == 0.0:
            idx = int(np.argmax(np.abs(vals)))
        vals *= np.exp(-1j * np.angle(vals[idx]))
    return SpectralMode(grid, vals)


# ---- transforms ------------------------------------------------------------

def spectral_to_temporal_array(values: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Raw omega -> t transform of one array under the package convention.

    psi(t_k) = (domega/sqrt(2*pi)) sum_j values_j exp(-i*omega_j*t_k) with
    t_k the dual grid of `grid`.  Unitary together with its inverse.
    """
    n = grid.n_points
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)  # exp(-i j domega t0)
    ft = np.fft.fft(np.asarray(values, dtype=np.complex128) * signs)
    phase = np.exp(-1j * grid.omega_start * grid.times)
    return (grid.omega_step / math.sqrt(2.0 * math.pi)) * phase * ft


def temporal_to_spectral_array(values: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Inverse of spectral_to_temporal_array."""
    n = grid.n_points
    pre = np.asarray(values, dtype=np.complex128) * np.exp(
        1j * grid.omega_start * grid.times
    )
    ift = np.fft.ifft(pre) * n
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)  # exp(+i omega_j t0)
    return (grid.time_step / math.sqrt(2.0 * math.pi)) * signs * ift


def to_time_domain(mode: SpectralMode) -> TemporalMode:
    """Transform a spectral mode to its temporal amplitude."""
    arr = spectral_to_temporal_array(mode.amplitude, mode.grid)
    return TemporalMode(mode.grid.time_start, mode.grid.time_step, arr)


def to_spectral_domain(tmode: TemporalMode, grid: SpectralGrid) -> SpectralMode:
    """Transform a temporal mode back onto its originating grid."""
    if len(tmode.amplitude) != grid.n_points:
        raise ValueError("temporal mode length does not match grid")
    if not math.isclose(tmode.time_step, grid.time_step, rel_tol=1e-9):
        raise ValueError("temporal step does not match the dual of the grid")
    if not math.isclose(tmode.time_start, grid.time_start, rel_tol=0, abs_tol=1e-9 * grid.time_step):
        raise ValueError("temporal origin does not match the dual of the grid")
    arr = temporal_to_spectral_array(tmode.amplitude, grid)
    return SpectralMode(grid, arr)


def mode_overlap(a: SpectralMode, b: SpectralMode) -> float:
    """|<a|b>|^2 on a shared grid; 1 for identical modes, 0 for orthogonal."""
    if a.grid != b.grid:
        raise ValueError("modes live on different grids")
    inner = np.sum(np.conj(a.amplitude) * b.amplitude) * a.grid.omega_step
    return min(float(np.abs(inner) ** 2), 1.0)


# ---- chronocyclic Wigner distribution --------------------------------------

def wigner(mode: SpectralMode, t_axis: np.ndarray, omega_axis: np.ndarray) -> "WignerMap":
    """Chronocyclic Wigner distribution on user axes.

    W(t, omega) = (1/2pi) Int psi~*(omega + x/2) psi~(omega - x/2) e^{i x t} dx
    evaluated by direct quadrature at the native grid resolution.  The
    discrete quadrature is periodic in t with period pi/domega, so t_axis
    must stay inside +-pi/(2*domega) to be alias free.
    """
    grid = mode.grid
    t_axis = np.asarray(t_axis, dtype=float)
    omega_axis = np.asarray(omega_axis, dtype=float)
    if t_axis.ndim != 1 or omega_axis.ndim != 1:
        raise ValueError("axes must be one-dimensional")
    omegas = grid.omegas
    if omega_axis.min() < omegas[0] or omega_axis.max() > omegas[-1]:
        raise ValueError("omega_axis extends beyond the mode grid")
    t_lim = 0.5 * math.pi / grid.omega_step
    if np.max(np.abs(t_axis)) > t_lim:
        raise ValueError(f"t_axis must stay within +-{t_lim:.1f} fs for this grid")

    re = np.interp  # complex amplitude interpolated component-wise, 0 outside
    amp = mode.amplitude

    def sample(points):
        return re(points, omegas, amp.real, left=0.0, right=0.0) + 1j * re(
            points, omegas, amp.imag, left=0.0, right=0.0
        )

    half = 0.5 * grid.span
    m_max = grid.n_points - 1
    x = grid.omega_step * np.arange(-m_max, m_max + 1)
    x = x[np.abs(x) <= half]  # offsets with any support overlap
    up = sample(omega_axis[:, None] + x[None, :])
    dn = sample(omega_axis[:, None] - x[None, :])
    kernel = np.exp(2j * np.outer(x, t_axis))
    w = (np.conj(up) * dn) @ kernel  # (n_omega, n_t)
    scale = grid.omega_step / math.pi
    w *= scale
    peak = np.max(np.abs(w))
    if peak > 0:
        resid = np.max(np.abs(w.imag)) / peak
        if resid > 1e-9:
            raise AssertionError(f"Wigner imaginary residue {resid:.2e} exceeds 1e-9")
    return WignerMap(t_axis, omega_axis, np.ascontiguousarray(w.real.T))


@dataclass(frozen=True)
class WignerMap:
    """Real Wigner values, shape (len(t_axis), len(omega_axis))."""

    t_axis: np.ndarray
    omega_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.t_axis), len(self.omega_axis)):
            raise ValueError("Wigner value shape does not match the axes")
        for name in ("t_axis", "omega_axis"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def time_marginal(self) -> np.ndarray:
        """Int W domega, approximates |psi(t)|^2 on t_axis."""
        return np.trapezoid(self.values, self.omega_axis, axis=1)

    def frequency_marginal(self) -> np.ndarray:
        """Int W dt, approximates |psi~(omega)|^2 on omega_axis."""
        return np.trapezoid(self.values, self.t_axis, axis=0)

    def total(self) -> float:
        return float(np.trapezoid(self.time_marginal(), self.t_axis))


# ---- mode serialization -----------------------------------------------------

def mode_to_dict(mode: SpectralMode) -> dict:
    return {
        "grid": {
            "omega_start": mode.grid.omega_start,
            "omega_step": mode.grid.omega_step,
            "n_points": mode.grid.n_points,
        },
        "amplitude_abs": np.abs(mode.amplitude).tolist(),
        "phase_rad": np.angle(mode.amplitude).tolist(),
    }


def mode_from_dict(data: dict) -> SpectralMode:
    try:
        g = data["grid"]
        grid = SpectralGrid(float(g["omega_start"]), float(g["omega_step"]), int(g["n_points"]))
        amp = np.asarray(data["amplitude_abs"], dtype=float)
        ph = np.asarray(data["phase_rad"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed mode record: {exc}") from exc
    if len(amp) != len(ph):
        raise DataFormatError(
            f"amplitude_abs ({len(amp)}) and phase_rad ({len(ph)}) lengths differ"
        )
    if len(amp) != grid.n_points:
        raise DataFormatError(
            f"array length {len(amp)} does not match grid n_points {grid.n_points}"
        )
    return SpectralMode(grid, amp * np.exp(1j * ph))


def save_mode(mode: SpectralMode, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(mode_to_dict(mode), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_mode(path) -> SpectralMode:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON ({exc})") from exc
    try:
        return mode_from_dict(data)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
