"""Self-referenced reconstruction from a two-output sheared interferogram.

Pipeline: Fourier-transform the difference record along omega, isolate the
sideband near t = +tau, filter, transform back, strip the carrier
exp(i*omega*tau), unwrap.  That yields the shear phase difference

    dphi(omega) = phi(omega) - phi(omega + W),

which integrates to phi(omega) either by the midpoint rule (finite
difference centered between omega and omega+W) or by concatenation
(exact summation on the ladder omega0 + k*W, interpolated between rungs).
The recovered spectrum is the fringe-free sum of both outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    SpectralGrid,
    SpectralMode,
    spectral_to_temporal_array,
    temporal_to_spectral_array,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DataFormatError,
    DegenerateInputError,
    FilterCollisionError,
    LowVisibilityError,
)
from .interferometer import Interferogram, ShearConfig

FILTER_SHAPES = ("super_gaussian", "rectangular")
INTEGRATION_METHODS = ("midpoint_integration", "concatenation")

MIN_SIDEBAND_SNR = 3.0


@dataclass(frozen=True)
class FtsiSettings:
    """Fourier-transform fringe analysis settings.

    filter_center/filter_width are in fs; the filter is re-centered on the
    detected sideband peak inside the search window [center-width,
    center+width].  filter_width is the half width at half maximum of the
    super-Gaussian window exp(-ln2 * ((t-c)/width)^(2*order)), or the half
    width of the rectangular window.  amplitude_floor masks bins whose
    summed-output intensity falls below floor * max before unwrapping.
    """

    filter_center: float
    filter_width: float
    filter_shape: str = "super_gaussian"
    filter_order: int = 6
    amplitude_floor: float = 0.003
    integration_method: str = "midpoint_integration"
    correct_envelope_bias: bool = True

    def __post_init__(self):
        if not 0 < self.filter_width < self.filter_center:
            raise ValueError("need 0 < filter_width < filter_center")
        if self.filter_shape not in FILTER_SHAPES:
            raise ValueError(f"filter_shape must be one of {FILTER_SHAPES}")
        if self.filter_order < 1:
            raise ValueError("filter_order must be >= 1")
        if not 0 < self.amplitude_floor < 1:
            raise ValueError("amplitude_floor must lie in (0, 1)")
        if self.integration_method not in INTEGRATION_METHODS:
            raise ValueError(f"integration_method must be one of {INTEGRATION_METHODS}")

    @classmethod
    def for_delay(cls, tau: float, **overrides) -> "FtsiSettings":
        """Defaults for an expected delay: center tau, width tau/3."""
        if not tau > 0:
            raise ValueError("expected delay must be positive")
        kwargs = {"filter_center": tau, "filter_width": tau / 3.0}
        kwargs.update(overrides)
        return cls(**kwargs)

    def support_half_width(self) -> float:
        """Half width beyond which the window passes less than 1e-3."""
        if self.filter_shape == "rectangular":
            return self.filter_width
        return self.filter_width * (math.log(1000.0) / math.log(2.0)) ** (
            1.0 / (2.0 * self.filter_order)
        )

    def window(self, t: np.ndarray, center: float) -> np.ndarray:
        x = (t - center) / self.filter_width
        if self.filter_shape == "rectangular":
            return (np.abs(x) <= 1.0).astype(float)
        return np.exp(-math.log(2.0) * x ** (2 * self.filter_order))


@dataclass(frozen=True)
class FringeDiagnostics:
    visibility: float
    sideband_snr: float
    sideband_time_fs: float
    valid_mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.valid_mask, dtype=bool)
        mask.flags.writeable = False
        object.__setattr__(self, "valid_mask", mask)


@dataclass(frozen=True)
class DelayCalibration:
    tau_fs: float
    stderr_fs: float
    sideband_snr: float


@dataclass(frozen=True)
class PhaseFit:
    """Polynomial phase coefficients phi_n about the grid center, n >= 1.

    coefficients[n-1] multiplies (omega-omega0)^n / n!; units fs^n.
    Standard errors come from the weighted-least-squares covariance scaled
    by the residual variance.
    """

    coefficients: tuple
    stderrs: tuple

    def coefficient(self, order: int) -> float:
        if not 1 <= order <= len(self.coefficients):
            raise ValueError(f"no coefficient of order {order} in this fit")
        return self.coefficients[order - 1]

    def stderr(self, order: int) -> float:
        if not 1 <= order <= len(self.stderrs):
            raise ValueError(f"no coefficient of order {order} in this fit")
        return self.stderrs[order - 1]


def recover_spectrum(interf: Interferogram) -> np.ndarray:
    """Fringe-free spectral envelope: plus+minus, normalized to unit integral.

    Estimates [S(omega) + S(omega+W)]/2, so the centroid carries a -W/2
    bias relative to S(omega); reconstruct() optionally corrects it.
    """
    total = float(np.sum(interf.plus) + np.sum(interf.minus))
    if total <= 0:
        raise DegenerateInputError("record carries no intensity")
    return (interf.plus + interf.minus) / (total * interf.grid.omega_step)


def coarse_delay_guess(interf: Interferogram) -> float:
    """Dominant positive-time sideband location, for seeding a filter centre.

    Good to about one fringe period; calibrate_delay refines it.
    """
    if float(np.sum(interf.plus) + np.sum(interf.minus)) <= 0.0:
        raise DegenerateInputError("record carries no intensity")
    d = np.asarray(interf.plus, dtype=float) - np.asarray(interf.minus, dtype=float)
    f = np.abs(spectral_to_temporal_array(d, interf.grid))
    t = interf.grid.times
    sel = t > 4.0 * interf.grid.time_step
    if not np.any(sel):
        raise DegenerateInputError("grid too small to locate a sideband")
    i = int(np.flatnonzero(sel)[np.argmax(f[sel])])
    if f[i] <= 0:
        raise LowVisibilityError("record shows no positive-time sideband")
    return float(t[i])


def _isolate_sideband(record: np.ndarray, grid: SpectralGrid, settings: FtsiSettings):
    """Filter the +tau sideband of a real record; return (Z(omega), snr, t_peak)."""
    f = spectral_to_temporal_array(record, grid)
    t = grid.times
    mag = np.abs(f)
    search = np.abs(t - settings.filter_center) <= settings.filter_width
    if not np.any(search):
        raise ConfigError("filter window lies outside the grid's time span")
    i_pk = int(np.flatnonzero(search)[np.argmax(mag[search])])
    t_pk = float(t[i_pk])
    peak = float(mag[i_pk])

    if peak <= 0.0:
        raise LowVisibilityError("record shows no sideband energy in the filter window")
    w = settings.filter_width
    off = (np.abs(t) >= 2.0 * w) & (np.abs(np.abs(t) - abs(t_pk)) >= 2.0 * w)
    floor = float(np.median(mag[off])) if np.any(off) else 0.0
    snr = peak / floor if floor > 0 else math.inf
    if snr < MIN_SIDEBAND_SNR:
        raise LowVisibilityError(
            f"sideband SNR {snr:.2f} below {MIN_SIDEBAND_SNR}: fringes not usable"
        )

    support = settings.support_half_width()
    if t_pk - support <= 0.0:
        raise FilterCollisionError(
            f"filter support [{t_pk - support:.0f}, {t_pk + support:.0f}] fs reaches "
            "into the DC / mirror-sideband region"
        )
    i_edge = int(np.argmin(np.abs(t - (t_pk - w))))
    if mag[i_edge] > 0.5 * peak:
        raise FilterCollisionError(
            "sideband is not isolated: record magnitude at the filter edge exceeds "
            "half the sideband peak"
        )

    z = temporal_to_spectral_array(f * settings.window(t, t_pk), grid)
    return z, snr, t_pk


def _amplitude_mask(interf: Interferogram, settings: FtsiSettings) -> np.ndarray:
    s = interf.plus + interf.minus
    return s >= settings.amplitude_floor * float(np.max(s))


def _bridge(omegas: np.ndarray, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Unwrap over valid bins, linearly bridge masked gaps, extend wings flat."""
    idx = np.flatnonzero(mask)
    unwrapped = np.unwrap(values[idx])
    return np.interp(omegas, omegas[idx], unwrapped)


def extract_phase_difference(
    interf: Interferogram, settings: FtsiSettings, tau: float
) -> tuple[np.ndarray, FringeDiagnostics]:
    """Measure dphi(omega) = phi(omega) - phi(omega+W) from the fringe record.

    tau is the calibrated delay used for carrier removal; the sideband
    filter itself locks onto the detected peak.  Returns dphi on the full
    grid (bridged outside the valid mask) plus diagnostics.
    """
    grid = interf.grid
    if not tau > 0:
        raise ConfigError("tau must be positive")
    if 2.0 * math.pi / tau < 4.0 * grid.omega_step:
        raise ConfigError(
            "fringes not resolvable: fewer than 4 samples per period 2*pi/tau"
        )
    total = float(np.sum(interf.plus) + np.sum(interf.minus))
    if total <= 0:
        raise DegenerateInputError("record carries no intensity")

    mask = _amplitude_mask(interf, settings)
    if int(mask.sum()) < 8:
        raise DegenerateInputError("fewer than 8 bins above the amplitude floor")

    d = np.asarray(interf.plus, dtype=float) - np.asarray(interf.minus, dtype=float)
    z, snr, t_pk = _isolate_sideband(d, grid, settings)
    zc = z * np.exp(-1j * grid.omegas * tau)
    dphi = _bridge(grid.omegas, np.angle(zc), mask)
    # Unwrapping leaves a global 2*pi*k ambiguity in dphi, which the record
    # shares: shifting the pulse by 2*pi/shear in time changes nothing
    # measurable.  Pin the branch so dphi at the grid centre lies in
    # (-pi, pi], selecting the reconstruction nearest t = 0.
    center = dphi[grid.n_points // 2]
    dphi = dphi - 2.0 * math.pi * np.round(center / (2.0 * math.pi))

    s = interf.plus + interf.minus
    vis = float(np.median(2.0 * np.abs(z[mask]) / s[mask]))
    diag = FringeDiagnostics(
        visibility=vis, sideband_snr=float(snr), sideband_time_fs=t_pk, valid_mask=mask
    )
    return dphi, diag


def calibrate_delay(interf: Interferogram, settings: FtsiSettings) -> DelayCalibration:
    """Fit the delay from a zero-shear record's sideband phase slope.

    The sideband phase of a zero-shear interferogram is omega*tau exactly,
    so a weighted straight-line fit over valid bins returns tau and its
    standard error.
    """
    if interf.config.shear != 0.0:
        raise ValueError("delay calibration expects a zero-shear record")
    total = float(np.sum(interf.plus) + np.sum(interf.minus))
    if total <= 0:
        raise DegenerateInputError("record carries no intensity")
    d = np.asarray(interf.plus, dtype=float) - np.asarray(interf.minus, dtype=float)
    try:
        z, snr, _ = _isolate_sideband(d, interf.grid, settings)
    except (LowVisibilityError, FilterCollisionError) as exc:
        raise CalibrationError(f"no resolvable carrier fringes: {exc}") from exc
    mask = _amplitude_mask(interf, settings)
    idx = np.flatnonzero(mask)
    if idx.size < 4:
        raise CalibrationError("too few bins above the amplitude floor")
    theta = np.unwrap(np.angle(z[idx]))
    x = interf.grid.omegas[idx]
    design = np.column_stack([x, np.ones_like(x)])
    coef, err = _weighted_lstsq(design, theta, np.abs(z[idx]) ** 2)
    tau = float(coef[0])
    if tau <= 0:
        raise CalibrationError(f"fitted delay {tau:.1f} fs is not positive")
    return DelayCalibration(tau_fs=tau, stderr_fs=float(err[0]), sideband_snr=float(snr))


def _weighted_lstsq(design: np.ndarray, y: np.ndarray, weights: np.ndarray):
    """WLS solve; returns (coefficients, standard errors).

    Covariance is sigma^2 (X^T W X)^-1 with sigma^2 the weighted residual
    variance, i.e. errors are scaled by the actual scatter of the fit.
    """
    sw = np.sqrt(weights)
    a = design * sw[:, None]
    b = y * sw
    coef, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    dof = len(y) - design.shape[1]
    resid = b - a @ coef
    if dof > 0:
        sigma2 = float(resid @ resid) / dof
        cov = sigma2 * np.linalg.pinv(a.T @ a)
        err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    else:
        err = np.full(design.shape[1], np.nan)
    return coef, err


def integrate_phase(
    dphi: np.ndarray,
    shear: float,
    grid: SpectralGrid,
    method: str = "midpoint_integration",
) -> np.ndarray:
    """Integrate dphi(omega) = phi(omega) - phi(omega+W) to phi(omega).

    midpoint_integration: the finite difference -dphi(omega)/W estimates
    phi' at the midpoint omega + W/2, so phi'(omega) = -dphi(omega - W/2)/W
    (linearly interpolated), integrated by the trapezoid rule.  Exact
    through quadratic phase.

    concatenation: phi on the ladder omega0 + k*W by exact summation of
    -dphi, linearly interpolated between rungs.  Exact at the rungs for
    any phase, preferred when the phase has structure at the shear scale.

    Both anchor phi(omega0) = 0 at the grid center.
    """
    dphi = np.asarray(dphi, dtype=float)
    if dphi.shape != (grid.n_points,):
        raise ValueError("dphi length does not match the grid")
    if shear == 0.0:
        raise ConfigError("shear must be nonzero to integrate the phase difference")
    if method not in INTEGRATION_METHODS:
        raise ValueError(f"integration method must be one of {INTEGRATION_METHODS}")
    omegas = grid.omegas
    omega0 = grid.omega_center

    if method == "midpoint_integration":
        deriv = -np.interp(omegas - 0.5 * shear, omegas, dphi) / shear
        steps = 0.5 * (deriv[1:] + deriv[:-1]) * grid.omega_step
        phase = np.concatenate([[0.0], np.cumsum(steps)])
        return phase - phase[grid.n_points // 2]

    lo = (omegas[0] - omega0) / shear
    hi = (omegas[-1] - omega0) / shear
    k_min = int(math.ceil(min(lo, hi)))
    k_max = int(math.floor(max(lo, hi)))
    ks = np.arange(k_min, k_max + 1)
    nodes = omega0 + ks * shear
    dphi_at = np.interp(nodes, omegas, dphi)
    phi_nodes = np.zeros_like(nodes)
    zero = int(np.flatnonzero(ks == 0)[0])
    for i in range(zero + 1, len(ks)):  # phi(x + W) = phi(x) - dphi(x)
        phi_nodes[i] = phi_nodes[i - 1] - dphi_at[i - 1]
    for i in range(zero - 1, -1, -1):  # phi(x) = phi(x + W) + dphi(x)
        phi_nodes[i] = phi_nodes[i + 1] + dphi_at[i]
    order = np.argsort(nodes)
    return np.interp(omegas, nodes[order], phi_nodes[order])


def fit_phase_polynomial(
    phase: np.ndarray,
    weights: np.ndarray,
    grid: SpectralGrid,
    max_order: int = 3,
    mask: np.ndarray | None = None,
) -> PhaseFit:
    """Weighted polynomial fit of phi about the grid center.

    Basis (omega-omega0)^n / n! for n = 1..max_order; a constant term is
    included in the fit and discarded (global phase is unphysical).
    Weights are typically the recovered spectral intensity.
    """
    phase = np.asarray(phase, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if phase.shape != (grid.n_points,) or weights.shape != (grid.n_points,):
        raise ValueError("phase/weights length does not match the grid")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    use = weights > 0
    if mask is not None:
        use &= np.asarray(mask, dtype=bool)
    if int(use.sum()) < max_order + 2:
        raise ValueError("not enough weighted bins to fit the requested order")
    x = grid.omegas[use] - grid.omega_center
    design = np.column_stack(
        [x**n / math.factorial(n) for n in range(0, max_order + 1)]
    )
    coef, err = _weighted_lstsq(design, phase[use], weights[use])
    return PhaseFit(tuple(float(c) for c in coef[1:]), tuple(float(e) for e in err[1:]))


@dataclass(frozen=True)
class ReconstructionResult:
    """Reconstructed mode plus fit coefficients and diagnostics."""

    grid: SpectralGrid
    amplitude_abs: np.ndarray
    phase_rad: np.ndarray
    valid_mask: np.ndarray
    phase_difference: np.ndarray
    coefficients: PhaseFit
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, dtype in (
            ("amplitude_abs", float),
            ("phase_rad", float),
            ("valid_mask", bool),
            ("phase_difference", float),
        ):
            arr = np.asarray(getattr(self, name), dtype=dtype)
            if arr.shape != (self.grid.n_points,):
                raise ValueError(f"{name} length does not match the grid")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def mode(self) -> SpectralMode:
        return SpectralMode(self.grid, self.amplitude_abs * np.exp(1j * self.phase_rad))


def reconstruct(
    interf: Interferogram, config: ShearConfig, settings: FtsiSettings
) -> ReconstructionResult:
    """Full reconstruction of the complex spectral mode from one record.

    config.delay is taken as the calibrated carrier delay; config.shear as
    the calibrated shear.  The recovered envelope's -W/2 centroid bias is
    corrected by resampling when settings.correct_envelope_bias is set.
    """
    grid = interf.grid
    spectrum = recover_spectrum(interf)
    dphi, diag = extract_phase_difference(interf, settings, config.delay)
    phase = integrate_phase(dphi, config.shear, grid, settings.integration_method)
    fit = fit_phase_polynomial(phase, spectrum, grid, 3, diag.valid_mask)

    envelope = spectrum
    corrected = bool(settings.correct_envelope_bias and config.shear != 0.0)
    if corrected:
        envelope = np.interp(grid.omegas - 0.5 * config.shear, grid.omegas, spectrum)
        envelope = envelope / (float(np.sum(envelope)) * grid.omega_step)
    amplitude = np.sqrt(envelope)

    diagnostics = {
        "visibility": diag.visibility,
        "sideband_snr": diag.sideband_snr,
        "tau_fs_used": float(config.delay),
        "shear_rad_per_fs_used": float(config.shear),
        "sideband_time_fs": diag.sideband_time_fs,
        "envelope_bias_rad_per_fs": -0.5 * config.shear,
        "envelope_bias_corrected": corrected,
    }
    return ReconstructionResult(
        grid=grid,
        amplitude_abs=amplitude,
        phase_rad=phase,
        valid_mask=diag.valid_mask,
        phase_difference=dphi,
        coefficients=fit,
        diagnostics=diagnostics,
    )


# ---- result serialization ---------------------------------------------------

def result_to_dict(result: ReconstructionResult) -> dict:
    fit = result.coefficients
    return {
        "grid": {
            "omega_start": result.grid.omega_start,
            "omega_step": result.grid.omega_step,
            "n_points": result.grid.n_points,
        },
        "omega_rad_per_fs": result.grid.omegas.tolist(),
        "amplitude_abs": result.amplitude_abs.tolist(),
        "phase_rad": result.phase_rad.tolist(),
        "phase_difference": result.phase_difference.tolist(),
        "valid_mask": [bool(v) for v in result.valid_mask],
        "coefficients": {
            "phi1_fs": fit.coefficient(1),
            "phi1_fs_stderr": fit.stderr(1),
            "phi2_fs2": fit.coefficient(2),
            "phi2_fs2_stderr": fit.stderr(2),
            "phi3_fs3": fit.coefficient(3),
            "phi3_fs3_stderr": fit.stderr(3),
        },
        "diagnostics": dict(result.diagnostics),
    }


def result_from_dict(data: dict) -> ReconstructionResult:
    try:
        g = data["grid"]
        grid = SpectralGrid(float(g["omega_start"]), float(g["omega_step"]), int(g["n_points"]))
        amp = np.asarray(data["amplitude_abs"], dtype=float)
        ph = np.asarray(data["phase_rad"], dtype=float)
        mask = np.asarray(data["valid_mask"], dtype=bool)
        co = data["coefficients"]
        fit = PhaseFit(
            (float(co["phi1_fs"]), float(co["phi2_fs2"]), float(co["phi3_fs3"])),
            (
                float(co["phi1_fs_stderr"]),
                float(co["phi2_fs2_stderr"]),
                float(co["phi3_fs3_stderr"]),
            ),
        )
        diagnostics = dict(data["diagnostics"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed reconstruction result: {exc}") from exc
    lengths = {len(amp), len(ph), len(mask), grid.n_points}
    if len(lengths) != 1:
        raise DataFormatError("result arrays have inconsistent lengths")
    dphi = np.asarray(data.get("phase_difference", np.zeros(grid.n_points)), dtype=float)
    if len(dphi) != grid.n_points:
        raise DataFormatError("phase_difference length does not match the grid")
    try:
        return ReconstructionResult(grid, amp, ph, mask, dphi, fit, diagnostics)
    except ValueError as exc:
        raise DataFormatError(str(exc)) from exc


def save_result(result: ReconstructionResult, path) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result_to_dict(result), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_result(path) -> ReconstructionResult:
    import json

    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON ({exc})") from exc
    return result_from_dict(data)
