"""Spectral-shearing interferometry: simulation and phase reconstruction."""

from .core import (
    C_NM_PER_FS,
    SpectralGrid,
    SpectralMode,
    TemporalMode,
    WignerMap,
    load_mode,
    make_grid,
    mode_overlap,
    normalize,
    save_mode,
    shear_nm_to_omega,
    to_spectral_domain,
    to_time_domain,
    wavelength_to_omega,
    wigner,
)
from .synthesis import PulseSpec, default_grid, synthesize
from .interferometer import (
    Interferogram,
    ShearConfig,
    apply_delay,
    apply_shear,
    detect_counts,
    ideal_interferogram,
    interfere,
    load_interferogram_csv,
    save_interferogram_csv,
)
from .reconstruction import (
    DelayCalibration,
    FringeDiagnostics,
    FtsiSettings,
    PhaseFit,
    ReconstructionResult,
    calibrate_delay,
    extract_phase_difference,
    fit_phase_polynomial,
    integrate_phase,
    load_result,
    reconstruct,
    recover_spectrum,
    save_result,
)
from .analysis import (
    OrthogonalityReport,
    TemporalProfile,
    orthogonality_report,
    save_wigner_csv,
    temporal_profile,
    transform_limit_ratio,
    v_phase_slope,
)
from .config import (
    PRESETS,
    DetectionSpec,
    GridSpec,
    OutputSpec,
    RunConfig,
    build_grid,
    config_from_dict,
    config_to_dict,
    derive_seed,
    ftsi_settings,
    load_config,
    preset,
    resolved_shear,
    save_config,
    shear_config,
)
from . import errors

__version__ = "0.1.0"
