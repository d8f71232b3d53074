"""Command-line front end: simulate, reconstruct, analyze, pipeline.

Every command is config-driven and deterministic: the same config (seed
included) produces byte-identical outputs.  Exit codes: 0 success, 2 config
validation, 3 reconstruction quality, 4 file format / I/O.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .analysis import (
    orthogonality_report,
    save_wigner_csv,
    temporal_profile,
    transform_limit_ratio,
    v_phase_slope,
)
from .config import (
    MAX_SEED,
    PRESETS,
    RunConfig,
    build_grid,
    config_to_dict,
    derive_seed,
    ftsi_settings,
    load_config,
    preset,
    require_seed,
    resolved_shear,
    save_config,
    shear_config,
    validate_config,
)
from .core import (
    load_mode,
    mode_overlap,
    save_mode,
    shear_nm_to_omega,
    to_time_domain,
    wigner,
)
from .errors import ConfigError, DataFormatError, ReconstructionError
from .interferometer import (
    ShearConfig,
    detect_counts,
    ideal_interferogram,
    load_interferogram_csv,
    save_interferogram_csv,
)
from .reconstruction import (
    FILTER_SHAPES,
    INTEGRATION_METHODS,
    FtsiSettings,
    calibrate_delay,
    coarse_delay_guess,
    load_result,
    reconstruct,
    save_result,
)
from .synthesis import PulseSpec, synthesize


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _write_json(data: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _ensure_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise DataFormatError(f"cannot create output directory {path}: {exc.strerror}") from None
    return path


def _resolve_run_config(args) -> RunConfig:
    """Merge preset/config file with command-line overrides."""
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("a run needs --config PATH or --preset NAME")

    det = cfg.interferometer
    if args.seed is not None:
        if not 0 <= args.seed <= MAX_SEED:
            raise ConfigError("--seed must fit in 64 bits")
        det = replace(det, seed=args.seed)
    if getattr(args, "noiseless", False):
        det = replace(det, noiseless=True)
    outputs = cfg.outputs
    if args.out:
        outputs = replace(outputs, directory=args.out)
    cfg = replace(cfg, interferometer=det, outputs=outputs)
    validate_config(cfg)
    if args.trials < 1:
        raise ConfigError("--trials must be at least 1")
    if cfg.compensate_phi2 and cfg.pulse.phase_kind != "polynomial":
        raise ConfigError("compensate_phi2 requires a polynomial pulse")
    return cfg


def _trial_dir(outdir: str, trial: int, trials: int) -> str:
    if trials == 1:
        return outdir
    return _ensure_dir(os.path.join(outdir, f"trial_{trial:03d}"))


def _detect(cfg: RunConfig, ideal, purpose: str, trial: int):
    det = cfg.interferometer
    if det.noiseless:
        return ideal
    return detect_counts(ideal, det.total_counts, derive_seed(det.seed, purpose, trial))


# ---- simulate ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = _resolve_run_config(args)
    require_seed(cfg)
    outdir = _ensure_dir(cfg.outputs.directory)

    grid = build_grid(cfg)
    mode = synthesize(cfg.pulse, grid)
    ideal = ideal_interferogram(mode, shear_config(cfg))

    save_mode(mode, os.path.join(outdir, "truth_mode.json"))
    save_config(cfg, os.path.join(outdir, "config_echo.json"))
    for trial in range(args.trials):
        rec = _detect(cfg, ideal, "counts", trial)
        tdir = _trial_dir(outdir, trial, args.trials)
        save_interferogram_csv(rec, os.path.join(tdir, "interferogram.csv"))
    _say(args, f"wrote interferogram.csv, truth_mode.json, config_echo.json under {outdir}")
    return 0


# ---- reconstruct -------------------------------------------------------------

def _settings_overrides(args, base: dict) -> dict:
    over = dict(base)
    for key in (
        "filter_center",
        "filter_width",
        "filter_order",
        "filter_shape",
        "amplitude_floor",
        "integration_method",
    ):
        val = getattr(args, key, None)
        if val is not None:
            over[key] = val
    if getattr(args, "no_envelope_correction", False):
        over["correct_envelope_bias"] = False
    return over


def cmd_reconstruct(args) -> int:
    if args.trials != 1:
        raise ConfigError("--trials applies to simulate and pipeline")
    base = load_config(args.config) if args.config else None

    shear = None
    if args.shear_nm is not None and args.shear_rad_per_fs is not None:
        raise ConfigError("give one shear unit, not both")
    if args.shear_nm is not None:
        center = base.pulse.center_wavelength if base else args.center_nm
        if center is None:
            raise ConfigError("--shear-nm needs --center-nm (or --config) for conversion")
        shear = shear_nm_to_omega(args.shear_nm, center)
    elif args.shear_rad_per_fs is not None:
        shear = args.shear_rad_per_fs
    elif base is not None:
        shear = resolved_shear(base)
    if shear is None:
        raise ConfigError("shear must come from --shear-nm, --shear-rad-per-fs, or --config")

    tau = args.tau_fs
    if tau is None and base is not None:
        tau = base.interferometer.delay_fs

    overrides = _settings_overrides(args, base.reconstruction if base else {})
    calibration = None
    if args.calibrate_from:
        cal_interf = load_interferogram_csv(args.calibrate_from, ShearConfig(0.0, tau or 1.0))
        guess = tau if tau is not None else coarse_delay_guess(cal_interf)
        cal_settings = FtsiSettings.for_delay(
            guess, **{k: v for k, v in overrides.items() if not k.startswith("filter_")}
        )
        calibration = calibrate_delay(cal_interf, cal_settings)
        tau = calibration.tau_fs
    if tau is None:
        raise ConfigError("delay must come from --tau-fs, --config, or --calibrate-from")

    sc = ShearConfig(shear=shear, delay=tau)
    interf = load_interferogram_csv(args.interferogram, sc)
    try:
        settings = FtsiSettings.for_delay(tau, **overrides)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"reconstruction settings: {exc}") from None

    result = reconstruct(interf, sc, settings)
    if calibration is not None:
        result.diagnostics["tau_calibrated"] = True
        result.diagnostics["tau_calibration_stderr_fs"] = calibration.stderr_fs

    outdir = _ensure_dir(args.out or "out")
    path = os.path.join(outdir, "result.json")
    save_result(result, path)
    fit = result.coefficients
    _say(
        args,
        f"phi2 = {fit.coefficient(2):.4g} +- {fit.stderr(2):.2g} fs^2, "
        f"phi3 = {fit.coefficient(3):.4g} +- {fit.stderr(3):.2g} fs^3 -> {path}",
    )
    return 0


# ---- analyze -----------------------------------------------------------------

def _wigner_axes(grid):
    # central half of the time span is alias-free for the direct quadrature
    n = grid.n_points
    t = grid.times[n // 4 : 3 * n // 4 : max(1, n // 256)]
    om = grid.omegas[:: max(1, n // 256)]
    return t, om


def _analysis_report(result, truth=None) -> dict:
    mode = result.mode()
    prof = temporal_profile(mode)
    fit = result.coefficients
    report = {
        "fwhm_fs": prof.fwhm_fs,
        "peak_count": prof.peak_count,
        "peak_times_fs": [float(t) for t in prof.peak_times_fs],
        "transform_limit_ratio": transform_limit_ratio(mode),
        "coefficients": {
            "phi1_fs": fit.coefficient(1),
            "phi2_fs2": fit.coefficient(2),
            "phi3_fs3": fit.coefficient(3),
            "phi1_fs_stderr": fit.stderr(1),
            "phi2_fs2_stderr": fit.stderr(2),
            "phi3_fs3_stderr": fit.stderr(3),
        },
        "diagnostics": {k: v for k, v in sorted(result.diagnostics.items())},
    }
    spectrum = result.amplitude_abs**2
    slope, slope_err = v_phase_slope(result.phase_rad, spectrum, result.grid, result.valid_mask)
    report["v_slope_fs"] = slope
    report["v_slope_fs_stderr"] = slope_err
    if truth is not None:
        if truth.grid != result.grid:
            raise DataFormatError("truth mode grid differs from the result grid")
        rep = orthogonality_report(mode, truth)
        report["overlap_with_truth"] = mode_overlap(mode, truth)
        report["spectral_l1_vs_truth"] = rep.spectral_intensity_distance
        report["temporal_l1_vs_truth"] = rep.temporal_intensity_distance
    return report


def cmd_analyze(args) -> int:
    if args.trials != 1:
        raise ConfigError("--trials applies to simulate and pipeline")
    result = load_result(args.result)
    truth = load_mode(args.truth) if args.truth else None
    report = _analysis_report(result, truth)

    outdir = _ensure_dir(args.out or "out")
    files = ["report.json"]
    if args.wigner:
        t_axis, om_axis = _wigner_axes(result.grid)
        save_wigner_csv(wigner(result.mode(), t_axis, om_axis), os.path.join(outdir, "wigner.csv"))
        files.append("wigner.csv")
    _write_json(report, os.path.join(outdir, "report.json"))
    overlap = report.get("overlap_with_truth")
    tail = f", overlap {overlap:.4f}" if overlap is not None else ""
    _say(args, f"fwhm {report['fwhm_fs']:.1f} fs, {report['peak_count']} peak(s){tail} -> {outdir}")
    return 0


# ---- pipeline ----------------------------------------------------------------

def _compensated_pulse(pulse: PulseSpec, fitted_phi2: float) -> PulseSpec:
    coeffs = list(pulse.poly_coeffs) + [0.0] * (2 - len(pulse.poly_coeffs))
    coeffs[1] = coeffs[1] - fitted_phi2
    return replace(pulse, poly_coeffs=tuple(coeffs))


def _run_single(cfg: RunConfig, outdir: str, trial: int, trials: int):
    """One simulate+reconstruct pass; compensated runs do it twice."""
    grid = build_grid(cfg)
    mode = synthesize(cfg.pulse, grid)
    sc = shear_config(cfg)
    settings = ftsi_settings(cfg)
    stage1_phi2 = None

    if cfg.compensate_phi2:
        ideal1 = ideal_interferogram(mode, sc)
        rec1 = _detect(cfg, ideal1, "counts", trial)
        stage1 = reconstruct(rec1, sc, settings)
        stage1_phi2 = stage1.coefficients.coefficient(2)
        if trial == 0:
            sdir = _ensure_dir(os.path.join(outdir, "stage1"))
            save_interferogram_csv(rec1, os.path.join(sdir, "interferogram.csv"))
            save_result(stage1, os.path.join(sdir, "result.json"))
        mode = synthesize(_compensated_pulse(cfg.pulse, stage1_phi2), grid)

    ideal = ideal_interferogram(mode, sc)
    rec = _detect(cfg, ideal, "counts-stage2" if cfg.compensate_phi2 else "counts", trial)
    result = reconstruct(rec, sc, settings)

    tdir = _trial_dir(outdir, trial, trials)
    save_interferogram_csv(rec, os.path.join(tdir, "interferogram.csv"))
    save_result(result, os.path.join(tdir, "result.json"))
    return mode, result, stage1_phi2


def _export_artifacts(cfg: RunConfig, outdir: str, truth, result) -> list:
    files = []
    grid = result.grid
    rec_mode = result.mode()
    if cfg.outputs.spectrum:
        path = os.path.join(outdir, "spectrum.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("omega_rad_per_fs,truth,recovered\n")
            for w, a, b in zip(grid.omegas, truth.intensity(), rec_mode.intensity()):
                fh.write(f"{float(w)!r},{float(a)!r},{float(b)!r}\n")
        files.append("spectrum.csv")
    if cfg.outputs.phase:
        path = os.path.join(outdir, "phase.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("omega_rad_per_fs,truth_rad,recovered_rad,valid\n")
            for w, a, b, v in zip(
                grid.omegas, truth.phase(), result.phase_rad, result.valid_mask
            ):
                fh.write(f"{float(w)!r},{float(a)!r},{float(b)!r},{int(v)}\n")
        files.append("phase.csv")
    if cfg.outputs.temporal:
        path = os.path.join(outdir, "temporal.csv")
        tm_truth = to_time_domain(truth)
        tm_rec = to_time_domain(rec_mode)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("t_fs,truth,recovered\n")
            for t, a, b in zip(grid.times, tm_truth.intensity(), tm_rec.intensity()):
                fh.write(f"{float(t)!r},{float(a)!r},{float(b)!r}\n")
        files.append("temporal.csv")
    if cfg.outputs.wigner:
        t_axis, om_axis = _wigner_axes(grid)
        save_wigner_csv(wigner(rec_mode, t_axis, om_axis), os.path.join(outdir, "wigner.csv"))
        files.append("wigner.csv")
    return files


def _run_pipeline(cfg: RunConfig, trials: int):
    outdir = _ensure_dir(cfg.outputs.directory)
    save_config(cfg, os.path.join(outdir, "config_echo.json"))

    results, stage1_values = [], []
    truth = None
    for trial in range(trials):
        mode, result, stage1_phi2 = _run_single(cfg, outdir, trial, trials)
        if trial == 0:
            truth = mode
            save_mode(mode, os.path.join(outdir, "truth_mode.json"))
        results.append(result)
        if stage1_phi2 is not None:
            stage1_values.append(stage1_phi2)

    first = results[0]
    report = _analysis_report(first, truth)
    summary = dict(report)
    summary["pulse"] = config_to_dict(cfg)["pulse"]
    summary["shear_rad_per_fs"] = resolved_shear(cfg)
    summary["delay_fs"] = cfg.interferometer.delay_fs
    summary["noiseless"] = cfg.interferometer.noiseless
    summary["seed"] = cfg.interferometer.seed
    summary["total_counts"] = cfg.interferometer.total_counts
    if stage1_values:
        summary["stage1_phi2_fs2"] = stage1_values[0]
    if trials > 1:
        p2 = np.array([r.coefficients.coefficient(2) for r in results])
        p3 = np.array([r.coefficients.coefficient(3) for r in results])
        summary["trials"] = {
            "n": trials,
            "phi2_fs2_mean": float(p2.mean()),
            "phi2_fs2_sd": float(p2.std(ddof=1)),
            "phi3_fs3_mean": float(p3.mean()),
            "phi3_fs3_sd": float(p3.std(ddof=1)),
            "phi2_fs2": [float(v) for v in p2],
            "phi3_fs3": [float(v) for v in p3],
        }
        if stage1_values:
            summary["trials"]["stage1_phi2_fs2"] = [float(v) for v in stage1_values]

    files = ["config_echo.json", "truth_mode.json", "interferogram.csv", "result.json"]
    files += _export_artifacts(cfg, outdir, truth, first)
    summary["files"] = sorted(files + ["summary.json"])
    return outdir, summary, first


def cmd_pipeline(args) -> int:
    cfg = _resolve_run_config(args)
    require_seed(cfg)
    outdir, summary, first = _run_pipeline(cfg, args.trials)

    if args.compare:
        other = preset(args.compare)
        other = replace(
            other,
            interferometer=replace(
                other.interferometer,
                seed=cfg.interferometer.seed,
                noiseless=cfg.interferometer.noiseless,
            ),
            outputs=replace(other.outputs, directory=os.path.join(outdir, "compare", args.compare)),
        )
        _, other_summary, other_first = _run_pipeline(other, args.trials)
        if other_first.grid != first.grid:
            raise ConfigError("--compare preset uses an incompatible grid")
        rep = orthogonality_report(first.mode(), other_first.mode())
        summary["compare"] = {
            "preset": args.compare,
            "overlap": rep.overlap,
            "spectral_l1": rep.spectral_intensity_distance,
            "temporal_l1": rep.temporal_intensity_distance,
            "v_slope_fs": other_summary["v_slope_fs"],
        }

    _write_json(summary, os.path.join(outdir, "summary.json"))

    fit = first.coefficients
    rows = [
        ("output", outdir),
        ("phi2_fs2", f"{fit.coefficient(2):.4g} +- {fit.stderr(2):.2g}"),
        ("phi3_fs3", f"{fit.coefficient(3):.4g} +- {fit.stderr(3):.2g}"),
        ("v_slope_fs", f"{summary['v_slope_fs']:.4g} +- {summary['v_slope_fs_stderr']:.2g}"),
        ("fwhm_fs", f"{summary['fwhm_fs']:.1f}"),
        ("peaks", " ".join(f"{t:.0f}" for t in summary["peak_times_fs"]) or "none"),
        ("overlap_with_truth", f"{summary['overlap_with_truth']:.4f}"),
        ("visibility", f"{first.diagnostics['visibility']:.3f}"),
    ]
    if "stage1_phi2_fs2" in summary:
        rows.insert(1, ("stage1_phi2_fs2", f"{summary['stage1_phi2_fs2']:.4g}"))
    if "trials" in summary:
        tr = summary["trials"]
        rows.append(("trials", f"{tr['n']}: phi2 {tr['phi2_fs2_mean']:.4g} sd {tr['phi2_fs2_sd']:.2g}"))
    if "compare" in summary:
        rows.append(("compare_overlap", f"{summary['compare']['overlap']:.4f} vs {args.compare}"))
    for key, value in rows:
        _say(args, f"{key:<20s} {value}")
    return 0


# ---- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shearspec",
        description="Simulate and reconstruct single-photon spectral-shearing interferograms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, presets=False):
        p.add_argument("--config", metavar="PATH", help="run configuration JSON")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, metavar="U64", help="root seed (overrides config)")
        p.add_argument("--trials", type=int, default=1, metavar="N", help="Monte Carlo repetitions")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
        if presets:
            p.add_argument("--preset", choices=sorted(PRESETS), help="shipped scenario")
            p.add_argument("--noiseless", action="store_true", help="skip photon counting")

    p_sim = sub.add_parser("simulate", help="synthesize a pulse and write its interferogram")
    common(p_sim, presets=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("reconstruct", help="recover the complex mode from a CSV record")
    common(p_rec)
    p_rec.add_argument("interferogram", help="interferogram CSV path")
    p_rec.add_argument("--tau-fs", type=float, dest="tau_fs", help="carrier delay in fs")
    p_rec.add_argument("--shear-nm", type=float, dest="shear_nm", help="shear in nm")
    p_rec.add_argument(
        "--shear-rad-per-fs", type=float, dest="shear_rad_per_fs", help="shear in rad/fs"
    )
    p_rec.add_argument(
        "--center-nm", type=float, dest="center_nm", help="carrier wavelength for --shear-nm"
    )
    p_rec.add_argument(
        "--calibrate-from", dest="calibrate_from", metavar="CSV",
        help="zero-shear record; fit tau from its fringe slope",
    )
    p_rec.add_argument("--filter-center", type=float, dest="filter_center", help="fs")
    p_rec.add_argument("--filter-width", type=float, dest="filter_width", help="HWHM, fs")
    p_rec.add_argument("--filter-order", type=int, dest="filter_order")
    p_rec.add_argument("--filter-shape", choices=FILTER_SHAPES, dest="filter_shape")
    p_rec.add_argument("--amplitude-floor", type=float, dest="amplitude_floor")
    p_rec.add_argument(
        "--integration-method", choices=INTEGRATION_METHODS, dest="integration_method"
    )
    p_rec.add_argument(
        "--no-envelope-correction", action="store_true", dest="no_envelope_correction",
        help="keep the -shear/2 envelope centroid bias",
    )
    p_rec.set_defaults(func=cmd_reconstruct)

    p_ana = sub.add_parser("analyze", help="profile a reconstruction result")
    common(p_ana)
    p_ana.add_argument("result", help="result JSON path")
    p_ana.add_argument("--truth", metavar="MODE", help="truth mode JSON for overlap")
    p_ana.add_argument("--wigner", action="store_true", help="also export wigner.csv")
    p_ana.set_defaults(func=cmd_analyze)

    p_pipe = sub.add_parser("pipeline", help="simulate, reconstruct, analyze in one run")
    common(p_pipe, presets=True)
    p_pipe.add_argument(
        "--compare", metavar="PRESET", help="also run PRESET and report the mutual overlap"
    )
    p_pipe.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ReconstructionError as exc:
        print(f"reconstruction error: {exc}", file=sys.stderr)
        return 3
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
