"""Shear/delay optics and the two-output interferogram model.

The two outputs of the interferometer follow

    S+-(omega) = 1/4 { S(omega) + S(omega+W)
                       +- 2 Re[ psi~(omega) psi~*(omega+W) e^{i omega tau} ] }

with W the spectral shear and tau the interferometric delay.  Summing the
outputs cancels the fringes and recovers the spectral envelope; the
difference record carries the fringe term the reconstruction works on.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SpectralGrid,
    SpectralMode,
    spectral_to_temporal_array,
    temporal_to_spectral_array,
)
from .errors import DataFormatError

INTERFEROGRAM_KINDS = ("ideal", "counts")
CSV_HEADER = ["omega_rad_per_fs", "plus", "minus"]


@dataclass(frozen=True)
class ShearConfig:
    """Interferometer settings: shear [rad/fs, signed] and delay [fs]."""

    shear: float
    delay: float

    def __post_init__(self):
        if not (np.isfinite(self.shear) and np.isfinite(self.delay)):
            raise ValueError("shear and delay must be finite")


@dataclass(frozen=True)
class Interferogram:
    """Two-output spectral record, either ideal intensities or Poisson counts."""

    grid: SpectralGrid
    plus: np.ndarray
    minus: np.ndarray
    kind: str
    config: ShearConfig
    total_counts: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in INTERFEROGRAM_KINDS:
            raise ValueError(f"kind must be one of {INTERFEROGRAM_KINDS}, got {self.kind!r}")
        for name in ("plus", "minus"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.n_points,):
                raise ValueError(f"{name} length does not match the grid")
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be non-negative and finite")
            if self.kind == "counts" and np.any(arr != np.round(arr)):
                raise ValueError("counts records must hold integers")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _check_headroom(grid: SpectralGrid, shear: float) -> None:
    limit = 0.25 * grid.span
    if abs(shear) >= limit:
        raise ValueError(
            f"shear {shear:g} rad/fs exceeds the grid headroom (|shear| < {limit:g})"
        )


def apply_shear(mode: SpectralMode, shear: float) -> SpectralMode:
    """Shift the spectrum by +shear in omega: psi~(omega) -> psi~(omega - shear).

    Implemented as multiplication by exp(-i*shear*t) in the time domain,
    which is exact for any shear, on-grid or not.
    """
    _check_headroom(mode.grid, shear)
    if shear == 0.0:
        return mode
    temporal = spectral_to_temporal_array(mode.amplitude, mode.grid)
    temporal *= np.exp(-1j * shear * mode.grid.times)
    return SpectralMode(mode.grid, temporal_to_spectral_array(temporal, mode.grid))


def apply_delay(mode: SpectralMode, delay: float) -> SpectralMode:
    """Multiply by exp(i*omega*delay); moves the pulse to later times by delay."""
    if delay == 0.0:
        return mode
    return SpectralMode(
        mode.grid, mode.amplitude * np.exp(1j * mode.grid.omegas * delay)
    )


def interfere(arm_a: SpectralMode, arm_b: SpectralMode) -> tuple[np.ndarray, np.ndarray]:
    """Two-output interference of a 50:50 split-and-recombine of two arm fields.

    Each arm carries half the input amplitude, so plus + minus integrates
    to the mean single-arm spectrum pair: plus+- = 1/4 |a +- b|^2 per bin.
    """
    if arm_a.grid != arm_b.grid:
        raise ValueError("arm modes live on different grids")
    cross = 2.0 * np.real(arm_a.amplitude * np.conj(arm_b.amplitude))
    base = np.abs(arm_a.amplitude) ** 2 + np.abs(arm_b.amplitude) ** 2
    plus = 0.25 * (base + cross)
    minus = 0.25 * (base - cross)
    # roundoff can leave values at -1e-18 where the outputs null perfectly
    return np.maximum(plus, 0.0), np.maximum(minus, 0.0)


def ideal_interferogram(mode: SpectralMode, config: ShearConfig) -> Interferogram:
    """Noise-free two-output record of `mode` for the given shear and delay.

    The delayed arm is psi~(omega) e^{i omega tau}; the sheared arm samples
    psi~(omega + W) on the grid (apply_shear by -W), reproducing the
    two-output formula in the module docstring term by term.
    """
    _check_headroom(mode.grid, config.shear)
    delayed = apply_delay(mode, config.delay)
    sheared = apply_shear(mode, -config.shear)
    plus, minus = interfere(delayed, sheared)
    return Interferogram(mode.grid, plus, minus, "ideal", config)


def detect_counts(interf: Interferogram, total_counts: int, seed: int) -> Interferogram:
    """Poisson photon-counting realization of an ideal record.

    Each bin of each output draws independently from Poisson with mean
    total_counts * p_i, where p_i is the bin's share of the summed
    two-output intensity; the expected total over both outputs is
    total_counts.  Fixed seed gives a fixed record.
    """
    if interf.kind != "ideal":
        raise ValueError("detect_counts expects an ideal interferogram")
    if total_counts < 0:
        raise ValueError("total_counts must be non-negative")
    if seed is None or seed < 0:
        raise ValueError("a non-negative integer seed is required")
    total = float(np.sum(interf.plus) + np.sum(interf.minus))
    if total <= 0:
        raise ValueError("interferogram carries no intensity to detect")
    rng = np.random.default_rng(seed)
    means = np.concatenate([interf.plus, interf.minus]) * (total_counts / total)
    draws = rng.poisson(means)
    n = interf.grid.n_points
    return Interferogram(
        interf.grid,
        draws[:n].astype(float),
        draws[n:].astype(float),
        "counts",
        interf.config,
        total_counts=int(total_counts),
        seed=int(seed),
    )


# ---- CSV serialization ------------------------------------------------------

def save_interferogram_csv(interf: Interferogram, path) -> None:
    """Write one row per grid point: omega_rad_per_fs,plus,minus."""
    counts = interf.kind == "counts"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for w, p, m in zip(interf.grid.omegas, interf.plus, interf.minus):
            if counts:
                fh.write(f"{float(w)!r},{int(p)},{int(m)}\n")
            else:
                fh.write(f"{float(w)!r},{float(p)!r},{float(m)!r}\n")


def load_interferogram_csv(path, config: ShearConfig) -> Interferogram:
    """Parse an interferogram CSV.  Malformed input reports the line number."""
    omegas, plus, minus = [], [], []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise DataFormatError(
                f"{path}:1: expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataFormatError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                omegas.append(float(row[0]))
                plus.append(float(row[1]))
                minus.append(float(row[2]))
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    n = len(omegas)
    if n < 8 or (n & (n - 1)) != 0:
        raise DataFormatError(f"{path}: row count {n} is not a power of two >= 8")
    omegas = np.asarray(omegas)
    # whole-span estimate keeps the step accurate to ~1e-14 relative, where
    # a single first-difference loses digits to cancellation
    step = (omegas[-1] - omegas[0]) / (n - 1)
    if step <= 0 or np.max(np.abs(np.diff(omegas) - step)) > 1e-9 * abs(step):
        raise DataFormatError(f"{path}: omega column is not uniformly spaced")
    grid = SpectralGrid(float(omegas[0]), float(step), n)
    p = np.asarray(plus)
    m = np.asarray(minus)
    integral = np.all(p == np.round(p)) and np.all(m == np.round(m)) and (p.sum() + m.sum()) > 0
    kind = "counts" if integral else "ideal"
    total = int(p.sum() + m.sum()) if kind == "counts" else None
    try:
        return Interferogram(grid, p, m, kind, config, total_counts=total)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
