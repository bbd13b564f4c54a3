"""Extrema extraction, adaptive pole selection and pole-rate mode screening.

Decomposed wind-speed modes carry dense clusters of tiny-amplitude extrema
("pseudo-poles"). A value-range-scaled window drops extrema whose
amplitude gap to the last survivor is too small; the per-mode survivor
counts then screen out high-frequency modes, and the kept modes are summed
back into a denoised series whose surviving extrema become segment
boundaries for ramp analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from rampkit.errors import (
    AllModesRejectedError,
    TooShortError,
    ZeroBaselineError,
)
from rampkit.series import WindSeries
from rampkit.vmd import (
    DEFAULT_ALPHA,
    DEFAULT_K,
    DEFAULT_MAX_ITER,
    DEFAULT_TAU_DUAL,
    DEFAULT_TOL,
    ModeSet,
    reconstruct,
    vmd_decompose,
)


class ExtremumKind(str, Enum):
    MAX = "max"
    MIN = "min"


@dataclass(frozen=True)
class ExtremumPoint:
    index: int
    value: float
    kind: ExtremumKind


@dataclass(frozen=True)
class ExtremaSet:
    """Ordered extrema of a series; indices strictly increase."""

    points: tuple[ExtremumPoint, ...]
    source_len: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        last = -1
        for p in self.points:
            if not last < p.index < self.source_len:
                raise ValueError("extrema indices must strictly increase within range")
            last = p.index

    def __len__(self) -> int:
        return len(self.points)

    def indices(self) -> np.ndarray:
        return np.array([p.index for p in self.points], dtype=int)

    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points], dtype=float)


@dataclass(frozen=True)
class SelectionParams:
    """Adaptive window coefficient and pole-rate threshold."""

    ell: float = 0.05
    tau_rate: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.ell < 1:
            raise ValueError(f"ell must lie in (0, 1), got {self.ell}")
        if self.tau_rate <= 0:
            raise ValueError(f"tau_rate must be positive, got {self.tau_rate}")


def find_extrema(series: WindSeries) -> ExtremaSet:
    """All strict interior local maxima and minima.

    A flat run bounded by lower (higher) neighbors on both sides counts
    once, at its midpoint index, so plateaus are never double-counted.
    """
    x = series.values
    n = x.size
    if n < 3:
        raise TooShortError(f"need at least 3 points, got {n}")

    # Compress equal-value runs, then compare each interior run to its
    # neighbors; single points are runs of length one.
    runs: list[tuple[int, int, float]] = []
    start = 0
    for i in range(1, n):
        if x[i] != x[start]:
            runs.append((start, i - 1, float(x[start])))
            start = i
    runs.append((start, n - 1, float(x[start])))

    points: list[ExtremumPoint] = []
    for r in range(1, len(runs) - 1):
        lo, hi, v = runs[r]
        prev_v = runs[r - 1][2]
        next_v = runs[r + 1][2]
        mid = (lo + hi) // 2
        if prev_v < v > next_v:
            points.append(ExtremumPoint(mid, v, ExtremumKind.MAX))
        elif prev_v > v < next_v:
            points.append(ExtremumPoint(mid, v, ExtremumKind.MIN))
    return ExtremaSet(points=tuple(points), source_len=n)


def dynamic_window(series: WindSeries, ell: float) -> float:
    """Window width: ell times the full value range of the series."""
    if not 0 < ell < 1:
        raise ValueError(f"ell must lie in (0, 1), got {ell}")
    x = series.values
    return ell * float(x.max() - x.min())


def select_poles(extrema: ExtremaSet, width: float) -> ExtremaSet:
    """Greedy left-to-right survivor scan.

    The first pole always survives; a later pole survives iff its value
    differs from the last survivor by strictly more than ``width``. Output
    is a subsequence of the input, so consecutive survivors always have an
    amplitude gap above the window width.
    """
    if width < 0:
        raise ValueError(f"width must be non-negative, got {width}")
    kept: list[ExtremumPoint] = []
    for p in extrema.points:
        if not kept or abs(p.value - kept[-1].value) > width:
            kept.append(p)
    return ExtremaSet(points=tuple(kept), source_len=extrema.source_len)


def pole_rate(selected_count: int, n_original: int) -> float:
    """Ratio of a mode's surviving poles to the baseline count.

    May exceed 1 for modes with more surviving extrema than the
    reconstructed series itself.
    """
    if n_original == 0:
        raise ZeroBaselineError("baseline pole count is zero")
    if n_original < 0 or selected_count < 0:
        raise ValueError("pole counts must be non-negative")
    return selected_count / n_original


def _selected_pole_count(values: np.ndarray, series_template: WindSeries, ell: float) -> int:
    sub = series_template.with_values(values, kind="nwp-feature")
    extrema = find_extrema(sub)
    width = dynamic_window(sub, ell)
    return len(select_poles(extrema, width))


@dataclass(frozen=True)
class ScreeningResult:
    kept: tuple[int, ...]
    rates: np.ndarray
    recon: WindSeries


def screen_modes(modes: ModeSet, params: SelectionParams = SelectionParams()) -> ScreeningResult:
    """Keep modes whose pole rate is at or below the threshold.

    The baseline is the surviving-pole count of the all-modes sum; each
    mode's rate divides its own surviving-pole count by that baseline.
    When the baseline itself has no surviving poles, pole-free modes rate
    0 and pole-carrying modes rate infinite, so flat inputs screen cleanly
    instead of dividing by zero.
    """
    full = reconstruct(modes, range(modes.K))
    n_baseline = _selected_pole_count(full.values, full, params.ell)

    rates = np.empty(modes.K)
    for k in range(modes.K):
        count = _selected_pole_count(modes.modes[k], full, params.ell)
        if n_baseline > 0:
            rates[k] = pole_rate(count, n_baseline)
        else:
            rates[k] = 0.0 if count == 0 else math.inf

    kept = tuple(k for k in range(modes.K) if rates[k] <= params.tau_rate)
    if not kept:
        raise AllModesRejectedError(
            f"no mode has pole rate <= {params.tau_rate} (rates {np.round(rates, 3)})"
        )
    recon = reconstruct(modes, kept)
    return ScreeningResult(kept=kept, rates=rates, recon=recon)


@dataclass(frozen=True)
class VmdIcResult:
    """Denoised series plus the surviving extrema that seed segmentation."""

    recon: WindSeries
    extrema: ExtremaSet
    modes: ModeSet
    kept: tuple[int, ...]
    rates: np.ndarray
    all_extrema: ExtremaSet
    width: float


def vmd_ic(
    series: WindSeries,
    K: int = DEFAULT_K,
    alpha: float = DEFAULT_ALPHA,
    tau_dual: float = DEFAULT_TAU_DUAL,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    selection: SelectionParams = SelectionParams(),
) -> VmdIcResult:
    """Full denoising pipeline: decompose, screen modes, select poles.

    Returns the reconstructed (denoised) series together with its
    surviving extrema; those extrema are the segmentation skeleton for
    ramp labeling.
    """
    modes = vmd_decompose(
        series, K=K, alpha=alpha, tau_dual=tau_dual, tol=tol, max_iter=max_iter
    )
    screening = screen_modes(modes, selection)
    recon = screening.recon
    if len(recon) >= 3:
        all_extrema = find_extrema(recon)
        width = dynamic_window(recon, selection.ell)
        extrema = select_poles(all_extrema, width)
    else:
        all_extrema = ExtremaSet(points=(), source_len=len(recon))
        extrema = all_extrema
        width = 0.0
    return VmdIcResult(
        recon=recon,
        extrema=extrema,
        modes=modes,
        kept=screening.kept,
        rates=screening.rates,
        all_extrema=all_extrema,
        width=width,
    )
