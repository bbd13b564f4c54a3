"""Segmentation at surviving extrema, ramp factor and ramp-event labeling.

Two classic ramp tests (endpoint difference, window range) sit next to the
ramp factor: amplitude change times mean slope over a between-extrema
period. The factor comes out positive for monotone rises *and* falls, so
direction travels as a separate field derived from the sign of the
endpoint change.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from rampkit.errors import EmptyInputError, TooShortError
from rampkit.poles import ExtremaSet
from rampkit.series import WindSeries


class Direction(str, Enum):
    UP = "up"
    DOWN = "down"
    FLAT = "flat"


class RampDefinition(str, Enum):
    DEF1 = "def1"  # endpoint difference
    DEF2 = "def2"  # window range
    RF = "rf"      # ramp factor


@dataclass(frozen=True)
class RampSegment:
    """A between-extrema period, inclusive on both ends.

    ``period_c`` is the span in seconds (point count times the sampling
    step); ``rho`` is the ramp factor with slopes measured per sample.
    """

    start_idx: int
    end_idx: int
    values: np.ndarray
    delta_w: float
    period_c: float
    rho: float
    direction: Direction

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.end_idx <= self.start_idx:
            raise ValueError("segment must span at least two points")

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class RampEvent:
    segment: RampSegment
    definition: RampDefinition
    threshold_used: float
    fired: bool


def _direction(delta_w: float) -> Direction:
    if delta_w > 0:
        return Direction.UP
    if delta_w < 0:
        return Direction.DOWN
    return Direction.FLAT


def raw_ramp_factor(values: np.ndarray, dt: float = 1.0) -> float:
    """Ramp factor of a value window.

    (delta_w / c) * sum of per-point slopes, with c the point count,
    forward differences over ``dt`` and the final difference repeated so
    there is one slope per point. ``dt`` is in sample steps; the default
    of one slope-unit per sample makes the factor invariant to the
    physical sampling interval.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise TooShortError("ramp factor needs at least 2 points")
    if dt <= 0:
        raise ValueError("dt must be positive")
    slopes = np.diff(v) / dt
    slope_sum = float(slopes.sum() + slopes[-1])
    delta_w = float(v[-1] - v[0])
    return (delta_w / v.size) * slope_sum


def ramp_factor(segment: RampSegment, dt: float = 1.0) -> float:
    """Ramp factor of a segment; see :func:`raw_ramp_factor`."""
    return raw_ramp_factor(segment.values, dt)


def make_segment(series_values: np.ndarray, start: int, end: int, step_s: float) -> RampSegment:
    window = np.asarray(series_values[start:end + 1], dtype=float)
    delta_w = float(window[-1] - window[0])
    return RampSegment(
        start_idx=start,
        end_idx=end,
        values=window,
        delta_w=delta_w,
        period_c=window.size * step_s,
        rho=raw_ramp_factor(window),
        direction=_direction(delta_w),
    )


def segment_by_extrema(series: WindSeries, extrema: ExtremaSet) -> list[RampSegment]:
    """Cut the series at extrema indices into segments sharing endpoints.

    Runs before the first and after the last extremum become boundary
    segments; with no extrema at all the whole series is one segment.
    """
    n = len(series)
    if n < 2:
        raise TooShortError("cannot segment a single-point series")
    cuts = sorted({0, n - 1, *extrema.indices().tolist()})
    segments = []
    for a, b in zip(cuts, cuts[1:]):
        segments.append(make_segment(series.values, a, b, series.step))
    return segments


def ramp_def1(p_start: float, p_end: float, p_val: float) -> bool:
    """Endpoint test: does the first-to-last change exceed the threshold?"""
    if p_val <= 0:
        raise ValueError("p_val must be positive")
    return abs(p_end - p_start) > p_val


def ramp_def2(window, p_val: float) -> bool:
    """Range test: does max minus min over the window exceed the threshold?"""
    if p_val <= 0:
        raise ValueError("p_val must be positive")
    w = np.asarray(window, dtype=float)
    if w.size == 0:
        raise EmptyInputError("window must be non-empty")
    return float(w.max() - w.min()) > p_val


def default_rho_threshold(segments: list[RampSegment], quantile: float = 0.9) -> float:
    """Threshold for the ramp-factor test: a high quantile of |rho|."""
    if not segments:
        raise EmptyInputError("need at least one segment")
    return float(np.quantile(np.abs([s.rho for s in segments]), quantile))


def label_ramps(
    segments: list[RampSegment],
    mode: RampDefinition | str = RampDefinition.RF,
    p_val: float | None = None,
    rho_threshold: float | None = None,
) -> list[RampEvent]:
    """One event per segment under the chosen definition.

    ``def1``/``def2`` need ``p_val``; ``rf`` fires when |rho| exceeds
    ``rho_threshold`` (defaulting to the 90th percentile of |rho| across
    the given segments).
    """
    mode = RampDefinition(mode)
    events = []
    if mode is RampDefinition.RF:
        threshold = rho_threshold if rho_threshold is not None else default_rho_threshold(segments)
        if threshold < 0:
            raise ValueError("rho_threshold must be non-negative")
        for seg in segments:
            events.append(RampEvent(seg, mode, threshold, abs(seg.rho) > threshold))
        return events

    if p_val is None or p_val <= 0:
        raise ValueError(f"{mode.value} labeling needs a positive p_val")
    for seg in segments:
        if mode is RampDefinition.DEF1:
            fired = ramp_def1(float(seg.values[0]), float(seg.values[-1]), p_val)
        else:
            fired = ramp_def2(seg.values, p_val)
        events.append(RampEvent(seg, mode, p_val, fired))
    return events
