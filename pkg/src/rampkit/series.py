"""Canonical series containers, normalization and the turbine power curve.

Everything downstream (decomposition, ramp labeling, matching, forecasting)
consumes :class:`WindSeries` and :class:`FeatureTable`. Values are immutable
after construction; all operations return new objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from enum import Enum

import numpy as np

from rampkit.errors import AlignmentError, EmptyInputError

EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)
DEFAULT_STEP_S = 900.0


class SeriesKind(str, Enum):
    SPEED = "speed"
    POWER = "power"
    NWP = "nwp-feature"


@dataclass(frozen=True)
class WindSeries:
    """Uniformly sampled scalar series (wind speed m/s or power MW).

    ``step`` is the sampling interval in seconds (15 min by default). The
    array is copied and locked on construction so instances can be shared
    freely across threads.
    """

    values: np.ndarray
    start_time: datetime = EPOCH
    step: float = DEFAULT_STEP_S
    kind: SeriesKind = SeriesKind.SPEED
    label: str = ""

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "kind", SeriesKind(self.kind))
        if arr.ndim != 1 or arr.size == 0:
            raise EmptyInputError("series must be a non-empty 1-D array")
        if self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("series contains non-finite values")
        if self.kind in (SeriesKind.SPEED, SeriesKind.POWER) and np.any(arr < 0):
            raise ValueError(f"{self.kind.value} values must be non-negative")
        if self.start_time.tzinfo is None:
            object.__setattr__(
                self, "start_time", self.start_time.replace(tzinfo=timezone.utc)
            )

    def __len__(self) -> int:
        return int(self.values.size)

    def time_at(self, index: int) -> datetime:
        return self.start_time + timedelta(seconds=self.step * index)

    def timestamps(self) -> list[datetime]:
        return [self.time_at(i) for i in range(len(self))]

    def with_values(self, values: np.ndarray, **changes) -> "WindSeries":
        """New series with replaced values, clock preserved unless overridden."""
        return replace(self, values=np.asarray(values, dtype=float), **changes)


@dataclass(frozen=True)
class FeatureTable:
    """Named, clock-aligned columns plus an optional target column name."""

    columns: dict[str, WindSeries]
    target: str | None = None

    def __post_init__(self) -> None:
        if not self.columns:
            raise EmptyInputError("feature table needs at least one column")
        ref = next(iter(self.columns.values()))
        for name, col in self.columns.items():
            if len(col) != len(ref):
                raise AlignmentError(f"column {name!r} length differs")
            if col.start_time != ref.start_time or col.step != ref.step:
                raise AlignmentError(f"column {name!r} is on a different clock")
        if self.target is not None and self.target not in self.columns:
            raise AlignmentError(f"target column {self.target!r} not in table")

    def __len__(self) -> int:
        return len(next(iter(self.columns.values())))

    @property
    def start_time(self) -> datetime:
        return next(iter(self.columns.values())).start_time

    @property
    def step(self) -> float:
        return next(iter(self.columns.values())).step

    def column_names(self) -> list[str]:
        return list(self.columns)

    def __getitem__(self, name: str) -> WindSeries:
        return self.columns[name]


@dataclass(frozen=True)
class PowerCurveSpec:
    """Turbine operating envelope: cut-in, rated and cut-out speeds (m/s)."""

    cut_in: float = 3.5
    rated_speed: float = 10.5
    cut_out: float = 25.0
    rated_power: float = 5.0

    def __post_init__(self) -> None:
        if not (0 < self.cut_in < self.rated_speed < self.cut_out):
            raise ValueError("need 0 < cut_in < rated_speed < cut_out")
        if self.rated_power <= 0:
            raise ValueError("rated_power must be positive")


def min_max_normalize(series: WindSeries, lo: float = 0.0, hi: float = 1.0) -> WindSeries:
    """Rescale values linearly so min maps to ``lo`` and max to ``hi``.

    A flat series (max == min) maps every point to ``lo``; flat segments
    occur in real data so this is defined, not an error.
    """
    x = series.values
    vmin, vmax = float(x.min()), float(x.max())
    if vmax == vmin:
        out = np.full_like(x, lo)
    else:
        out = lo + (x - vmin) / (vmax - vmin) * (hi - lo)
    return series.with_values(out, kind=SeriesKind.NWP, label=series.label)


def normalize_array(x: np.ndarray, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Array-level min-max rescaling with the same flat-input rule."""
    x = np.asarray(x, dtype=float)
    vmin, vmax = float(x.min()), float(x.max())
    if vmax == vmin:
        return np.full_like(x, lo)
    return lo + (x - vmin) / (vmax - vmin) * (hi - lo)


def power_curve(speed, spec: PowerCurveSpec = PowerCurveSpec()):
    """Map wind speed (m/s) to active power (MW) for one turbine.

    Zero below cut-in and at/above cut-out, rated power on
    [rated_speed, cut_out), and the physical cubic law in between:
    rated * (v^3 - v_in^3) / (v_rated^3 - v_in^3).

    Accepts a scalar or an array; returns the matching shape.
    """
    v = np.asarray(speed, dtype=float)
    if np.any(v < 0):
        raise ValueError("wind speed must be non-negative")
    p = np.zeros_like(v)
    rising = (v >= spec.cut_in) & (v < spec.rated_speed)
    flat = (v >= spec.rated_speed) & (v < spec.cut_out)
    v3, in3, rated3 = v**3, spec.cut_in**3, spec.rated_speed**3
    p = np.where(rising, spec.rated_power * (v3 - in3) / (rated3 - in3), p)
    p = np.where(flat, spec.rated_power, p)
    if np.isscalar(speed) or np.ndim(speed) == 0:
        return float(p)
    return p


def power_series(speed: WindSeries, spec: PowerCurveSpec = PowerCurveSpec()) -> WindSeries:
    """Apply the power curve pointwise to a speed series."""
    return speed.with_values(
        power_curve(speed.values, spec), kind=SeriesKind.POWER, label="power_mw"
    )
