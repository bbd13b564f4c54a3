"""Synthetic wind-farm scenarios with ground-truth ramp annotations.

Stands in for proprietary SCADA/NWP data: a mean-reverting background
speed process plus piecewise-linear ramp injections, converted to power
through the turbine curve, with noisy covariate columns. Fixed seeds give
bit-reproducible tables.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from rampkit.errors import InvalidConfigError
from rampkit.series import (
    DEFAULT_STEP_S,
    EPOCH,
    FeatureTable,
    PowerCurveSpec,
    SeriesKind,
    WindSeries,
    power_curve,
)


@dataclass(frozen=True)
class RampEventSpec:
    """One injected ramp: linear rise/fall to a new level over ``duration`` steps."""

    start: int
    duration: int
    magnitude: float
    direction: str = "up"  # "up" | "down"

    def signed_magnitude(self) -> float:
        return self.magnitude if self.direction == "up" else -self.magnitude


@dataclass(frozen=True)
class ScenarioConfig:
    length: int = 600
    step_s: float = DEFAULT_STEP_S
    base_mean: float = 7.0
    reversion: float = 0.05
    noise_sigma: float = 0.15
    events: tuple[RampEventSpec, ...] = field(default_factory=tuple)

    def validate(self) -> None:
        if self.length <= 0:
            raise InvalidConfigError(f"length must be positive, got {self.length}")
        if self.step_s <= 0:
            raise InvalidConfigError("step_s must be positive")
        if not 0 <= self.reversion <= 1:
            raise InvalidConfigError("reversion must lie in [0, 1]")
        if self.noise_sigma < 0:
            raise InvalidConfigError("noise_sigma must be non-negative")
        for ev in self.events:
            if ev.duration <= 0:
                raise InvalidConfigError(f"event duration must be positive, got {ev.duration}")
            if not 0 <= ev.start < self.length:
                raise InvalidConfigError(f"event start {ev.start} outside scenario")
            if ev.direction not in ("up", "down"):
                raise InvalidConfigError(f"unknown event direction {ev.direction!r}")

    @staticmethod
    def from_json(path: str | Path) -> "ScenarioConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return ScenarioConfig.from_dict(raw)

    @staticmethod
    def from_dict(raw: dict) -> "ScenarioConfig":
        events = tuple(RampEventSpec(**ev) for ev in raw.pop("events", []))
        try:
            return ScenarioConfig(events=events, **raw)
        except TypeError as exc:
            raise InvalidConfigError(f"bad scenario config: {exc}") from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["events"] = [asdict(ev) for ev in self.events]
        return d


def ramp_profile(config: ScenarioConfig) -> np.ndarray:
    """Deterministic sum of the injected ramps (level shifts, linear edges).

    Each event rises linearly from 0 at index ``start`` to its signed
    magnitude at ``start + duration`` and holds that level afterwards.
    """
    profile = np.zeros(config.length)
    t = np.arange(config.length, dtype=float)
    for ev in config.events:
        shape = np.clip(t - ev.start, 0.0, ev.duration) / ev.duration
        profile += ev.signed_magnitude() * shape
    return profile


def event_window(ev: RampEventSpec) -> tuple[int, int]:
    """Index range [start, end] covered by an injected ramp (inclusive)."""
    return ev.start, ev.start + ev.duration


def synth_scenario(
    config: ScenarioConfig,
    seed: int,
    curve: PowerCurveSpec = PowerCurveSpec(),
) -> tuple[FeatureTable, list[RampEventSpec]]:
    """Generate a scenario table and its ground-truth ramp annotations.

    Columns: ``wind_speed_mps``, ``power_mw`` (through the turbine curve),
    ``nwp_speed_70m`` (speed plus forecast noise) and ``nwp_temp_70m`` (a
    temperature proxy anti-correlated with speed). Identical
    (config, seed) pairs produce identical tables.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    n = config.length

    base = np.empty(n)
    base[0] = config.base_mean
    shocks = rng.normal(0.0, config.noise_sigma, size=n)
    for t in range(1, n):
        base[t] = base[t - 1] + config.reversion * (config.base_mean - base[t - 1]) + shocks[t]

    speed = np.clip(base + ramp_profile(config), 0.0, None)
    power = power_curve(speed, curve)

    nwp_speed = np.clip(speed + rng.normal(0.0, 0.4, size=n), 0.0, None)
    nwp_temp = 15.0 - 0.4 * (speed - config.base_mean) + rng.normal(0.0, 0.5, size=n)

    make = lambda vals, kind, label: WindSeries(
        vals, start_time=EPOCH, step=config.step_s, kind=kind, label=label
    )
    table = FeatureTable(
        columns={
            "wind_speed_mps": make(speed, SeriesKind.SPEED, "wind_speed_mps"),
            "power_mw": make(power, SeriesKind.POWER, "power_mw"),
            "nwp_speed_70m": make(nwp_speed, SeriesKind.NWP, "nwp_speed_70m"),
            "nwp_temp_70m": make(nwp_temp, SeriesKind.NWP, "nwp_temp_70m"),
        },
        target="power_mw",
    )
    return table, list(config.events)


def analogue_scenario_pair(
    config: ScenarioConfig,
    seed: int,
    hist_length_factor: int = 3,
    curve: PowerCurveSpec = PowerCurveSpec(),
) -> tuple[FeatureTable, list[RampEventSpec], FeatureTable, list[RampEventSpec]]:
    """A past scenario plus a longer historical one with analogue ramps.

    Every past event reappears in the historical series with the same
    duration, magnitude and direction at spread-out positions, so
    similar-period matching has true analogues to find. Returns
    (past_table, past_events, hist_table, hist_events).
    """
    config.validate()
    past_table, past_events = synth_scenario(config, seed, curve)

    hist_len = config.length * hist_length_factor
    if past_events:
        gap = hist_len // (len(past_events) + 1)
        hist_events = tuple(
            RampEventSpec(
                start=min(hist_len - ev.duration - 1, (i + 1) * gap),
                duration=ev.duration,
                magnitude=ev.magnitude,
                direction=ev.direction,
            )
            for i, ev in enumerate(past_events)
        )
    else:
        hist_events = ()
    hist_config = ScenarioConfig(
        length=hist_len,
        step_s=config.step_s,
        base_mean=config.base_mean,
        reversion=config.reversion,
        noise_sigma=config.noise_sigma,
        events=hist_events,
    )
    hist_table, hist_ev = synth_scenario(hist_config, seed + 10_000, curve)
    return past_table, past_events, hist_table, hist_ev


def events_to_json(events: list[RampEventSpec], step_s: float) -> str:
    payload = [
        {
            **asdict(ev),
            "start_s": ev.start * step_s,
            "end_s": (ev.start + ev.duration) * step_s,
        }
        for ev in events
    ]
    return json.dumps({"events": payload}, indent=2) + "\n"
