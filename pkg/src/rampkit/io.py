"""CSV interchange used by every pipeline stage.

One fixed schema keeps stages file-compatible: a ``timestamp`` column
(ISO-8601, UTC), ``wind_speed_mps``, ``power_mw`` and any number of
forecast covariates prefixed ``nwp_``. Unknown columns are ignored unless
an explicit schema maps them.
"""

from __future__ import annotations

import csv
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from rampkit.errors import (
    MissingColumnError,
    NonFiniteValueError,
    NonUniformStepError,
    TooShortError,
)
from rampkit.series import FeatureTable, SeriesKind, WindSeries

TIMESTAMP_COLUMN = "timestamp"
SPEED_COLUMN = "wind_speed_mps"
POWER_COLUMN = "power_mw"
NWP_PREFIX = "nwp_"


def _kind_for(name: str) -> SeriesKind:
    if name == SPEED_COLUMN:
        return SeriesKind.SPEED
    if name == POWER_COLUMN:
        return SeriesKind.POWER
    return SeriesKind.NWP


def parse_timestamp(text: str) -> datetime:
    ts = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def load_csv(path: str | Path, schema: dict[str, SeriesKind] | None = None) -> FeatureTable:
    """Read a feature table from ``path``.

    ``schema`` maps column names to series kinds; by default every
    convention column present (speed, power, nwp_*) is loaded. Raises
    :class:`MissingColumnError` for absent schema columns,
    :class:`NonUniformStepError` on timestamp gaps or jitter and
    :class:`NonFiniteValueError` for cells that do not parse to a finite
    number.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if TIMESTAMP_COLUMN not in header:
            raise MissingColumnError(f"{path}: no {TIMESTAMP_COLUMN!r} column")
        if schema is None:
            schema = {
                name: _kind_for(name)
                for name in header
                if name == SPEED_COLUMN or name == POWER_COLUMN or name.startswith(NWP_PREFIX)
            }
        missing = [name for name in schema if name not in header]
        if missing:
            raise MissingColumnError(f"{path}: missing columns {missing}")
        if not schema:
            raise MissingColumnError(f"{path}: no data columns matched the schema")

        times: list[datetime] = []
        data: dict[str, list[float]] = {name: [] for name in schema}
        for row_no, row in enumerate(reader, start=2):
            try:
                times.append(parse_timestamp(row[TIMESTAMP_COLUMN]))
            except (ValueError, TypeError) as exc:
                raise NonUniformStepError(f"{path}:{row_no}: bad timestamp") from exc
            for name in schema:
                cell = row[name]
                try:
                    value = float(cell)
                except (ValueError, TypeError) as exc:
                    raise NonFiniteValueError(
                        f"{path}:{row_no}: column {name!r} cell {cell!r} is not numeric"
                    ) from exc
                if not np.isfinite(value):
                    raise NonFiniteValueError(
                        f"{path}:{row_no}: column {name!r} is not finite"
                    )
                data[name].append(value)

    if len(times) < 2:
        raise TooShortError(f"{path}: need at least 2 rows")
    steps = {(b - a).total_seconds() for a, b in zip(times, times[1:])}
    if len(steps) != 1 or min(steps) <= 0:
        raise NonUniformStepError(f"{path}: timestamps not uniform (steps {sorted(steps)})")
    step = steps.pop()

    columns = {
        name: WindSeries(
            np.array(values),
            start_time=times[0],
            step=step,
            kind=schema[name],
            label=name,
        )
        for name, values in data.items()
    }
    target = POWER_COLUMN if POWER_COLUMN in columns else None
    return FeatureTable(columns=columns, target=target)


def write_csv(table: FeatureTable, path: str | Path) -> None:
    """Write a feature table; floats use shortest exact repr so a
    load/write round trip is value-preserving."""
    path = Path(path)
    names = table.column_names()
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([TIMESTAMP_COLUMN, *names])
        times = next(iter(table.columns.values())).timestamps()
        for i, ts in enumerate(times):
            writer.writerow(
                [format_timestamp(ts), *(repr(float(table[name].values[i])) for name in names)]
            )


def write_series_csv(path: str | Path, named_series: dict[str, WindSeries]) -> None:
    """Write aligned series as one CSV without FeatureTable kind checks."""
    path = Path(path)
    ref = next(iter(named_series.values()))
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([TIMESTAMP_COLUMN, *named_series])
        for i, ts in enumerate(ref.timestamps()):
            writer.writerow(
                [format_timestamp(ts), *(repr(float(s.values[i])) for s in named_series.values())]
            )
