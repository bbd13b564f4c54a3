"""Multimodal feature assembly and pluggable baseline predictors.

Each training row sits at a forecast origin t and predicts power at
t + horizon. Features mix the matched historical analogue (power and
speed read at the analogue position corresponding to the target time),
the enclosing segment's similarity coefficient and ramp factor, the
ramp-event flag, forecast covariates taken at the target time (they are
forecasts, so they are available ahead), and lagged power. Feature
columns are min-max normalized; the raw origin power is kept alongside
for the persistence baseline and clamping.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from rampkit.errors import AlignmentError, LengthMismatchError, SingularSystemError
from rampkit.matching import MatchRecord
from rampkit.metrics import EvalReport, evaluate
from rampkit.ramps import RampEvent
from rampkit.series import FeatureTable, WindSeries, normalize_array

MATCH_FEATURES = ("matched_power", "matched_speed", "omega", "rho", "ramp_fired")


def rank_nwp_features(table: FeatureTable, target: str) -> list[tuple[str, float]]:
    """Columns ranked by Pearson correlation with the target, descending.

    Zero-variance columns correlate 0 by definition.
    """
    if target not in table.columns:
        raise AlignmentError(f"target column {target!r} not in table")
    if len(table) < 2:
        raise LengthMismatchError("need at least 2 rows to correlate")
    y = table[target].values
    ranked = []
    for name, col in table.columns.items():
        if name == target:
            continue
        x = col.values
        sx, sy = x.std(), y.std()
        corr = 0.0 if sx == 0 or sy == 0 else float(np.corrcoef(x, y)[0, 1])
        ranked.append((name, corr))
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked


@dataclass(frozen=True)
class FeatureMatrix:
    """Normalized feature rows plus raw targets and origin bookkeeping."""

    X: np.ndarray
    feature_names: tuple[str, ...]
    y: np.ndarray
    origin_power: np.ndarray
    origin_index: np.ndarray
    horizon: int
    capacity: float
    start_time: datetime
    step: float

    def __post_init__(self) -> None:
        if self.X.ndim != 2 or self.X.shape[0] != self.y.size:
            raise AlignmentError("feature matrix and target lengths differ")
        if self.X.shape[1] != len(self.feature_names):
            raise AlignmentError("feature name count differs from columns")
        if not np.isfinite(self.X).all() or not np.isfinite(self.y).all():
            raise AlignmentError("assembled features contain non-finite cells")

    def __len__(self) -> int:
        return int(self.y.size)

    def target_times(self) -> list[datetime]:
        return [
            self.start_time + timedelta(seconds=self.step * (int(i) + self.horizon))
            for i in self.origin_index
        ]

    def drop_features(self, names: tuple[str, ...]) -> "FeatureMatrix":
        """Same rows, with the named feature columns removed."""
        keep = [i for i, n in enumerate(self.feature_names) if n not in names]
        return FeatureMatrix(
            X=self.X[:, keep],
            feature_names=tuple(self.feature_names[i] for i in keep),
            y=self.y,
            origin_power=self.origin_power,
            origin_index=self.origin_index,
            horizon=self.horizon,
            capacity=self.capacity,
            start_time=self.start_time,
            step=self.step,
        )


def _segment_lookup(matches: list[MatchRecord], events: list[RampEvent]):
    by_span: dict[tuple[int, int], tuple[MatchRecord, RampEvent | None]] = {}
    fired = {(ev.segment.start_idx, ev.segment.end_idx): ev for ev in events}
    for rec in matches:
        span = (rec.past_segment.start_idx, rec.past_segment.end_idx)
        by_span[span] = (rec, fired.get(span))
    return by_span


def assemble_features(
    matches: list[MatchRecord],
    ramp_events: list[RampEvent],
    table: FeatureTable,
    historical_speed: WindSeries,
    historical_power: WindSeries,
    lags: tuple[int, ...] = (1, 2),
    horizon: int = 1,
    k_nwp: int = 2,
    capacity: float = 5.0,
    power_column: str = "power_mw",
) -> FeatureMatrix:
    """Build the forecasting matrix from matched segments and covariates.

    Rows are dropped when any input is unavailable: the lag window reaches
    before the series start, the target reaches past its end, or the
    matched analogue position falls outside the historical series.
    Feature columns are min-max normalized to [0, 1]; the target stays in
    MW. Lag 1 is the latest observation at the origin, so the persistence
    baseline can read its prediction straight from the raw origin power.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not lags or min(lags) < 1:
        raise ValueError("lags must be positive")
    if power_column not in table.columns:
        raise AlignmentError(f"table has no {power_column!r} column")
    if len(historical_speed) != len(historical_power):
        raise AlignmentError("historical speed and power lengths differ")

    power = table[power_column].values
    n = len(table)
    nwp_names = [
        name for name, _ in rank_nwp_features(table, power_column) if name.startswith("nwp_")
    ][:k_nwp]

    by_span = _segment_lookup(matches, ramp_events)
    spans = sorted(by_span)
    if not spans:
        raise AlignmentError("no matched segments given")
    starts = np.array([a for a, _ in spans])

    max_lag = max(lags)
    names = [
        "matched_power",
        "matched_speed",
        "omega",
        "rho",
        "ramp_fired",
        *(f"{c}_t+h" for c in nwp_names),
        *(f"power_lag{ell}" for ell in lags),
    ]

    aligned = {span: by_span[span][0].aligned_offsets() for span in spans}

    rows, targets, origin_power, origin_index = [], [], [], []
    hist_n = len(historical_speed)
    for t in range(max_lag - 1, n - horizon):
        pos = int(np.searchsorted(starts, t, side="right")) - 1
        if pos < 0:
            continue
        span = spans[pos]
        if not span[0] <= t <= span[1]:
            continue
        rec, event = by_span[span]
        h_idx = rec.hist_start + int(aligned[span][t - span[0]]) + horizon
        if not 0 <= h_idx < hist_n:
            continue
        row = [
            float(historical_power.values[h_idx]),
            float(historical_speed.values[h_idx]),
            rec.omega,
            rec.past_segment.rho,
            1.0 if (event is not None and event.fired) else 0.0,
            *(float(table[c].values[t + horizon]) for c in nwp_names),
            *(float(power[t - ell + 1]) for ell in lags),
        ]
        rows.append(row)
        targets.append(float(power[t + horizon]))
        origin_power.append(float(power[t]))
        origin_index.append(t)

    if not rows:
        raise AlignmentError("no assemblable rows (inputs too short or misaligned)")

    X = np.asarray(rows, dtype=float)
    for j in range(X.shape[1]):
        X[:, j] = normalize_array(X[:, j])
    return FeatureMatrix(
        X=X,
        feature_names=tuple(names),
        y=np.asarray(targets),
        origin_power=np.asarray(origin_power),
        origin_index=np.asarray(origin_index, dtype=int),
        horizon=horizon,
        capacity=capacity,
        start_time=table.start_time,
        step=table.step,
    )


@dataclass(frozen=True)
class ForecastReport:
    predictions: np.ndarray
    actuals: np.ndarray
    horizon: int
    model_id: str
    metrics: EvalReport
    target_times: tuple[datetime, ...] = ()

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "horizon": self.horizon,
            "predictions": [float(v) for v in self.predictions],
            "actuals": [float(v) for v in self.actuals],
            "metrics": self.metrics.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _split_point(n: int, split: float) -> int:
    return int(np.floor(n * split))


def _report(matrix: FeatureMatrix, pred: np.ndarray, actual: np.ndarray,
            model_id: str, times: list[datetime]) -> ForecastReport:
    pred = np.clip(pred, 0.0, matrix.capacity)
    return ForecastReport(
        predictions=pred,
        actuals=actual,
        horizon=matrix.horizon,
        model_id=model_id,
        metrics=evaluate(pred, actual, matrix.capacity),
        target_times=tuple(times),
    )


def predict_persistence(matrix: FeatureMatrix, split: float = 0.0) -> ForecastReport:
    """No-skill reference: predict the origin power for every horizon.

    ``split`` discards the leading fraction so reports stay comparable
    with a trained model evaluated on the same held-out rows.
    """
    if not 0 <= split < 1:
        raise ValueError("split must lie in [0, 1)")
    cut = _split_point(len(matrix), split)
    times = matrix.target_times()[cut:]
    return _report(
        matrix, matrix.origin_power[cut:].copy(), matrix.y[cut:], "persistence", times
    )


def fit_predict_linear(
    matrix: FeatureMatrix, ridge_lambda: float = 1.0, split: float = 0.7
) -> ForecastReport:
    """Closed-form ridge regression fit chronologically, tested on the rest.

    The normal equations carry an L2 penalty on every coefficient except
    the intercept. With ``ridge_lambda == 0`` a rank-deficient system is
    surfaced as an error instead of silently pseudo-inverted.
    """
    if not 0 < split < 1:
        raise ValueError("split must lie in (0, 1)")
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be non-negative")
    n, p = matrix.X.shape
    cut = _split_point(n, split)
    if cut < p + 1:
        raise ValueError(f"{cut} training rows cannot fit {p + 1} coefficients")
    if cut >= n:
        raise ValueError("split leaves no test rows")

    X_train = np.column_stack([np.ones(cut), matrix.X[:cut]])
    y_train = matrix.y[:cut]
    gram = X_train.T @ X_train
    penalty = ridge_lambda * np.eye(p + 1)
    penalty[0, 0] = 0.0
    if ridge_lambda == 0 and np.linalg.matrix_rank(gram) < p + 1:
        raise SingularSystemError("normal equations are rank-deficient at lambda = 0")
    beta = np.linalg.solve(gram + penalty, X_train.T @ y_train)

    X_test = np.column_stack([np.ones(n - cut), matrix.X[cut:]])
    pred = X_test @ beta
    times = matrix.target_times()[cut:]
    return _report(matrix, pred, matrix.y[cut:], f"ridge(lambda={ridge_lambda:g})", times)


def mse_objective(pred, actual) -> float:
    """Mean squared error between prediction and truth."""
    p = np.asarray(pred, dtype=float).reshape(-1)
    a = np.asarray(actual, dtype=float).reshape(-1)
    if p.size != a.size:
        raise LengthMismatchError(f"lengths differ: {p.size} vs {a.size}")
    if p.size == 0:
        raise LengthMismatchError("need at least one point")
    return float(np.mean((p - a) ** 2))
