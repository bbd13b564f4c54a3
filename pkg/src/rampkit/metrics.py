"""Grid-code forecast evaluation: RMSE, MAE, accuracy rate, qualification
rate, plus capacity-normalized and correlation extras.

The accuracy rate divides each error by the predicted value as written in
the dispatch rule, guarded by an epsilon floor because wind power is
frequently zero. It can go negative for terrible forecasts and is
reported as-is. A point qualifies when its absolute error stays within a
quarter of capacity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from rampkit.errors import EmptyInputError, LengthMismatchError

QUALIFICATION_LEVEL = 0.75  # 1 - |err|/capacity must reach this


def _paired(pred, meas) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=float).reshape(-1)
    m = np.asarray(meas, dtype=float).reshape(-1)
    if p.size != m.size:
        raise LengthMismatchError(f"lengths differ: {p.size} vs {m.size}")
    if p.size == 0:
        raise EmptyInputError("need at least one point")
    return p, m


def rmse(pred, meas) -> float:
    p, m = _paired(pred, meas)
    return float(np.sqrt(np.mean((p - m) ** 2)))


def mae(pred, meas) -> float:
    p, m = _paired(pred, meas)
    return float(np.mean(np.abs(p - m)))


def accuracy_ac(pred, meas, epsilon: float) -> float:
    """Accuracy rate in percent: 100 * (1 - RMS of per-point relative error).

    Each error is divided by the magnitude of the predicted value, floored
    at ``epsilon`` so zero-power points stay finite.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    p, m = _paired(pred, meas)
    rel = (p - m) / np.maximum(np.abs(p), epsilon)
    return float((1.0 - np.sqrt(np.mean(rel**2))) * 100.0)


def qualification_flags(pred, meas, capacity) -> np.ndarray:
    """Per-point qualified labels: error within 25% of capacity.

    ``capacity`` may be a scalar or a per-point vector of on-line
    capacity.
    """
    p, m = _paired(pred, meas)
    cap = np.asarray(capacity, dtype=float)
    if np.any(cap <= 0):
        raise ValueError("capacity must be positive")
    if cap.ndim > 0 and cap.size != p.size:
        raise LengthMismatchError("capacity vector length differs from data")
    return (1.0 - np.abs(p - m) / cap) >= QUALIFICATION_LEVEL


def pr_power(flags) -> float:
    """Share of qualified points, in percent."""
    f = np.asarray(flags, dtype=bool).reshape(-1)
    if f.size == 0:
        raise EmptyInputError("need at least one flag")
    return float(np.mean(f) * 100.0)


def pearson(x, y) -> float:
    """Pearson correlation; 0 when either side has zero variance."""
    a = np.asarray(x, dtype=float).reshape(-1)
    b = np.asarray(y, dtype=float).reshape(-1)
    if a.size != b.size:
        raise LengthMismatchError(f"lengths differ: {a.size} vs {b.size}")
    if a.size < 2:
        return 0.0
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


def extras(pred, meas, capacity: float) -> dict[str, float]:
    """Capacity-normalized error percentages and Pearson correlation.

    Documented variants, not claimed to reproduce any published table:
    r_rmse and r_mae divide by capacity; cc is plain Pearson.
    """
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    p, m = _paired(pred, meas)
    return {
        "cc": pearson(p, m),
        "r_rmse": rmse(p, m) / capacity * 100.0,
        "r_mae": mae(p, m) / capacity * 100.0,
    }


@dataclass(frozen=True)
class EvalReport:
    rmse: float
    mae: float
    ac: float
    pr_power: float
    qualified_flags: np.ndarray
    n: int
    capacity: float
    extras: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rmse": self.rmse,
            "mae": self.mae,
            "ac": self.ac,
            "pr_power": self.pr_power,
            "n": self.n,
            "capacity": self.capacity,
            "extras": dict(self.extras),
            "qualified_flags": [int(b) for b in self.qualified_flags],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def table(self) -> str:
        """Fixed-order metric table for terminal output."""
        rows = [
            ("RMSE (MW)", f"{self.rmse:.4f}"),
            ("MAE (MW)", f"{self.mae:.4f}"),
            ("AC (%)", f"{self.ac:.2f}"),
            ("PR_power (%)", f"{self.pr_power:.2f}"),
            ("CC", f"{self.extras.get('cc', float('nan')):.4f}"),
            ("r_RMSE (%)", f"{self.extras.get('r_rmse', float('nan')):.2f}"),
            ("r_MAE (%)", f"{self.extras.get('r_mae', float('nan')):.2f}"),
            ("points", str(self.n)),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def evaluate(pred, meas, capacity: float, epsilon: float | None = None) -> EvalReport:
    """Bundle every metric into one report.

    ``epsilon`` defaults to 1% of capacity, the guard for the accuracy
    rate's division by predicted power.
    """
    p, m = _paired(pred, meas)
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    eps = epsilon if epsilon is not None else 0.01 * capacity
    flags = qualification_flags(p, m, capacity)
    return EvalReport(
        rmse=rmse(p, m),
        mae=mae(p, m),
        ac=accuracy_ac(p, m, eps),
        pr_power=pr_power(flags),
        qualified_flags=flags,
        n=p.size,
        capacity=capacity,
        extras=extras(p, m, capacity),
    )
