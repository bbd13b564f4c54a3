"""Similar-period matching: exact DTW, its multiresolution approximation,
and the level/trend similarity scores for matched windows.

The approximation recursively halves both series by pairwise averaging,
solves the coarsest level exactly, then refines the projected warp path
inside a radius-expanded window. Its distance can never undercut the
exact optimum, and equals it once the radius covers the full matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rampkit.errors import (
    EmptyInputError,
    HistoricalTooShortError,
    LengthMismatchError,
    OutOfRangeError,
    TooShortError,
)
from rampkit.ramps import RampSegment
from rampkit.series import WindSeries

_STEPS = ((1, 1), (1, 0), (0, 1))


@dataclass(frozen=True)
class WarpPath:
    """Monotone alignment path from (0, 0) to (n-1, m-1)."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple((int(i), int(j)) for i, j in self.pairs))
        if not self.pairs:
            raise EmptyInputError("warp path cannot be empty")
        if self.pairs[0] != (0, 0):
            raise ValueError("warp path must start at (0, 0)")
        for (i0, j0), (i1, j1) in zip(self.pairs, self.pairs[1:]):
            if (i1 - i0, j1 - j0) not in _STEPS:
                raise ValueError(f"illegal warp step {(i1 - i0, j1 - j0)}")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class MatchRecord:
    """A past segment paired with its best historical window.

    ``path`` is the warp path of the winning window; it lets consumers
    read the analogue at the warp-aligned position of each segment offset
    instead of assuming lockstep indices.
    """

    past_segment: RampSegment
    hist_start: int
    dtw_distance: float
    wind_str: float
    wind_tre: float
    wind_str_norm: float
    wind_tre_norm: float
    omega: float
    path: WarpPath | None = None

    def __post_init__(self) -> None:
        if self.dtw_distance < 0:
            raise ValueError("dtw distance cannot be negative")
        if self.omega < 0:
            raise ValueError("omega cannot be negative")

    def aligned_offsets(self) -> np.ndarray:
        """Historical offset aligned to each segment offset.

        The warp path may pair one segment index with several window
        indices; the last pairing wins. Without a stored path the mapping
        is the identity.
        """
        n = len(self.past_segment)
        aligned = np.arange(n)
        if self.path is not None:
            for i, j in self.path.pairs:
                if i < n:
                    aligned[i] = j
        return aligned


def _as_1d(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.size == 0:
        raise EmptyInputError("sequence must be non-empty")
    return arr


def _dtw_in_window(x: np.ndarray, y: np.ndarray, window) -> tuple[float, WarpPath]:
    """Dynamic program over the given (1-based) cell window.

    ``window=None`` means the full matrix. Local cost is the absolute
    difference; allowed predecessor steps are down, right and diagonal.
    Ties backtrack diagonal-first so paths are deterministic.
    """
    n, m = x.size, y.size
    if window is None:
        window = [(i, j) for i in range(1, n + 1) for j in range(1, m + 1)]

    inf = math.inf
    D: dict[tuple[int, int], float] = {(0, 0): 0.0}
    for i, j in window:
        cost = abs(x[i - 1] - y[j - 1])
        best = min(
            D.get((i - 1, j - 1), inf),
            D.get((i - 1, j), inf),
            D.get((i, j - 1), inf),
        )
        D[(i, j)] = cost + best

    distance = D.get((n, m), inf)
    if not math.isfinite(distance):
        raise ValueError("warp window disconnected; no path reaches the end")

    path = [(n - 1, m - 1)]
    i, j = n, m
    while (i, j) != (1, 1):
        candidates = (
            (D.get((i - 1, j - 1), inf), (i - 1, j - 1)),
            (D.get((i - 1, j), inf), (i - 1, j)),
            (D.get((i, j - 1), inf), (i, j - 1)),
        )
        _, (i, j) = min(candidates, key=lambda c: c[0])
        path.append((i - 1, j - 1))
    path.reverse()
    return float(distance), WarpPath(tuple(path))


def dtw(x, y) -> tuple[float, WarpPath]:
    """Exact dynamic-time-warping distance and optimal path."""
    return _dtw_in_window(_as_1d(x), _as_1d(y), None)


def _reduce_by_half(x: np.ndarray) -> np.ndarray:
    even = x.size - x.size % 2
    halved = (x[0:even:2] + x[1:even:2]) / 2.0
    if x.size % 2:
        halved = np.append(halved, x[-1])
    return halved


def _expand_window(path: WarpPath, len_x: int, len_y: int, radius: int) -> list[tuple[int, int]]:
    coarse = set(path.pairs)
    for i, j in path.pairs:
        for a in range(-radius, radius + 1):
            for b in range(-radius, radius + 1):
                coarse.add((i + a, j + b))

    fine = set()
    for i, j in coarse:
        fine.update(((2 * i, 2 * j), (2 * i, 2 * j + 1), (2 * i + 1, 2 * j), (2 * i + 1, 2 * j + 1)))

    window = []
    start_j = 0
    for i in range(len_x):
        first_j = None
        for j in range(start_j, len_y):
            if (i, j) in fine:
                window.append((i + 1, j + 1))
                if first_j is None:
                    first_j = j
            elif first_j is not None:
                break
        if first_j is not None:
            start_j = first_j
    return window


def fastdtw(x, y, radius: int = 1) -> tuple[float, WarpPath]:
    """Multiresolution approximate DTW.

    Coarsens by pairwise averaging (an odd tail element is carried as-is)
    down to the base size ``radius + 2``, solves that level exactly, then
    repeatedly projects the path to the next resolution and re-solves
    inside the radius-expanded window. The result is an upper bound on
    the exact distance, exact whenever ``radius`` reaches the longer
    input's length.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    xa, ya = _as_1d(x), _as_1d(y)
    return _fastdtw(xa, ya, radius)


def _fastdtw(x: np.ndarray, y: np.ndarray, radius: int) -> tuple[float, WarpPath]:
    if min(x.size, y.size) <= radius + 2:
        return _dtw_in_window(x, y, None)
    _, coarse_path = _fastdtw(_reduce_by_half(x), _reduce_by_half(y), radius)
    window = _expand_window(coarse_path, x.size, y.size, radius)
    return _dtw_in_window(x, y, window)


def wind_str(h, p) -> float:
    """Mean absolute level difference between two equal-length windows."""
    ha, pa = _as_1d(h), _as_1d(p)
    if ha.size != pa.size:
        raise LengthMismatchError(f"lengths differ: {ha.size} vs {pa.size}")
    return float(np.mean(np.abs(ha - pa)))


def wind_tre(h, p, dt: float = 1.0) -> float:
    """Mean slope difference between two equal-length windows.

    Telescoping collapses the slope sums, so this equals
    ((h[-1]-h[0]) - (p[-1]-p[0])) / ((c-1) * dt).
    """
    ha, pa = _as_1d(h), _as_1d(p)
    if ha.size != pa.size:
        raise LengthMismatchError(f"lengths differ: {ha.size} vs {pa.size}")
    if ha.size < 2:
        raise TooShortError("trend difference needs at least 2 points")
    if dt <= 0:
        raise ValueError("dt must be positive")
    c = ha.size
    slopes_h = np.diff(ha) / dt
    slopes_p = np.diff(pa) / dt
    return float((slopes_h.sum() - slopes_p.sum()) / (c - 1))


def omega(str_norm: float, tre_norm: float) -> float:
    """Similarity coefficient from normalized level and trend differences.

    Quadratic combination with a sign branch on the trend term; the two
    branches agree at zero trend.
    """
    if not 0 <= str_norm <= 1:
        raise OutOfRangeError(f"str_norm must lie in [0, 1], got {str_norm}")
    if not -1 <= tre_norm <= 1:
        raise OutOfRangeError(f"tre_norm must lie in [-1, 1], got {tre_norm}")
    if tre_norm > 0:
        return abs(str_norm**2 + tre_norm**2)
    return abs(str_norm**2 - tre_norm**2)


def match_periods(
    past_segments: list[RampSegment],
    historical: WindSeries,
    radius: int = 2,
    stride: int | None = None,
) -> list[MatchRecord]:
    """Best historical window for each past segment.

    Windows of the segment's own length slide over the historical series;
    ``stride`` defaults to a quarter segment length for tractability
    (pass 1 for the exhaustive scan). The minimum warp distance wins,
    earliest window on ties. Level differences normalize to [0, 1] and
    trend differences sign-preservingly to [-1, 1] across the batch; a
    single-record batch normalizes to 0.
    """
    hist = historical.values
    raw: list[tuple[RampSegment, int, float, float, float, WarpPath]] = []
    for seg in past_segments:
        length = len(seg)
        if length > hist.size:
            raise HistoricalTooShortError(
                f"historical series ({hist.size}) shorter than segment ({length})"
            )
        hop = stride if stride is not None else max(1, length // 4)
        if hop < 1:
            raise ValueError("stride must be >= 1")
        best_d, best_o, best_path = math.inf, 0, None
        for origin in range(0, hist.size - length + 1, hop):
            d, p = fastdtw(seg.values, hist[origin:origin + length], radius)
            if d < best_d:
                best_d, best_o, best_path = d, origin, p
        window = hist[best_o:best_o + length]
        s = wind_str(window, seg.values)
        t = wind_tre(window, seg.values) if length >= 2 else 0.0
        raw.append((seg, best_o, best_d, s, t, best_path))

    strs = np.array([r[3] for r in raw])
    tres = np.array([r[4] for r in raw])
    if strs.size > 1 and strs.max() > strs.min():
        str_norms = (strs - strs.min()) / (strs.max() - strs.min())
    else:
        str_norms = np.zeros_like(strs)
    tre_scale = float(np.max(np.abs(tres))) if tres.size > 1 else 0.0
    tre_norms = tres / tre_scale if tre_scale > 0 else np.zeros_like(tres)

    records = []
    for (seg, origin, d, s, t, p), sn, tn in zip(raw, str_norms, tre_norms):
        records.append(
            MatchRecord(
                past_segment=seg,
                hist_start=origin,
                dtw_distance=d,
                wind_str=s,
                wind_tre=t,
                wind_str_norm=float(sn),
                wind_tre_norm=float(tn),
                omega=omega(float(sn), float(tn)),
                path=p,
            )
        )
    return records
