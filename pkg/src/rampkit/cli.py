"""Subcommand front end wiring the pipeline stages into batch runs.

Stages communicate through files so each is independently testable:

    synth -> scenario.csv + events.json
    decompose -> modes.csv, poles.csv, recon.csv
    ramps -> ramp_events.csv
    match -> match_table.csv
    forecast -> forecast.csv + forecast_report.json
    evaluate -> eval_report.json
    attention-bench -> attention_bench.json

Exit codes: 0 success, 2 usage/config/data error, 1 internal error.
Parameters come from flags or one JSON config file; flags win. A fixed
seed makes every stage's outputs byte-reproducible.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from rampkit.attention import (
    AttentionInput,
    SparseAttentionStats,
    m_score,
    prob_sparse_attention,
    top_queries_by_score,
)
from rampkit.errors import RampkitError
from rampkit.forecasting import (
    assemble_features,
    fit_predict_linear,
    predict_persistence,
)
from rampkit.io import (
    POWER_COLUMN,
    SPEED_COLUMN,
    format_timestamp,
    load_csv,
    parse_timestamp,
    write_csv,
    write_series_csv,
)
from rampkit.matching import MatchRecord, match_periods
from rampkit.metrics import evaluate
from rampkit.poles import SelectionParams, vmd_ic
from rampkit.ramps import (
    RampDefinition,
    RampEvent,
    label_ramps,
    make_segment,
)
from rampkit.series import PowerCurveSpec, SeriesKind, WindSeries, power_curve
from rampkit.synth import ScenarioConfig, events_to_json, synth_scenario
from rampkit.vmd import DEFAULT_ALPHA, DEFAULT_K

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# config/flag plumbing
# ---------------------------------------------------------------------------

def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _threads(cfg: dict) -> int:
    value = cfg.get("threads")
    if value is None:
        value = os.environ.get("RAMPKIT_THREADS", "1")
    n = int(value)
    if n < 1:
        raise RampkitError(f"--threads must be >= 1, got {n}")
    return n


def _selection(cfg: dict) -> SelectionParams:
    tau = math.inf if cfg.get("keep_all") else float(cfg["tau"])
    return SelectionParams(ell=float(cfg["ell"]), tau_rate=tau)


def _load_column(path: str, column: str, kind: SeriesKind) -> WindSeries:
    table = load_csv(path, schema={column: kind})
    return table[column]


# ---------------------------------------------------------------------------
# shared file readers/writers
# ---------------------------------------------------------------------------

def _write_poles_csv(path: Path, result) -> None:
    kept_idx = {p.index for p in result.extrema.points}
    recon = result.recon
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "timestamp", "value", "kind", "kept"])
        for p in result.all_extrema.points:
            writer.writerow(
                [
                    p.index,
                    format_timestamp(recon.time_at(p.index)),
                    repr(p.value),
                    p.kind.value,
                    int(p.index in kept_idx),
                ]
            )


def _read_kept_pole_indices(path: str) -> list[int]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [int(row["index"]) for row in csv.DictReader(fh) if row["kept"] == "1"]


def _segments_from_files(recon_path: str, poles_path: str):
    recon = _load_column(recon_path, "recon", SeriesKind.NWP)
    kept = _read_kept_pole_indices(poles_path)
    from rampkit.poles import ExtremaSet, ExtremumKind, ExtremumPoint

    points = tuple(
        ExtremumPoint(i, float(recon.values[i]), ExtremumKind.MAX) for i in sorted(kept)
    )
    extrema = ExtremaSet(points=points, source_len=len(recon))
    from rampkit.ramps import segment_by_extrema

    return recon, segment_by_extrema(recon, extrema)


def _write_match_table(path: Path, records: list[MatchRecord], historical: WindSeries) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "segment_id", "seg_start", "seg_end", "hist_start", "hist_start_time",
                "dtw_distance", "wind_str", "wind_tre", "str_norm", "tre_norm", "omega",
            ]
        )
        for i, rec in enumerate(records):
            writer.writerow(
                [
                    i,
                    rec.past_segment.start_idx,
                    rec.past_segment.end_idx,
                    rec.hist_start,
                    format_timestamp(historical.time_at(rec.hist_start)),
                    repr(rec.dtw_distance),
                    repr(rec.wind_str),
                    repr(rec.wind_tre),
                    repr(rec.wind_str_norm),
                    repr(rec.wind_tre_norm),
                    repr(rec.omega),
                ]
            )


def _read_match_table(path: str, segments) -> list[MatchRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if not 0 <= int(row["segment_id"]) < len(segments):
                raise RampkitError(f"{path}: segment id {row['segment_id']} out of range")
            seg = segments[int(row["segment_id"])]
            if (seg.start_idx, seg.end_idx) != (int(row["seg_start"]), int(row["seg_end"])):
                raise RampkitError(
                    f"{path}: segment {row['segment_id']} does not match the pole table"
                )
            records.append(
                MatchRecord(
                    past_segment=seg,
                    hist_start=int(row["hist_start"]),
                    dtw_distance=float(row["dtw_distance"]),
                    wind_str=float(row["wind_str"]),
                    wind_tre=float(row["wind_tre"]),
                    wind_str_norm=float(row["str_norm"]),
                    wind_tre_norm=float(row["tre_norm"]),
                    omega=float(row["omega"]),
                )
            )
    return records


def _write_ramp_events(path: Path, events: list[RampEvent], recon: WindSeries) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["segment_id", "start_time", "end_time", "start_idx", "end_idx",
             "definition", "threshold", "rho", "direction", "fired"]
        )
        for i, ev in enumerate(events):
            seg = ev.segment
            writer.writerow(
                [
                    i,
                    format_timestamp(recon.time_at(seg.start_idx)),
                    format_timestamp(recon.time_at(seg.end_idx)),
                    seg.start_idx,
                    seg.end_idx,
                    ev.definition.value,
                    repr(ev.threshold_used),
                    repr(seg.rho),
                    seg.direction.value,
                    int(ev.fired),
                ]
            )


def _read_ramp_events(path: str, segments) -> list[RampEvent]:
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            seg = segments[int(row["segment_id"])]
            events.append(
                RampEvent(
                    segment=seg,
                    definition=RampDefinition(row["definition"]),
                    threshold_used=float(row["threshold"]),
                    fired=row["fired"] == "1",
                )
            )
    return events


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_synth(cfg: dict) -> int:
    scenario_fields = {
        k: cfg[k]
        for k in ("length", "step_s", "base_mean", "reversion", "noise_sigma", "events")
        if cfg.get(k) is not None
    }
    config = ScenarioConfig.from_dict(dict(scenario_fields))
    config.validate()
    out = _out_dir(cfg)
    table, events = synth_scenario(config, seed=int(cfg["seed"]))
    write_csv(table, out / "scenario.csv")
    (out / "events.json").write_text(
        events_to_json(events, config.step_s), encoding="utf-8"
    )
    print(f"wrote {out / 'scenario.csv'} ({len(table)} rows) and events.json")
    return EXIT_OK


def cmd_decompose(cfg: dict) -> int:
    out = _out_dir(cfg)
    column = cfg["column"]
    kind = SeriesKind.SPEED if column == SPEED_COLUMN else SeriesKind.NWP
    series = _load_column(cfg["input"], column, kind)
    result = vmd_ic(
        series,
        K=int(cfg["K"]),
        alpha=float(cfg["alpha"]),
        tau_dual=float(cfg["tau_dual"]),
        tol=float(cfg["tol"]),
        max_iter=int(cfg["max_iter"]),
        selection=_selection(cfg),
    )
    write_series_csv(
        out / "modes.csv",
        {f"mode_{k + 1}": result.modes.mode_series(k) for k in range(result.modes.K)},
    )
    _write_poles_csv(out / "poles.csv", result)
    write_series_csv(out / "recon.csv", {"recon": result.recon})
    kept = ",".join(str(k + 1) for k in result.kept)
    print(
        f"decomposed K={result.modes.K} (kept modes {kept}); "
        f"{len(result.all_extrema)} extrema -> {len(result.extrema)} poles"
    )
    return EXIT_OK


def cmd_ramps(cfg: dict) -> int:
    out = _out_dir(cfg)
    recon, segments = _segments_from_files(cfg["recon"], cfg["poles"])
    mode = RampDefinition(cfg["mode"])
    rho_threshold = None if cfg["rho_threshold"] in (None, "auto") else float(cfg["rho_threshold"])
    events = label_ramps(
        segments, mode=mode, p_val=cfg.get("p_val"), rho_threshold=rho_threshold
    )
    _write_ramp_events(out / "ramp_events.csv", events, recon)
    fired = sum(ev.fired for ev in events)
    print(f"labeled {len(events)} segments under {mode.value}: {fired} fired")
    return EXIT_OK


def cmd_match(cfg: dict) -> int:
    out = _out_dir(cfg)
    _, segments = _segments_from_files(cfg["recon"], cfg["poles"])
    historical = _load_column(cfg["historical"], SPEED_COLUMN, SeriesKind.SPEED)
    stride = cfg.get("stride")
    records = match_periods(
        segments,
        historical,
        radius=int(cfg["radius"]),
        stride=None if stride in (None, 0) else int(stride),
    )
    _write_match_table(out / "match_table.csv", records, historical)
    print(f"matched {len(records)} segments against {len(historical)} historical points")
    return EXIT_OK


def cmd_forecast(cfg: dict) -> int:
    out = _out_dir(cfg)
    table = load_csv(cfg["scenario"])
    _, segments = _segments_from_files(cfg["recon"], cfg["poles"])
    matches = _read_match_table(cfg["matches"], segments)
    events = _read_ramp_events(cfg["ramp_events"], segments)
    hist_table = load_csv(cfg["historical"])
    hist_speed = hist_table[SPEED_COLUMN]
    if POWER_COLUMN in hist_table.columns:
        hist_power = hist_table[POWER_COLUMN]
    else:
        hist_power = hist_speed.with_values(
            power_curve(hist_speed.values, PowerCurveSpec(rated_power=float(cfg["capacity"]))),
            kind=SeriesKind.POWER,
        )
    lags = tuple(int(v) for v in str(cfg["lags"]).split(","))
    matrix = assemble_features(
        matches,
        events,
        table,
        hist_speed,
        hist_power,
        lags=lags,
        horizon=int(cfg["horizon"]),
        k_nwp=int(cfg["k_nwp"]),
        capacity=float(cfg["capacity"]),
    )
    if cfg["model"] == "persistence":
        report = predict_persistence(matrix, split=float(cfg["split"]))
    else:
        report = fit_predict_linear(
            matrix, ridge_lambda=float(cfg["ridge_lambda"]), split=float(cfg["split"])
        )
    with (out / "forecast.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "actual", "predicted"])
        for ts, actual, pred in zip(report.target_times, report.actuals, report.predictions):
            writer.writerow([format_timestamp(ts), repr(float(actual)), repr(float(pred))])
    (out / "forecast_report.json").write_text(report.to_json(), encoding="utf-8")
    print(
        f"{report.model_id}: {len(report.predictions)} predictions, "
        f"RMSE {report.metrics.rmse:.4f} MW"
    )
    return EXIT_OK


def cmd_evaluate(cfg: dict) -> int:
    out = _out_dir(cfg)
    actual, predicted = [], []
    with open(cfg["forecast"], newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            parse_timestamp(row["timestamp"])
            actual.append(float(row["actual"]))
            predicted.append(float(row["predicted"]))
    report = evaluate(predicted, actual, capacity=float(cfg["capacity"]))
    (out / "eval_report.json").write_text(report.to_json(), encoding="utf-8")
    print(report.table())
    return EXIT_OK


def cmd_attention_bench(cfg: dict) -> int:
    out = _out_dir(cfg)
    L, d, s = int(cfg["L"]), int(cfg["d"]), int(cfg["s"])
    factor = float(cfg["sample_factor"])
    n_seeds = int(cfg["seeds"])
    intersections, agreements, dot_counts = [], [], []
    for seed in range(n_seeds):
        rng = np.random.default_rng(seed)
        inputs = AttentionInput(
            Q=rng.normal(size=(L, d)), K=rng.normal(size=(L, d)),
            V=rng.normal(size=(L, d)), d=d,
        )
        stats = SparseAttentionStats()
        _, selected = prob_sparse_attention(
            inputs, s=s, sample_factor=factor, seed=seed, stats=stats
        )
        exact = top_queries_by_score(inputs, s, m_score)
        common = len(set(selected) & set(exact))
        intersections.append(common / s)
        agreements.append(1.0 - 2 * (s - common) / L)
        dot_counts.append(stats.scoring_dot_products)
    budget = L * math.log(L)
    payload = {
        "L": L, "d": d, "s": s, "seeds": n_seeds, "sample_factor": factor,
        "mean_top_s_intersection": float(np.mean(intersections)),
        "mean_index_agreement": float(np.mean(agreements)),
        "scoring_dot_products": int(dot_counts[0]),
        "dot_product_budget_L_lnL": budget,
        "budget_multiple": float(dot_counts[0] / budget),
    }
    text = json.dumps(payload, indent=2) + "\n"
    (out / "attention_bench.json").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="rampkit",
        description="Wind-ramp identification and forecasting pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--threads", type=int, help="worker cap (or RAMPKIT_THREADS)")

    p = sub.add_parser("synth", help="generate a synthetic scenario")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=int, default=600)
    p.add_argument("--step-s", dest="step_s", type=float, default=900.0)
    p.add_argument("--base-mean", dest="base_mean", type=float, default=7.0)
    p.add_argument("--reversion", type=float, default=0.05)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=0.15)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("decompose", help="VMD decomposition + pole screening")
    common(p)
    p.add_argument("--input", required=True, help="scenario/series CSV")
    p.add_argument("--column", default=SPEED_COLUMN)
    p.add_argument("-K", type=int, default=DEFAULT_K)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--tau-dual", dest="tau_dual", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=500)
    p.add_argument("--ell", type=float, default=0.05)
    p.add_argument("--tau", type=float, default=1.0, help="pole-rate threshold")
    p.add_argument("--keep-all", dest="keep_all", action="store_true",
                   help="skip screening; reconstruct from all modes")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("ramps", help="segment the denoised series and label ramps")
    common(p)
    p.add_argument("--recon", required=True)
    p.add_argument("--poles", required=True)
    p.add_argument("--mode", choices=[d.value for d in RampDefinition], default="rf")
    p.add_argument("--p-val", dest="p_val", type=float)
    p.add_argument("--rho-threshold", dest="rho_threshold", default="auto")
    p.set_defaults(func=cmd_ramps)

    p = sub.add_parser("match", help="match past segments to historical periods")
    common(p)
    p.add_argument("--recon", required=True)
    p.add_argument("--poles", required=True)
    p.add_argument("--historical", required=True, help="historical series CSV")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--stride", type=int, help="window stride; 0 = quarter length, 1 = exact")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("forecast", help="assemble features and predict power")
    common(p)
    p.add_argument("--scenario", required=True)
    p.add_argument("--recon", required=True)
    p.add_argument("--poles", required=True)
    p.add_argument("--matches", required=True)
    p.add_argument("--ramp-events", dest="ramp_events", required=True)
    p.add_argument("--historical", required=True)
    p.add_argument("--model", choices=["ridge", "persistence"], default="ridge")
    p.add_argument("--horizon", type=int, default=1)
    p.add_argument("--lags", default="1,2")
    p.add_argument("--k-nwp", dest="k_nwp", type=int, default=2)
    p.add_argument("--capacity", type=float, default=5.0)
    p.add_argument("--ridge-lambda", dest="ridge_lambda", type=float, default=1.0)
    p.add_argument("--split", type=float, default=0.7)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="grid-code metrics for a forecast CSV")
    common(p)
    p.add_argument("--forecast", required=True)
    p.add_argument("--capacity", type=float, default=5.0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("attention-bench", help="sparse-attention overlap/op-count stats")
    common(p)
    p.add_argument("--L", type=int, default=64)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--s", type=int, default=8)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--sample-factor", dest="sample_factor", type=float, default=1.0)
    p.set_defaults(func=cmd_attention_bench)

    return parser, dict(sub.choices)


def main(argv: list[str] | None = None) -> int:
    parser, subparsers = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            file_values = json.loads(Path(args.config).read_text(encoding="utf-8"))
            if not isinstance(file_values, dict):
                raise RampkitError("config file must hold a JSON object")
            # Config fills subcommand defaults; explicit flags still win
            # on the re-parse.
            subparsers[args.command].set_defaults(**file_values)
            args = parser.parse_args(argv)
        cfg = vars(args)
        _threads(cfg)
        return args.func(cfg)
    except RampkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, json.JSONDecodeError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - internal faults
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
