"""`forecast` command line: full runs, plus standalone quality control,
gap filling, synthetic data generation and a gradient self-check.

Exit codes: 0 success, 2 unusable data or configuration, 3 when every
requested model diverged during a run.
"""

import argparse
import datetime as dt
import json
import sys
import time
from pathlib import Path

import numpy as np

from .data import DataError, ingest_csv, write_daily_csv, write_hourly_csv
from .imputation import TempModel, evaluate_imputation, fit_temp_model, impute_daily, impute_hourly
from .neural import MODEL_KINDS, NetConfig, gradient_check, init_model
from .pipeline import (
    RunConfig,
    run_prequential,
    write_forecasts_csv,
    write_report_csv,
    write_report_json,
)
from .qc import apply_qc
from .solar import GeoPosition, daily_extraterrestrial_insolation
from .synth import synthesize_station

GRADCHECK_THRESHOLDS = {"slfnn": 1e-6, "mlfnn": 1e-5, "lstm": 1e-4}


def _cmd_run(args) -> int:
    config = RunConfig.from_json(args.config)
    report = run_prequential(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report_json(report, out / "report.json")
    write_report_csv(report, out / "report.csv")
    write_forecasts_csv(report, out / "forecasts.csv")
    if args.qc_report:
        if report.qc is None:
            print("no QC stage on this track; --qc-report skipped", file=sys.stderr)
        else:
            Path(args.qc_report).write_text(json.dumps(report.qc, indent=2) + "\n")
    print(f"wrote {out / 'report.json'} ({report.n_steps} steps)")
    if report.models and all(m.get("diverged") for m in report.models.values()):
        print("every requested model diverged", file=sys.stderr)
        return 3
    return 0


def _cmd_qc(args) -> int:
    pos = GeoPosition(args.lat, args.lon, args.alt)
    result = ingest_csv(args.input)
    series = result.hourly_series(args.station, args.variable)
    cleaned, report = apply_qc(series, pos)
    write_hourly_csv(cleaned, args.station, args.variable, args.out)
    if args.qc_report:
        Path(args.qc_report).write_text(json.dumps(report.as_dict(), indent=2) + "\n")
    print(json.dumps(report.as_dict()))
    return 0


def _cmd_impute(args) -> int:
    result = ingest_csv(args.input)
    if args.impute == "hourly":
        series = result.hourly_series(args.station, args.variable)
        if args.mask_eval is not None:
            stats = evaluate_imputation(series, args.mask_eval, args.seed, "hourly")
            print(json.dumps(stats.as_dict()))
        filled = impute_hourly(series)
        write_hourly_csv(filled, args.station, args.variable, args.out)
        return 0
    daily = result.daily_series(args.station)
    pos = GeoPosition(args.lat, args.lon, args.alt)
    h0 = np.array([
        daily_extraterrestrial_insolation(pos, daily.julian_day_for(i))
        for i in range(daily.n_days)
    ])
    if args.mask_eval is not None:
        stats = evaluate_imputation(daily, args.mask_eval, args.seed,
                                    args.temp_model, h0=h0)
        print(json.dumps(stats.as_dict()))
    coeffs = fit_temp_model(daily, h0, TempModel(args.temp_model))
    filled, summary = impute_daily(daily, coeffs, h0)
    write_daily_csv(filled, args.station, args.out)
    print(json.dumps({"n_filled": summary.n_filled,
                      "n_unfillable": summary.n_unfillable,
                      "a": coeffs.a, "b": coeffs.b}))
    return 0


def _cmd_synth(args) -> int:
    position = GeoPosition(args.lat, args.lon, args.alt)
    hourly, daily, meta = synthesize_station(
        seed=args.seed,
        n_days=args.days,
        cloud_regime=args.regime,
        gap_fraction=args.gap_fraction,
        position=position,
        start_date=dt.date.fromisoformat(args.start),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_hourly_csv(hourly, meta.code, "irradiance", out / "hourly.csv")
    write_daily_csv(daily, meta.code, out / "daily.csv")
    (out / "station.json").write_text(json.dumps({
        "code": meta.code,
        "name": meta.name,
        "latitude_deg": meta.position.latitude_deg,
        "longitude_deg": meta.position.longitude_deg,
        "altitude_m": meta.position.altitude_m,
        "region": meta.region.value,
        "period": [meta.period[0].isoformat(), meta.period[1].isoformat()],
    }, indent=2) + "\n")
    print(f"wrote synthetic station {meta.code} to {out}")
    return 0


def _cmd_gradcheck(args) -> int:
    kinds = MODEL_KINDS if args.model == "all" else (args.model,)
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    failed = False
    for kind in kinds:
        worst = 0.0
        for _ in range(args.instances):
            cfg = NetConfig(kind=kind, input_size=10, output_size=3,
                            hidden_size=8, seed=int(rng.integers(0, 2**31)))
            model = init_model(cfg)
            x = rng.normal(0.5, 0.3, cfg.input_size)
            y = rng.normal(0.5, 0.3, cfg.output_size)
            worst = max(worst, gradient_check(model, x, y, epsilon=args.epsilon))
        bound = GRADCHECK_THRESHOLDS[kind]
        ok = worst < bound
        failed |= not ok
        print(f"{kind}: max relative gradient error {worst:.3e} "
              f"(bound {bound:.0e}) -> {'ok' if ok else 'FAIL'}")
    print(f"checked {args.instances} instances per model "
          f"in {time.perf_counter() - t0:.1f}s")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forecast",
        description="Solar irradiance/insolation forecasting pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full prequential run from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--qc-report", default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("qc", help="quality-control an hourly irradiance CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--station", required=True)
    p.add_argument("--variable", default="irradiance")
    p.add_argument("--lat", type=float, required=True)
    p.add_argument("--lon", type=float, required=True)
    p.add_argument("--alt", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.add_argument("--qc-report", default=None)
    p.set_defaults(func=_cmd_qc)

    p = sub.add_parser("impute", help="fill gaps in an ingested series")
    p.add_argument("--input", required=True)
    p.add_argument("--station", required=True)
    p.add_argument("--impute", choices=["hourly", "daily"], required=True)
    p.add_argument("--variable", default="kc",
                   help="hourly variable name (must be a clear-sky-index series)")
    p.add_argument("--temp-model", choices=[m.value for m in TempModel],
                   default="logistic")
    p.add_argument("--mask-eval", type=float, default=None,
                   help="holdout fraction for imputation-quality evaluation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lat", type=float, default=0.0)
    p.add_argument("--lon", type=float, default=0.0)
    p.add_argument("--alt", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_impute)

    p = sub.add_parser("synth", help="generate a synthetic station")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=int, default=120)
    p.add_argument("--regime", default="mixed")
    p.add_argument("--gap-fraction", type=float, default=0.0)
    p.add_argument("--lat", type=float, default=1.41)
    p.add_argument("--lon", type=float, default=-78.28)
    p.add_argument("--alt", type=float, default=512.0)
    p.add_argument("--start", default="2015-01-01")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("gradcheck", help="compare analytic and numeric gradients")
    p.add_argument("--model", choices=("all",) + MODEL_KINDS, default="all")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.set_defaults(func=_cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, FileNotFoundError, json.JSONDecodeError, KeyError,
            TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
