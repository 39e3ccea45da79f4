"""End-to-end prequential forecasting runs.

Hourly track: quality control -> detrend to the clear-sky index ->
rule-based gap filling -> sliding 10-day windows, where every model
forecasts the next day before any parameter update. Daily track:
temperature-model gap filling -> detrend by clear-sky insolation -> the
same walk-forward loop on one value per day.

Scores are computed only against measured targets, in both index and
physical units; a same-window persistence baseline is always reported.
"""

import csv
import datetime as dt
import json
import logging
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import arima
from .data import (
    DailySeries,
    DataError,
    HourlySeries,
    Provenance,
    Region,
    SeriesUnit,
    StationMeta,
    ingest_csv,
    missing_report,
)
from .imputation import TempModel, fit_temp_model, impute_daily, impute_hourly
from .metrics import quarter_stats, stats_to_dict
from .neural import MODEL_KINDS, NetConfig, init_model
from .qc import QcReport, apply_qc
from .solar import (
    DAY_HOURS,
    HOURS_PER_DAY,
    GeoPosition,
    daily_extraterrestrial_insolation,
)
from .synth import clear_sky_profile, synthesize_station

log = logging.getLogger(__name__)

TRACKS = ("hourly_irradiance", "daily_insolation")
ALL_MODELS = ("arima",) + MODEL_KINDS
PERSISTENCE = "persistence"


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    station: StationMeta
    track: str
    models: tuple = ALL_MODELS
    window_days: int = 10
    seed: int = 0
    learning_rate: float = 1e-2
    batch_windows: int = 10
    lstm_step_mode: str = "per_value"
    temp_model: str = TempModel.LOGISTIC.value
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.track not in TRACKS:
            raise ValueError(f"unknown track {self.track!r}")
        models = tuple(self.models)
        if not models:
            raise ValueError("at least one model is required")
        for name in models:
            if name not in ALL_MODELS:
                raise ValueError(f"unknown model {name!r}")
        object.__setattr__(self, "models", models)
        if self.window_days < 1:
            raise ValueError("window_days must be >= 1")

    def to_dict(self) -> dict:
        meta = self.station
        return {
            "station": {
                "code": meta.code,
                "name": meta.name,
                "latitude_deg": meta.position.latitude_deg,
                "longitude_deg": meta.position.longitude_deg,
                "altitude_m": meta.position.altitude_m,
                "region": meta.region.value,
                "period": [meta.period[0].isoformat(), meta.period[1].isoformat()],
            },
            "track": self.track,
            "models": list(self.models),
            "window_days": self.window_days,
            "seed": self.seed,
            "learning_rate": self.learning_rate,
            "batch_windows": self.batch_windows,
            "lstm_step_mode": self.lstm_step_mode,
            "temp_model": self.temp_model,
            "data": self.data,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RunConfig":
        st = payload["station"]
        meta = StationMeta(
            code=st["code"],
            name=st.get("name", st["code"]),
            position=GeoPosition(st["latitude_deg"], st["longitude_deg"],
                                 st.get("altitude_m", 0.0)),
            region=Region(st.get("region", "Andean")),
            period=(dt.date.fromisoformat(st["period"][0]),
                    dt.date.fromisoformat(st["period"][1])),
        )
        return cls(
            station=meta,
            track=payload["track"],
            models=tuple(payload.get("models", ALL_MODELS)),
            window_days=int(payload.get("window_days", 10)),
            seed=int(payload.get("seed", 0)),
            learning_rate=float(payload.get("learning_rate", 1e-2)),
            batch_windows=int(payload.get("batch_windows", 10)),
            lstm_step_mode=payload.get("lstm_step_mode", "per_value"),
            temp_model=payload.get("temp_model", TempModel.LOGISTIC.value),
            data=payload.get("data", {}),
        )

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Detrending
# ---------------------------------------------------------------------------

def clear_sky_grid(pos: GeoPosition, start_date: dt.date, n_days: int) -> np.ndarray:
    """(n_days, 13) clear-sky irradiance, NaN where the sun is down."""
    grid = np.empty((n_days, HOURS_PER_DAY))
    for i in range(n_days):
        julian = (start_date + dt.timedelta(days=i)).timetuple().tm_yday
        grid[i] = clear_sky_profile(pos, julian)
    return grid


def detrend_hourly(series: HourlySeries, pos: GeoPosition) -> HourlySeries:
    """Divide each slot by its clear-sky irradiance; provenance carries over.

    Values at slots without a defined clear-sky baseline become missing
    (quality control removes these upfront, so this only warns on raw data).
    """
    if series.unit is not SeriesUnit.IRRADIANCE:
        raise ValueError("detrend expects an irradiance series")
    icst = clear_sky_grid(pos, series.start_date, series.n_days)
    values = series.values / icst
    flags = series.flags.copy()
    undefined = ~np.isfinite(icst) & (flags != Provenance.MISSING)
    if np.any(undefined):
        log.warning("dropping %d values with no clear-sky baseline",
                    int(undefined.sum()))
        flags[undefined] = Provenance.MISSING
    values[flags == Provenance.MISSING] = np.nan
    return series.replace(values=values, flags=flags, unit=SeriesUnit.KC)


def retrend_hourly(kc_values: np.ndarray, icst_row: np.ndarray) -> np.ndarray:
    """Physical irradiance from an index forecast: max(0, kc) * I_cst,
    zero where the sun is down."""
    phys = np.maximum(np.asarray(kc_values, dtype=np.float64), 0.0) * icst_row
    return np.where(np.isfinite(icst_row), phys, 0.0)


def detrend(series, pos: GeoPosition):
    """Track-generic detrend: hourly grids by clear-sky irradiance, daily
    series by clear-sky insolation."""
    if isinstance(series, HourlySeries):
        return detrend_hourly(series, pos)
    if isinstance(series, DailySeries):
        h_clear = np.array([
            clear_sky_insolation_for(pos, series.date_for(i))
            for i in range(series.n_days)
        ])
        values = series.values / h_clear
        return series.replace(values=values, unit=SeriesUnit.KC)
    raise TypeError(f"cannot detrend {type(series).__name__}")


def retrend(kc_forecast, pos: GeoPosition, date: dt.date):
    """Invert detrending for a forecast aligned to one date: 13 hourly
    values for the hourly track, or a scalar daily insolation."""
    julian = date.timetuple().tm_yday
    kc_forecast = np.asarray(kc_forecast, dtype=np.float64)
    if kc_forecast.ndim == 1 and kc_forecast.size == HOURS_PER_DAY:
        return retrend_hourly(kc_forecast, clear_sky_profile(pos, julian))
    return max(0.0, float(kc_forecast)) * clear_sky_insolation_for(pos, date)


def clear_sky_insolation_for(pos: GeoPosition, date: dt.date) -> float:
    profile = clear_sky_profile(pos, date.timetuple().tm_yday)
    return float(np.nansum(profile))


# ---------------------------------------------------------------------------
# Data preparation
# ---------------------------------------------------------------------------

@dataclass
class Prepared:
    """Model-ready series plus everything needed to score and report."""

    track: str
    start_date: dt.date
    n_days: int
    index_values: np.ndarray   # (n, 13) kc or (n,) kt, gap-free
    index_flags: np.ndarray    # matching provenance, no missing entries
    phys_obs: np.ndarray       # measured physical values, NaN elsewhere
    phys_scale: np.ndarray     # (n, 13) I_cst or (n,) clear-sky insolation
    qc_report: Optional[QcReport]
    missing_pre: dict
    imputation: dict


def _load_hourly(config: RunConfig) -> HourlySeries:
    data = config.data or {}
    if "synthetic" in data:
        opts = dict(data["synthetic"])
        hourly, _, _ = synthesize_station(
            seed=config.seed,
            n_days=int(opts.get("n_days", 120)),
            cloud_regime=opts.get("cloud_regime", "mixed"),
            gap_fraction=float(opts.get("gap_fraction", 0.0)),
            position=config.station.position,
            start_date=config.station.period[0],
            ar_phi=float(opts.get("ar_phi", 0.9)),
            ar_sigma=float(opts.get("ar_sigma", 0.10)),
        )
        return hourly
    if "csv" in data:
        opts = dict(data["csv"])
        result = ingest_csv(opts["path"])
        return result.hourly_series(config.station.code,
                                    opts.get("variable", "irradiance"))
    raise DataError("config.data must provide 'synthetic' or 'csv'")


def _load_daily(config: RunConfig) -> DailySeries:
    data = config.data or {}
    if "synthetic" in data:
        opts = dict(data["synthetic"])
        _, daily, _ = synthesize_station(
            seed=config.seed,
            n_days=int(opts.get("n_days", 120)),
            cloud_regime=opts.get("cloud_regime", "mixed"),
            gap_fraction=float(opts.get("gap_fraction", 0.0)),
            position=config.station.position,
            start_date=config.station.period[0],
            ar_phi=float(opts.get("ar_phi", 0.9)),
            ar_sigma=float(opts.get("ar_sigma", 0.10)),
        )
        return daily
    if "csv" in data:
        opts = dict(data["csv"])
        result = ingest_csv(opts["path"])
        return result.daily_series(
            config.station.code,
            insolation_var=opts.get("insolation_var", "insolation"),
            tmax_var=opts.get("tmax_var", "tmax"),
            tmin_var=opts.get("tmin_var", "tmin"),
        )
    raise DataError("config.data must provide 'synthetic' or 'csv'")


def prepare(config: RunConfig) -> Prepared:
    """Load, clean and detrend the configured track into model-ready arrays."""
    pos = config.station.position
    if config.track == "hourly_irradiance":
        raw = _load_hourly(config)
        qc_series, qc_report = apply_qc(raw, pos)
        missing_pre = missing_report(qc_series).as_dict()
        kc_gappy = detrend_hourly(qc_series, pos)
        kc = impute_hourly(kc_gappy)
        phys_obs = np.where(qc_series.flags == Provenance.MEASURED,
                            qc_series.values, np.nan)
        icst = clear_sky_grid(pos, raw.start_date, raw.n_days)
        imputation = {
            "n_imputed_hourly":
                int((kc.flags == Provenance.IMPUTED).sum()),
        }
        return Prepared(
            track=config.track,
            start_date=raw.start_date,
            n_days=raw.n_days,
            index_values=kc.values.copy(),
            index_flags=kc.flags.copy(),
            phys_obs=phys_obs,
            phys_scale=icst,
            qc_report=qc_report,
            missing_pre=missing_pre,
            imputation=imputation,
        )

    raw = _load_daily(config)
    missing_pre = missing_report(raw).as_dict()
    h0 = np.array([
        daily_extraterrestrial_insolation(pos, raw.julian_day_for(i))
        for i in range(raw.n_days)
    ])
    coeffs = fit_temp_model(raw, h0, TempModel(config.temp_model))
    filled, summary = impute_daily(raw, coeffs, h0)
    if np.any(filled.flags == Provenance.MISSING):
        raise DataError(
            f"{summary.n_unfillable} days remain missing after imputation")
    h_clear = np.array([
        clear_sky_insolation_for(pos, raw.date_for(i))
        for i in range(raw.n_days)
    ])
    if np.any(h_clear <= 0.0):
        raise DataError("clear-sky insolation is not positive on some day")
    kt = filled.values / h_clear
    phys_obs = np.where(raw.flags == Provenance.MEASURED, raw.values, np.nan)
    imputation = {
        "n_imputed_daily": summary.n_filled,
        "n_unfillable_daily": summary.n_unfillable,
        "temp_model": config.temp_model,
        "coeff_a": coeffs.a,
        "coeff_b": coeffs.b,
    }
    return Prepared(
        track=config.track,
        start_date=raw.start_date,
        n_days=raw.n_days,
        index_values=kt,
        index_flags=filled.flags.copy(),
        phys_obs=phys_obs,
        phys_scale=h_clear,
        qc_report=None,
        missing_pre=missing_pre,
        imputation=imputation,
    )


# ---------------------------------------------------------------------------
# The walk-forward loop
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    config: dict
    n_steps: int
    qc: Optional[dict]
    missing_pre: dict
    imputation: dict
    models: dict            # name -> {kc: ..., phys: ..., diverged, beats_persistence}
    persistence: dict       # {kc: ..., phys: ...}
    arima_orders: list      # [target_day_index, p, d, q] per step
    runtime_s: float
    forecast_rows: list     # rows for forecasts.csv

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "n_steps": self.n_steps,
            "qc": self.qc,
            "missing_pre_imputation": self.missing_pre,
            "imputation": self.imputation,
            "models": self.models,
            "persistence": self.persistence,
            "arima_orders": self.arima_orders,
            "runtime_s": self.runtime_s,
        }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and not np.isfinite(value):
        return ""
    return repr(float(value)) if isinstance(value, float) else str(value)


def run_prequential(config: RunConfig) -> RunReport:
    return run_on_prepared(config, prepare(config))


def run_on_prepared(config: RunConfig, prepared: Prepared) -> RunReport:
    """Walk the series one day at a time: forecast day t+1 from the window
    ending at day t, score against measured values only, then update."""
    t_start = time.perf_counter()
    hourly = prepared.track == "hourly_irradiance"
    per_day = HOURS_PER_DAY if hourly else 1
    window = config.window_days
    n_days = prepared.n_days
    n_steps = n_days - window
    if n_steps < 1:
        raise DataError(
            f"series of {n_days} days cannot hold a {window}-day window "
            "plus a target day")

    index_matrix = prepared.index_values.reshape(n_days, per_day)
    flags_matrix = prepared.index_flags.reshape(n_days, per_day)
    phys_matrix = prepared.phys_obs.reshape(n_days, per_day)
    scale_matrix = prepared.phys_scale.reshape(n_days, per_day)

    nets = {}
    for name in config.models:
        if name == "arima":
            continue
        nets[name] = init_model(NetConfig(
            kind=name,
            input_size=window * per_day,
            output_size=per_day,
            seed=config.seed,
            learning_rate=config.learning_rate,
            batch_windows=config.batch_windows,
            lstm_step_mode=config.lstm_step_mode,
        ))

    names = list(config.models)
    preds = {name: np.empty((n_steps, per_day)) for name in names + [PERSISTENCE]}
    target_days = np.empty(n_steps, dtype=np.int64)
    arima_orders = []
    divergence_events = {name: 0 for name in nets}
    pairs_x: list[np.ndarray] = []
    pairs_y: list[np.ndarray] = []

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for step in range(n_steps):
            t_end = window - 1 + step
            target = t_end + 1
            target_days[step] = target
            x = index_matrix[t_end - window + 1:t_end + 1].reshape(-1)
            y = index_matrix[target]
            preds[PERSISTENCE][step] = index_matrix[t_end]

            for name in names:
                if name == "arima":
                    sel = arima.select_order(x)
                    arima_orders.append([int(target), *sel.order.as_tuple()])
                    preds[name][step] = arima.forecast(sel, x, per_day)
                else:
                    net = nets[name]
                    out = net.forward(x)
                    if not np.all(np.isfinite(out)):
                        out = np.zeros(per_day)
                        divergence_events[name] += 1
                        net.diverged = True
                    preds[name][step] = out

            # training happens strictly after the step's forecasts
            pairs_x.append(x)
            pairs_y.append(y)
            if len(pairs_x) >= config.batch_windows:
                bx = pairs_x[-config.batch_windows:]
                by = pairs_y[-config.batch_windows:]
                for name, net in nets.items():
                    if net.diverged:
                        continue
                    loss = net.train_step(bx, by)
                    if not np.isfinite(loss):
                        divergence_events[name] += 1
                        log.warning("model %s diverged at step %d; frozen",
                                    name, step)

    obs_index = index_matrix[target_days].reshape(-1)
    obs_flags = flags_matrix[target_days].reshape(-1)
    obs_phys = phys_matrix[target_days].reshape(-1)
    scales = scale_matrix[target_days]
    mask = obs_flags == Provenance.MEASURED
    if not np.any(mask):
        raise DataError("every target value is imputed; nothing to score")
    day_idx = np.repeat(target_days, per_day)

    def score(pred_index: np.ndarray) -> tuple[dict, dict, np.ndarray]:
        if hourly:
            pred_phys = np.vstack([
                retrend_hourly(pred_index[s], scales[s]) for s in range(n_steps)
            ])
        else:
            pred_phys = np.maximum(pred_index, 0.0) * scales
        flat_index = pred_index.reshape(-1)
        flat_phys = pred_phys.reshape(-1)
        kc_stats = quarter_stats(flat_index, obs_index, mask, day_idx, n_days)
        phys_stats = quarter_stats(flat_phys, np.nan_to_num(obs_phys),
                                   mask & np.isfinite(obs_phys), day_idx, n_days)
        return kc_stats, phys_stats, flat_phys

    persist_kc, persist_phys, persist_flat = score(preds[PERSISTENCE])
    persistence_mae = persist_kc["complete"].mae

    models_report = {}
    rows = []
    phys_flat_by_model = {PERSISTENCE: persist_flat}
    for name in names:
        kc_stats, phys_stats, flat_phys = score(preds[name])
        phys_flat_by_model[name] = flat_phys
        entry = {
            "kc": stats_to_dict(kc_stats),
            "phys": stats_to_dict(phys_stats),
            "diverged": bool(divergence_events.get(name, 0)),
        }
        if name != "arima":
            entry["beats_persistence"] = bool(
                kc_stats["complete"].mae < persistence_mae)
        models_report[name] = entry

    flat_index_by_model = {name: preds[name].reshape(-1) for name in names}
    flat_index_by_model[PERSISTENCE] = preds[PERSISTENCE].reshape(-1)
    prov_labels = np.where(obs_flags == Provenance.MEASURED, "measured", "imputed")
    for step in range(n_steps):
        date = (prepared.start_date + dt.timedelta(days=int(target_days[step])))
        for name in names + [PERSISTENCE]:
            for j in range(per_day):
                k = step * per_day + j
                rows.append([
                    date.isoformat(),
                    str(DAY_HOURS[j]) if hourly else "",
                    name,
                    _fmt(float(flat_index_by_model[name][k])),
                    _fmt(float(phys_flat_by_model[name][k])),
                    _fmt(float(obs_phys[k])) if np.isfinite(obs_phys[k]) else "",
                    prov_labels[k],
                ])

    return RunReport(
        config=config.to_dict(),
        n_steps=n_steps,
        qc=prepared.qc_report.as_dict() if prepared.qc_report else None,
        missing_pre=prepared.missing_pre,
        imputation=prepared.imputation,
        models=models_report,
        persistence={"kc": stats_to_dict(persist_kc),
                     "phys": stats_to_dict(persist_phys)},
        arima_orders=arima_orders,
        runtime_s=time.perf_counter() - t_start,
        forecast_rows=rows,
    )


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

_STAT_FIELDS = ("mae", "rmse", "mbe", "n")
_PCT_FIELDS = ("mape_pct", "mpe_pct")


def write_report_csv(report: RunReport, path) -> None:
    """One row per model x unit x scope x statistic. Percentage errors are
    only reported in physical units (index values near dawn are tiny)."""
    scopes = ("complete", "q1", "q2", "q3", "q4")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "unit", "scope", "stat", "value"])
        entries = [(name, report.models[name]) for name in sorted(report.models)]
        entries.append((PERSISTENCE, report.persistence))
        for name, entry in entries:
            for unit in ("kc", "phys"):
                stats = entry[unit]
                fields = _STAT_FIELDS + (_PCT_FIELDS if unit == "phys" else ())
                for scope in scopes:
                    block = stats.get(scope)
                    for stat in fields:
                        value = None if block is None else block.get(stat)
                        writer.writerow([name, unit, scope, stat, _fmt(value)])


def write_forecasts_csv(report: RunReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "hour", "model", "kc_pred", "phys_pred",
                         "observed", "provenance"])
        writer.writerows(report.forecast_rows)


def write_report_json(report: RunReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_json_dict(), indent=2,
                                     sort_keys=True) + "\n")
