"""Time-series containers, CSV ingestion, gap accounting and day classes.

Hourly records live on a day x 13 grid (local hours 6..18). Each slot is
measured, imputed or missing; missing slots hold NaN. Containers are
treated as immutable after construction (the arrays are write-protected),
so every transformation returns a new series.
"""

import csv
import datetime as dt
import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

from .solar import HOURS_PER_DAY, DAY_HOURS, GeoPosition

log = logging.getLogger(__name__)

CSV_HEADER = ["station", "variable", "timestamp", "value"]
PROVENANCE_LABELS = {0: "measured", 1: "imputed"}


class DataError(ValueError):
    """Unusable input data (maps to CLI exit code 2)."""


class Provenance(IntEnum):
    MEASURED = 0
    IMPUTED = 1
    MISSING = 2


class SeriesUnit(Enum):
    IRRADIANCE = "irradiance"  # Wh/m^2 per hourly slot
    KC = "kc"                  # dimensionless clear-sky index


class Region(Enum):
    PACIFIC = "Pacific"
    ANDEAN = "Andean"
    AMAZONIA = "Amazonia"


class DayClass(IntEnum):
    """Cloudiness classes over the daily clearness index, in increasing order."""

    CLOUDY = 0
    PARTIALLY_HIGH_CLOUD = 1
    PARTIALLY_LOW_CLOUD = 2
    SUNNY = 3
    VERY_SUNNY = 4


_DAY_CLASS_EDGES = [
    (0.2, DayClass.CLOUDY),
    (0.4, DayClass.PARTIALLY_HIGH_CLOUD),
    (0.6, DayClass.PARTIALLY_LOW_CLOUD),
    (0.75, DayClass.SUNNY),
    (1.0, DayClass.VERY_SUNNY),
]


def classify_day(kt: float) -> DayClass:
    """Map a clearness index in (0, 1] to its cloudiness class (upper edges
    inclusive)."""
    if not 0.0 < kt <= 1.0:
        raise ValueError(f"clearness index must be in (0, 1], got {kt}")
    for upper, cls in _DAY_CLASS_EDGES:
        if kt <= upper:
            return cls
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class StationMeta:
    code: str
    name: str
    position: GeoPosition
    region: Region
    period: tuple[dt.date, dt.date]

    def __post_init__(self):
        if not self.code:
            raise ValueError("station code must be nonempty")
        if self.period[0] > self.period[1]:
            raise ValueError(f"period start after end: {self.period}")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HourlySeries:
    """day x 13 grid of hourly values with per-slot provenance."""

    start_date: dt.date
    values: np.ndarray  # float64 (n_days, 13), NaN where missing
    flags: np.ndarray   # int8 (n_days, 13), Provenance codes
    unit: SeriesUnit

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        flags = np.array(self.flags, dtype=np.int8)
        if values.ndim != 2 or values.shape[1] != HOURS_PER_DAY:
            raise ValueError(f"values must be (n_days, 13), got {values.shape}")
        if flags.shape != values.shape:
            raise ValueError("flags shape must match values shape")
        missing = flags == Provenance.MISSING
        values[missing] = np.nan
        present = values[~missing]
        if not np.all(np.isfinite(present)):
            raise ValueError("measured/imputed values must be finite")
        if self.unit is SeriesUnit.IRRADIANCE and np.any(present < 0.0):
            raise ValueError("irradiance values must be >= 0")
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "flags", _freeze(flags))

    @property
    def n_days(self) -> int:
        return self.values.shape[0]

    def date_for(self, day_index: int) -> dt.date:
        return self.start_date + dt.timedelta(days=int(day_index))

    def julian_day_for(self, day_index: int) -> int:
        return self.date_for(day_index).timetuple().tm_yday

    def replace(self, values=None, flags=None, unit=None) -> "HourlySeries":
        return HourlySeries(
            start_date=self.start_date,
            values=self.values if values is None else values,
            flags=self.flags if flags is None else flags,
            unit=self.unit if unit is None else unit,
        )


@dataclass(frozen=True)
class DailySeries:
    """Per-day insolation (or detrended ratio) plus max/min temperature."""

    start_date: dt.date
    values: np.ndarray  # float64 (n_days,), NaN where missing
    flags: np.ndarray   # int8 (n_days,), provenance of `values`
    t_max: np.ndarray   # float64 (n_days,), NaN when absent
    t_min: np.ndarray
    unit: SeriesUnit = SeriesUnit.IRRADIANCE

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        flags = np.array(self.flags, dtype=np.int8)
        t_max = np.array(self.t_max, dtype=np.float64)
        t_min = np.array(self.t_min, dtype=np.float64)
        n = values.shape[0]
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if flags.shape != (n,) or t_max.shape != (n,) or t_min.shape != (n,):
            raise ValueError("flags/t_max/t_min must match values length")
        missing = flags == Provenance.MISSING
        values[missing] = np.nan
        present = values[~missing]
        if not np.all(np.isfinite(present)):
            raise ValueError("non-missing insolation values must be finite")
        if self.unit is SeriesUnit.IRRADIANCE and np.any(present < 0.0):
            raise ValueError("insolation must be >= 0")
        both = np.isfinite(t_max) & np.isfinite(t_min)
        if np.any(t_max[both] < t_min[both]):
            raise ValueError("t_max must be >= t_min wherever both are present")
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "flags", _freeze(flags))
        object.__setattr__(self, "t_max", _freeze(t_max))
        object.__setattr__(self, "t_min", _freeze(t_min))

    @property
    def n_days(self) -> int:
        return self.values.shape[0]

    def date_for(self, day_index: int) -> dt.date:
        return self.start_date + dt.timedelta(days=int(day_index))

    def julian_day_for(self, day_index: int) -> int:
        return self.date_for(day_index).timetuple().tm_yday

    def replace(self, values=None, flags=None, unit=None) -> "DailySeries":
        return DailySeries(
            start_date=self.start_date,
            values=self.values if values is None else values,
            flags=self.flags if flags is None else flags,
            t_max=self.t_max,
            t_min=self.t_min,
            unit=self.unit if unit is None else unit,
        )


# ---------------------------------------------------------------------------
# Gap accounting
# ---------------------------------------------------------------------------

def quarter_spans(n_days: int) -> list[tuple[int, int]]:
    """Four contiguous day-index spans of as-equal-as-possible length;
    remainder days go to the earlier quarters. Spans are (start, stop]."""
    base, rem = divmod(n_days, 4)
    spans = []
    start = 0
    for q in range(4):
        length = base + (1 if q < rem else 0)
        spans.append((start, start + length))
        start += length
    return spans


@dataclass(frozen=True)
class MissingReport:
    n_measured: int
    n_imputed: int
    n_missing: int
    n_total: int
    pct_missing: float
    per_quarter: tuple[int, int, int, int]
    longest_gap: int
    one_size_gap_count: int

    def as_dict(self) -> dict:
        return {
            "n_measured": self.n_measured,
            "n_imputed": self.n_imputed,
            "n_missing": self.n_missing,
            "n_total": self.n_total,
            "pct_missing": self.pct_missing,
            "per_quarter": list(self.per_quarter),
            "longest_gap": self.longest_gap,
            "one_size_gap_count": self.one_size_gap_count,
        }


def missing_report(series) -> MissingReport:
    """Count measured/imputed/missing slots, per-quarter missing totals, the
    longest missing run and the number of one-slot gaps flanked by known
    values (all in chronological day-major order)."""
    flags = np.asarray(series.flags)
    if flags.size == 0:
        raise DataError("missing_report needs a nonempty series")
    n_days = flags.shape[0]
    flat = flags.reshape(-1)
    missing = flat == Provenance.MISSING
    n_missing = int(missing.sum())
    n_measured = int((flat == Provenance.MEASURED).sum())
    n_imputed = int((flat == Provenance.IMPUTED).sum())

    per_day = missing.reshape(n_days, -1).sum(axis=1)
    per_quarter = tuple(
        int(per_day[a:b].sum()) for a, b in quarter_spans(n_days)
    )

    longest = 0
    one_size = 0
    run = 0
    for idx, m in enumerate(missing):
        if m:
            run += 1
            longest = max(longest, run)
        else:
            if run == 1 and idx - 2 >= 0 and not missing[idx - 2]:
                one_size += 1
            run = 0
    # a trailing run never counts as a one-size gap (no right neighbour)
    return MissingReport(
        n_measured=n_measured,
        n_imputed=n_imputed,
        n_missing=n_missing,
        n_total=int(flat.size),
        pct_missing=100.0 * n_missing / flat.size,
        per_quarter=per_quarter,
        longest_gap=longest,
        one_size_gap_count=one_size,
    )


# ---------------------------------------------------------------------------
# CSV ingestion / serialization
# ---------------------------------------------------------------------------

@dataclass
class _RawColumn:
    timestamps: list = field(default_factory=list)   # dt.date or dt.datetime
    values: list = field(default_factory=list)
    provenance: list = field(default_factory=list)   # Provenance ints


@dataclass
class IngestResult:
    hourly: dict
    daily: dict
    n_rows: int
    n_dropped: int
    n_duplicates: int

    def hourly_series(self, station: str, variable: str) -> HourlySeries:
        key = (station, variable)
        if key not in self.hourly:
            raise DataError(f"no hourly data for station={station!r} variable={variable!r}")
        return self.hourly[key]

    def daily_series(self, station: str, insolation_var: str = "insolation",
                     tmax_var: str = "tmax", tmin_var: str = "tmin") -> DailySeries:
        ins = self.daily.get((station, insolation_var))
        if ins is None:
            raise DataError(
                f"no daily data for station={station!r} variable={insolation_var!r}")
        start, end = ins["start"], ins["end"]
        for var in (tmax_var, tmin_var):
            col = self.daily.get((station, var))
            if col is not None:
                start = min(start, col["start"])
                end = max(end, col["end"])
        n = (end - start).days + 1

        def lay_out(col, fill):
            out = np.full(n, fill)
            fl = np.full(n, Provenance.MISSING, dtype=np.int8)
            if col is not None:
                for d, v, p in zip(col["dates"], col["values"], col["provenance"]):
                    i = (d - start).days
                    out[i] = v
                    fl[i] = p
            return out, fl

        values, flags = lay_out(ins, np.nan)
        t_max, _ = lay_out(self.daily.get((station, tmax_var)), np.nan)
        t_min, _ = lay_out(self.daily.get((station, tmin_var)), np.nan)
        both = np.isfinite(t_max) & np.isfinite(t_min)
        bad = both & (t_max < t_min)
        if np.any(bad):
            log.warning("dropping %d temperature pairs with t_max < t_min", bad.sum())
            t_max[bad] = np.nan
            t_min[bad] = np.nan
        return DailySeries(start_date=start, values=values, flags=flags,
                           t_max=t_max, t_min=t_min)


def _parse_timestamp(text: str):
    """Return a date (daily sample) or datetime (hourly sample), else None."""
    try:
        if len(text) == 10:
            return dt.date.fromisoformat(text)
        stamp = dt.datetime.fromisoformat(text)
    except ValueError:
        return None
    if stamp.minute != 0 or stamp.second != 0 or stamp.microsecond != 0:
        return None
    return stamp


def ingest_csv(path, kc_variables: tuple = ("kc",)) -> IngestResult:
    """Read a `station,variable,timestamp,value[,provenance]` CSV.

    Rows missing any essential field, or otherwise unparseable, are dropped
    and counted. Duplicate (station, variable, timestamp) keys keep the
    first occurrence. Timestamps with a time-of-day produce hourly series;
    date-only timestamps produce daily columns.
    """
    seen = set()
    columns: dict = {}
    n_rows = n_dropped = n_duplicates = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return IngestResult({}, {}, 0, 0, 0)
        if [h.strip().lower() for h in header[:4]] != CSV_HEADER:
            raise DataError(f"unexpected CSV header {header!r} in {path}")
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            n_rows += 1
            if len(row) < 4:
                n_dropped += 1
                continue
            station, variable, ts_text, value_text = (c.strip() for c in row[:4])
            prov = Provenance.MEASURED
            if len(row) >= 5 and row[4].strip():
                label = row[4].strip().lower()
                if label == "imputed":
                    prov = Provenance.IMPUTED
                elif label != "measured":
                    n_dropped += 1
                    continue
            if not station or not variable or not ts_text or not value_text:
                n_dropped += 1
                continue
            stamp = _parse_timestamp(ts_text)
            if stamp is None:
                n_dropped += 1
                continue
            try:
                value = float(value_text)
            except ValueError:
                n_dropped += 1
                continue
            if not np.isfinite(value):
                n_dropped += 1
                continue
            key = (station, variable, ts_text)
            if key in seen:
                n_duplicates += 1
                log.warning("duplicate row for %s kept-first", key)
                continue
            seen.add(key)
            columns.setdefault((station, variable), _RawColumn())
            col = columns[(station, variable)]
            col.timestamps.append(stamp)
            col.values.append(value)
            col.provenance.append(int(prov))

    hourly: dict = {}
    daily: dict = {}
    for (station, variable), col in sorted(columns.items()):
        stamps = col.timestamps
        is_hourly = [isinstance(s, dt.datetime) for s in stamps]
        n_hourly = sum(is_hourly)
        want_hourly = n_hourly * 2 >= len(stamps)
        if 0 < n_hourly < len(stamps):
            log.warning("mixed timestamp kinds for %s/%s; keeping %s rows",
                        station, variable, "hourly" if want_hourly else "daily")
        same_kind = [
            (s, v, p)
            for s, v, p, h in zip(stamps, col.values, col.provenance, is_hourly)
            if h == want_hourly
        ]
        n_dropped += len(stamps) - len(same_kind)
        if want_hourly:
            keep = [(s, v, p) for s, v, p in same_kind if 6 <= s.hour <= 18]
            n_dropped += len(same_kind) - len(keep)
            if not keep:
                continue
            dates = [s.date() for s, _, _ in keep]
            start, end = min(dates), max(dates)
            n = (end - start).days + 1
            values = np.full((n, HOURS_PER_DAY), np.nan)
            flags = np.full((n, HOURS_PER_DAY), Provenance.MISSING, dtype=np.int8)
            for stamp, value, prov in keep:
                i = (stamp.date() - start).days
                j = stamp.hour - DAY_HOURS[0]
                values[i, j] = value
                flags[i, j] = prov
            unit = SeriesUnit.KC if variable in kc_variables else SeriesUnit.IRRADIANCE
            hourly[(station, variable)] = HourlySeries(
                start_date=start, values=values, flags=flags, unit=unit)
        else:
            keep = same_kind
            if not keep:
                continue
            keep.sort(key=lambda t: t[0])
            daily[(station, variable)] = {
                "start": keep[0][0],
                "end": keep[-1][0],
                "dates": [s for s, _, _ in keep],
                "values": [v for _, v, _ in keep],
                "provenance": [p for _, _, p in keep],
            }
    return IngestResult(hourly=hourly, daily=daily, n_rows=n_rows,
                        n_dropped=n_dropped, n_duplicates=n_duplicates)


def write_hourly_csv(series: HourlySeries, station: str, variable: str, path) -> None:
    """Serialize non-missing slots back to the ingest schema plus provenance.

    Values are written with repr() so measured data round-trips bit-exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER + ["provenance"])
        for i in range(series.n_days):
            day = series.date_for(i)
            for j, hour in enumerate(DAY_HOURS):
                flag = int(series.flags[i, j])
                if flag == Provenance.MISSING:
                    continue
                stamp = f"{day.isoformat()}T{hour:02d}:00:00"
                writer.writerow([station, variable, stamp,
                                 repr(float(series.values[i, j])),
                                 PROVENANCE_LABELS[flag]])


def write_daily_csv(daily: DailySeries, station: str, path,
                    insolation_var: str = "insolation",
                    tmax_var: str = "tmax", tmin_var: str = "tmin") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER + ["provenance"])
        for i in range(daily.n_days):
            day = daily.date_for(i).isoformat()
            flag = int(daily.flags[i])
            if flag != Provenance.MISSING:
                writer.writerow([station, insolation_var, day,
                                 repr(float(daily.values[i])),
                                 PROVENANCE_LABELS[flag]])
            if np.isfinite(daily.t_max[i]):
                writer.writerow([station, tmax_var, day,
                                 repr(float(daily.t_max[i])), "measured"])
            if np.isfinite(daily.t_min[i]):
                writer.writerow([station, tmin_var, day,
                                 repr(float(daily.t_min[i])), "measured"])
