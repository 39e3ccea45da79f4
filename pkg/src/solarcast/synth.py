"""Synthetic weather-station fixture: a seeded bounded AR(1) clear-sky-index
process rendered to physical irradiance through the clear-sky model, with
configurable cloud regime and injected gaps (long runs, scattered slots and
guaranteed one-size gaps).

Slots where the sun is at or below the horizon carry no measurement; they
count toward the requested gap budget, so the realized missing share tracks
``gap_fraction`` closely whenever it exceeds the night share.
"""

import datetime as dt
from typing import Union

import numpy as np

from .data import (
    DailySeries,
    DayClass,
    HourlySeries,
    Provenance,
    Region,
    SeriesUnit,
    StationMeta,
)
from .solar import (
    DAY_HOURS,
    HOURS_PER_DAY,
    GeoPosition,
    clear_sky_irradiance,
    daily_extraterrestrial_insolation,
    solar_position,
)

KC_MIN, KC_MAX = 0.05, 0.98

DAY_CLASS_MEAN_KC = {
    DayClass.CLOUDY: 0.15,
    DayClass.PARTIALLY_HIGH_CLOUD: 0.32,
    DayClass.PARTIALLY_LOW_CLOUD: 0.50,
    DayClass.SUNNY: 0.68,
    DayClass.VERY_SUNNY: 0.82,
}

REGIME_ALIASES = {
    "cloudy": {DayClass.CLOUDY: 0.7, DayClass.PARTIALLY_HIGH_CLOUD: 0.3},
    "mixed": {
        DayClass.CLOUDY: 0.15,
        DayClass.PARTIALLY_HIGH_CLOUD: 0.30,
        DayClass.PARTIALLY_LOW_CLOUD: 0.30,
        DayClass.SUNNY: 0.15,
        DayClass.VERY_SUNNY: 0.10,
    },
    "sunny": {DayClass.PARTIALLY_LOW_CLOUD: 0.2, DayClass.SUNNY: 0.5,
              DayClass.VERY_SUNNY: 0.3},
}

CloudRegime = Union[str, DayClass, dict]


def _regime_weights(cloud_regime: CloudRegime) -> tuple[list, np.ndarray]:
    if isinstance(cloud_regime, str):
        if cloud_regime in REGIME_ALIASES:
            cloud_regime = REGIME_ALIASES[cloud_regime]
        else:
            try:
                cloud_regime = DayClass[cloud_regime.upper()]
            except KeyError:
                raise ValueError(f"unknown cloud regime {cloud_regime!r}") from None
    if isinstance(cloud_regime, DayClass):
        cloud_regime = {cloud_regime: 1.0}
    classes = sorted(cloud_regime, key=int)
    weights = np.array([cloud_regime[c] for c in classes], dtype=np.float64)
    if np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError("regime weights must be nonnegative and sum > 0")
    return classes, weights / weights.sum()


def clear_sky_profile(pos: GeoPosition, julian_day: int) -> np.ndarray:
    """Per-hour clear-sky irradiance for one day; NaN where the sun is down
    or so low that the transmittance underflows to zero."""
    out = np.full(HOURS_PER_DAY, np.nan)
    for j, hour in enumerate(DAY_HOURS):
        instant = solar_position(pos, julian_day, hour)
        if instant.sin_beta > 0.0:
            icst = clear_sky_irradiance(pos, instant)
            if icst > 0.0:
                out[j] = icst
    return out


def _inject_gaps(rng, flags: np.ndarray, gap_fraction: float) -> None:
    """Turn measured slots missing until the total missing share reaches
    gap_fraction, mixing a few long runs, explicit one-size gaps and
    scattered singles. Mutates `flags` (shape n_days x 13) in place."""
    flat = flags.reshape(-1)
    n_total = flat.size
    target = int(round(gap_fraction * n_total))
    already = int((flat == Provenance.MISSING).sum())
    budget = target - already
    if budget <= 0:
        return
    measured = flat == Provenance.MEASURED
    protected = np.zeros(n_total, dtype=bool)

    def knock_out(idx):
        flat[idx] = Provenance.MISSING
        measured[idx] = False

    # guaranteed one-size gaps: missing slot with measured neighbours kept
    n_singles = min(max(3, budget // 500), budget)
    candidates = np.flatnonzero(
        measured[1:-1] & measured[:-2] & measured[2:]) + 1
    rng.shuffle(candidates)
    placed = 0
    for idx in candidates:
        if placed >= n_singles:
            break
        if protected[idx] or not measured[idx]:
            continue
        if not (measured[idx - 1] and measured[idx + 1]):
            continue
        knock_out(idx)
        protected[idx - 1] = protected[idx + 1] = True
        placed += 1
    budget -= placed

    # a few long contiguous runs covering roughly 30% of what remains
    run_budget = int(0.3 * budget)
    n_runs = 3 if run_budget >= 150 else (1 if run_budget >= 20 else 0)
    for _ in range(n_runs):
        per_run = run_budget // n_runs
        start = int(rng.integers(0, max(1, n_total - per_run)))
        idx = start
        taken = 0
        while taken < per_run and idx < n_total and budget > 0:
            if measured[idx] and not protected[idx]:
                knock_out(idx)
                taken += 1
                budget -= 1
            idx += 1

    # scatter the remainder
    if budget > 0:
        pool = np.flatnonzero(measured & ~protected)
        if budget > pool.size:
            pool = np.flatnonzero(measured)
        picked = rng.choice(pool, size=min(budget, pool.size), replace=False)
        for idx in picked:
            knock_out(int(idx))


def synthesize_station(
    seed: int,
    n_days: int,
    cloud_regime: CloudRegime = "mixed",
    gap_fraction: float = 0.0,
    position: GeoPosition = GeoPosition(1.41, -78.28, 512.0),
    start_date: dt.date = dt.date(2015, 1, 1),
    ar_phi: float = 0.9,
    ar_sigma: float = 0.10,
    station_code: str = "SYN",
    region: Region = Region.PACIFIC,
) -> tuple[HourlySeries, DailySeries, StationMeta]:
    """Generate one station's hourly irradiance and daily insolation series.

    The hourly clear-sky index follows a bounded AR(1) (stationary standard
    deviation `ar_sigma`) around a per-day mean drawn from the cloud-regime
    mix. The daily temperature range is positively tied to the day's
    clearness so the temperature-based imputation models have signal.
    """
    if n_days < 30:
        raise ValueError(f"need at least 30 days, got {n_days}")
    if not 0.0 <= gap_fraction <= 0.95:
        raise ValueError(f"gap_fraction out of range: {gap_fraction}")
    if not 0.0 <= ar_phi < 1.0:
        raise ValueError(f"ar_phi must be in [0, 1): {ar_phi}")
    rng = np.random.default_rng(seed)
    classes, weights = _regime_weights(cloud_regime)
    day_classes = rng.choice(len(classes), size=n_days, p=weights)
    day_mean = np.array([DAY_CLASS_MEAN_KC[classes[i]] for i in day_classes])

    innov_sigma = ar_sigma * np.sqrt(1.0 - ar_phi * ar_phi)
    noise = rng.normal(0.0, innov_sigma, size=n_days * HOURS_PER_DAY)
    z = np.empty(n_days * HOURS_PER_DAY)
    z[0] = rng.normal(0.0, ar_sigma)
    for t in range(1, z.size):
        z[t] = ar_phi * z[t - 1] + noise[t]
    kc = np.clip(np.repeat(day_mean, HOURS_PER_DAY) + z, KC_MIN, KC_MAX)
    kc = kc.reshape(n_days, HOURS_PER_DAY)

    values = np.full((n_days, HOURS_PER_DAY), np.nan)
    flags = np.full((n_days, HOURS_PER_DAY), Provenance.MISSING, dtype=np.int8)
    h_true = np.zeros(n_days)
    h0 = np.empty(n_days)
    for i in range(n_days):
        day = start_date + dt.timedelta(days=i)
        julian = day.timetuple().tm_yday
        profile = clear_sky_profile(position, julian)
        daylight = np.isfinite(profile)
        values[i, daylight] = kc[i, daylight] * profile[daylight]
        flags[i, daylight] = Provenance.MEASURED
        h_true[i] = np.nansum(values[i])
        h0[i] = daily_extraterrestrial_insolation(position, julian)

    _inject_gaps(rng, flags, gap_fraction)
    values[flags == Provenance.MISSING] = np.nan
    hourly = HourlySeries(start_date=start_date, values=values, flags=flags,
                          unit=SeriesUnit.IRRADIANCE)

    kt = h_true / h0
    delta_t = np.clip(4.0 + 10.0 * kt + rng.normal(0.0, 0.5, n_days), 0.5, None)
    t_min = 12.0 + rng.normal(0.0, 1.0, n_days)
    t_max = t_min + delta_t
    daily_flags = np.full(n_days, Provenance.MEASURED, dtype=np.int8)
    n_gap_days = int(round(gap_fraction * n_days))
    if n_gap_days > 0:
        gap_days = rng.choice(n_days, size=n_gap_days, replace=False)
        daily_flags[gap_days] = Provenance.MISSING
    daily_values = h_true.copy()
    daily_values[daily_flags == Provenance.MISSING] = np.nan
    daily = DailySeries(start_date=start_date, values=daily_values,
                        flags=daily_flags, t_max=t_max, t_min=t_min)

    meta = StationMeta(
        code=f"{station_code}{seed:04d}",
        name=f"synthetic station (seed {seed})",
        position=position,
        region=region,
        period=(start_date, start_date + dt.timedelta(days=n_days - 1)),
    )
    return hourly, daily, meta
