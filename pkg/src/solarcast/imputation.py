"""Gap filling: neighbour-averaging rules on hourly clear-sky-index grids
and temperature-driven models for daily insolation, plus a seeded
mask-and-compare evaluation of imputation quality.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import DailySeries, DataError, HourlySeries, Provenance, SeriesUnit
from .metrics import ErrorStats, compute_stats

log = logging.getLogger(__name__)

FIRST_DAY_FILL = 1.0
NEWTON_TOL = 1e-8
NEWTON_MAX_ITER = 100


class TempModel(Enum):
    HARGREAVES_SAMANI = "hs"
    LOGISTIC = "logistic"


@dataclass(frozen=True)
class TempModelCoeffs:
    model: TempModel
    a: float
    b: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("coefficients must be finite")
        if self.model is TempModel.HARGREAVES_SAMANI and self.a <= 0.0:
            raise ValueError(f"Hargreaves-Samani coefficient must be > 0, got {self.a}")

    def ratio(self, delta_t: np.ndarray) -> np.ndarray:
        """Predicted insolation fraction of the extraterrestrial total."""
        delta_t = np.asarray(delta_t, dtype=np.float64)
        if self.model is TempModel.HARGREAVES_SAMANI:
            return np.clip(self.a * np.sqrt(np.maximum(delta_t, 0.0)), 0.0, 1.0)
        return 1.0 / (1.0 + np.exp(-(self.a + self.b * delta_t)))


# ---------------------------------------------------------------------------
# Hourly rules
# ---------------------------------------------------------------------------

def impute_hourly(series: HourlySeries) -> HourlySeries:
    """Fill every missing slot of a kc grid, in chronological order.

    First-day gaps become 1.0. Later gaps average the previous day's value
    at the same hour with the current day's neighbours: at 6 h the pending
    7 h value (skipped if itself missing), at 18 h the already-filled 17 h
    value, and in between both adjacent hours, dropping the next hour when
    it is missing. Earlier fills of the same day feed later ones.
    """
    if series.unit is not SeriesUnit.KC:
        raise ValueError("hourly imputation expects a clear-sky-index series")
    values = series.values.copy()
    flags = series.flags.copy()
    n_days, n_hours = values.shape
    last = n_hours - 1

    def fill(day, col, value):
        values[day, col] = value
        flags[day, col] = Provenance.IMPUTED

    for j in range(n_hours):
        if flags[0, j] == Provenance.MISSING:
            fill(0, j, FIRST_DAY_FILL)
    for d in range(1, n_days):
        if flags[d, 0] == Provenance.MISSING:
            parts = [values[d - 1, 0]]
            if flags[d, 1] != Provenance.MISSING:
                parts.append(values[d, 1])
            fill(d, 0, sum(parts) / len(parts))
        for j in range(1, last):
            if flags[d, j] != Provenance.MISSING:
                continue
            parts = [values[d - 1, j], values[d, j - 1]]
            if flags[d, j + 1] != Provenance.MISSING:
                parts.append(values[d, j + 1])
            fill(d, j, sum(parts) / len(parts))
        if flags[d, last] == Provenance.MISSING:
            fill(d, last, (values[d, last - 1] + values[d - 1, last]) / 2.0)
    return series.replace(values=values, flags=flags)


# ---------------------------------------------------------------------------
# Daily temperature models
# ---------------------------------------------------------------------------

def _training_rows(daily: DailySeries, h0: np.ndarray):
    h0 = np.asarray(h0, dtype=np.float64)
    if h0.shape != (daily.n_days,):
        raise ValueError("h0 must provide one value per day")
    usable = ((daily.flags == Provenance.MEASURED)
              & np.isfinite(daily.t_max) & np.isfinite(daily.t_min)
              & (h0 > 0.0))
    delta_t = daily.t_max - daily.t_min
    negative = usable & (delta_t < 0.0)
    if np.any(negative):
        log.warning("skipping %d rows with negative temperature range",
                    int(negative.sum()))
        usable &= delta_t >= 0.0
    return delta_t[usable], daily.values[usable] / h0[usable]


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def fit_temp_model(daily: DailySeries, h0, model: TempModel,
                   min_days: int = 30) -> TempModelCoeffs:
    """Fit the insolation-fraction model on measured days.

    Hargreaves-Samani has the closed-form least-squares solution
    a = sum(y*x) / sum(x^2) with x = sqrt(t_max - t_min). The logistic
    model minimizes squared error by damped Newton iteration, started at
    a = logit(mean(y)), b = 0.
    """
    delta_t, y = _training_rows(daily, h0)
    if delta_t.size < min_days:
        raise DataError(
            f"need at least {min_days} complete days to fit, have {delta_t.size}")
    if model is TempModel.HARGREAVES_SAMANI:
        x = np.sqrt(delta_t)
        denom = float(np.sum(x * x))
        if denom <= 0.0:
            raise DataError("temperature range is zero on every training day")
        return TempModelCoeffs(model, float(np.sum(y * x)) / denom)

    mean_y = float(np.clip(np.mean(y), 1e-6, 1.0 - 1e-6))
    theta = np.array([math.log(mean_y / (1.0 - mean_y)), 0.0])

    def objective(t):
        r = _sigmoid(t[0] + t[1] * delta_t) - y
        return float(np.sum(r * r))

    f_cur = objective(theta)
    for _ in range(NEWTON_MAX_ITER):
        s = _sigmoid(theta[0] + theta[1] * delta_t)
        r = s - y
        sp = s * (1.0 - s)                  # sigma'
        spp = sp * (1.0 - 2.0 * s)          # sigma''
        g = 2.0 * np.array([np.sum(r * sp), np.sum(r * sp * delta_t)])
        w = sp * sp + r * spp
        hess = 2.0 * np.array([
            [np.sum(w), np.sum(w * delta_t)],
            [np.sum(w * delta_t), np.sum(w * delta_t * delta_t)],
        ])
        try:
            step = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            step = -g
        if not np.all(np.isfinite(step)):
            step = -g
        scale = 1.0
        while scale > 1e-12:
            cand = theta + scale * step
            f_cand = objective(cand)
            if f_cand <= f_cur:
                break
            scale *= 0.5
        else:
            break
        theta = theta + scale * step
        f_cur = f_cand
        if float(np.linalg.norm(scale * step)) < NEWTON_TOL:
            break
    return TempModelCoeffs(model, float(theta[0]), float(theta[1]))


@dataclass(frozen=True)
class DailyImputationSummary:
    n_filled: int
    n_unfillable: int


def impute_daily(daily: DailySeries, coeffs: TempModelCoeffs,
                 h0) -> tuple[DailySeries, DailyImputationSummary]:
    """Fill missing insolation from the temperature range; days without a
    usable temperature pair (or non-positive extraterrestrial total) stay
    missing and are counted."""
    h0 = np.asarray(h0, dtype=np.float64)
    if h0.shape != (daily.n_days,):
        raise ValueError("h0 must provide one value per day")
    values = daily.values.copy()
    flags = daily.flags.copy()
    missing = flags == Provenance.MISSING
    fillable = (missing & np.isfinite(daily.t_max) & np.isfinite(daily.t_min)
                & (h0 > 0.0))
    delta_t = daily.t_max[fillable] - daily.t_min[fillable]
    values[fillable] = coeffs.ratio(delta_t) * h0[fillable]
    flags[fillable] = Provenance.IMPUTED
    summary = DailyImputationSummary(
        n_filled=int(fillable.sum()),
        n_unfillable=int((missing & ~fillable).sum()),
    )
    return daily.replace(values=values, flags=flags), summary


# ---------------------------------------------------------------------------
# Holdout evaluation
# ---------------------------------------------------------------------------

def evaluate_imputation(series, mask_fraction: float, seed: int, method: str,
                        h0=None) -> ErrorStats:
    """Mask a seeded random sample of measured values, impute, and score the
    imputed values against the held-out truth.

    `method` is "hourly" for the kc-grid rules, or "hs"/"logistic" for the
    daily temperature models (these refit on the unmasked days).
    """
    if not 0.0 < mask_fraction <= 0.5:
        raise ValueError(f"mask_fraction must be in (0, 0.5], got {mask_fraction}")
    rng = np.random.default_rng(seed)

    if method == "hourly":
        if not isinstance(series, HourlySeries):
            raise ValueError("hourly evaluation needs an HourlySeries")
        measured = np.argwhere(series.flags == Provenance.MEASURED)
        if measured.shape[0] == 0:
            raise DataError("nothing maskable: no measured slots")
        n_mask = max(1, int(round(mask_fraction * measured.shape[0])))
        picked = measured[rng.choice(measured.shape[0], size=n_mask, replace=False)]
        values = series.values.copy()
        flags = series.flags.copy()
        truth = series.values[picked[:, 0], picked[:, 1]].copy()
        values[picked[:, 0], picked[:, 1]] = np.nan
        flags[picked[:, 0], picked[:, 1]] = Provenance.MISSING
        refilled = impute_hourly(series.replace(values=values, flags=flags))
        estimate = refilled.values[picked[:, 0], picked[:, 1]]
        return compute_stats(estimate, truth)

    if method in (TempModel.HARGREAVES_SAMANI.value, TempModel.LOGISTIC.value):
        if not isinstance(series, DailySeries):
            raise ValueError("daily evaluation needs a DailySeries")
        if h0 is None:
            raise ValueError("daily evaluation needs per-day h0")
        measured = np.flatnonzero(series.flags == Provenance.MEASURED)
        if measured.size == 0:
            raise DataError("nothing maskable: no measured days")
        n_mask = max(1, int(round(mask_fraction * measured.size)))
        picked = rng.choice(measured, size=n_mask, replace=False)
        values = series.values.copy()
        flags = series.flags.copy()
        truth = series.values[picked].copy()
        values[picked] = np.nan
        flags[picked] = Provenance.MISSING
        masked = series.replace(values=values, flags=flags)
        coeffs = fit_temp_model(masked, h0, TempModel(method))
        refilled, _ = impute_daily(masked, coeffs, h0)
        estimate = refilled.values[picked]
        keep = np.isfinite(estimate)
        if not np.any(keep):
            raise DataError("no masked day could be re-imputed")
        return compute_stats(estimate[keep], truth[keep])

    raise ValueError(f"unknown imputation method {method!r}")
