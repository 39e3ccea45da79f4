"""Forecast error statistics and quarter-wise aggregation.

MAE, RMSE and MBE follow the usual prediction-minus-observation forms.
Percentage errors (MAPE/MPE) use (p - o) / o and skip pairs whose observed
magnitude is below 1e-9; the number of skipped pairs is reported. Only
pairs selected by the mask (observed, not imputed) enter any statistic.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import quarter_spans

PCT_EPS = 1e-9

QUARTER_KEYS = ("q1", "q2", "q3", "q4")


@dataclass(frozen=True)
class ErrorStats:
    mae: float
    rmse: float
    mbe: float
    mape_pct: Optional[float]
    mpe_pct: Optional[float]
    n: int
    n_pct_excluded: int

    def as_dict(self) -> dict:
        return {
            "mae": self.mae,
            "rmse": self.rmse,
            "mbe": self.mbe,
            "mape_pct": self.mape_pct,
            "mpe_pct": self.mpe_pct,
            "n": self.n,
            "n_pct_excluded": self.n_pct_excluded,
        }


def compute_stats(pred, obs, mask=None) -> ErrorStats:
    """Error statistics over the masked-in prediction/observation pairs."""
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    obs = np.asarray(obs, dtype=np.float64).reshape(-1)
    if pred.shape != obs.shape:
        raise ValueError("pred and obs must have the same length")
    if mask is None:
        mask = np.ones(pred.shape, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool).reshape(-1)
        if mask.shape != pred.shape:
            raise ValueError("mask must match pred/obs length")
    p = pred[mask]
    o = obs[mask]
    n = p.size
    if n == 0:
        raise ValueError("no comparable pairs after masking")
    diff = p - o
    mae = float(np.mean(np.abs(diff)))
    rmse = float(np.sqrt(np.mean(diff * diff)))
    mbe = float(np.mean(diff))
    pct_ok = np.abs(o) > PCT_EPS
    n_excluded = int(n - pct_ok.sum())
    if np.any(pct_ok):
        mape = float(100.0 * np.mean(np.abs(diff[pct_ok] / o[pct_ok])))
        mpe = float(100.0 * np.mean(diff[pct_ok] / o[pct_ok]))
    else:
        mape = mpe = None
    return ErrorStats(mae=mae, rmse=rmse, mbe=mbe, mape_pct=mape,
                      mpe_pct=mpe, n=n, n_pct_excluded=n_excluded)


def quarter_stats(pred, obs, mask, day_index, n_days) -> dict:
    """Whole-series plus per-quarter statistics keyed `complete`, `q1`..`q4`.

    `day_index` assigns each pair to a day of the underlying series; quarter
    boundaries come from the series length, not the evaluated span. Quarters
    with no comparable pairs map to None.
    """
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    obs = np.asarray(obs, dtype=np.float64).reshape(-1)
    mask = np.asarray(mask, dtype=bool).reshape(-1)
    day_index = np.asarray(day_index, dtype=np.int64).reshape(-1)
    if not (pred.shape == obs.shape == mask.shape == day_index.shape):
        raise ValueError("pred/obs/mask/day_index must share one length")
    out = {"complete": compute_stats(pred, obs, mask)}
    for key, (a, b) in zip(QUARTER_KEYS, quarter_spans(n_days)):
        in_q = (day_index >= a) & (day_index < b) & mask
        if np.any(in_q):
            out[key] = compute_stats(pred, obs, in_q)
        else:
            out[key] = None
    return out


def stats_to_dict(stats: dict) -> dict:
    """JSON-friendly view of a quarter_stats result."""
    return {
        key: (value.as_dict() if value is not None else None)
        for key, value in stats.items()
    }
