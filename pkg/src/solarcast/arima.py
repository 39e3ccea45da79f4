"""ARIMA(p, d, q) by conditional sum of squares, with AIC order selection
over the grid p, q in {1, 2, 3} and d in {0, 1, 2}.

The differenced series is mean-adjusted by a fitted intercept; innovations
follow u_t = z_t - sum(phi_i z_{t-i}) - sum(theta_j u_{t-j}) with zero
pre-sample values. The Gaussian likelihood (variance concentrated out) is
maximized by Nelder-Mead from zero coefficients, and parameter vectors
whose AR or MA polynomial has a root with modulus <= 1.001 are rejected
outright. AIC values are compared across d on each model's own differenced
sample, which is convenient rather than statistically pure.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .data import DataError
from .kernels import arma_residuals_raw

ROOT_MODULUS_MIN = 1.001
MAX_ITER = 500
GRID = [(p, d, q) for p in (1, 2, 3) for d in (0, 1, 2) for q in (1, 2, 3)]
_SIGMA2_FLOOR = 1e-300


@dataclass(frozen=True)
class ArimaOrder:
    p: int
    d: int
    q: int

    def __post_init__(self):
        if self.p not in (1, 2, 3) or self.d not in (0, 1, 2) or self.q not in (1, 2, 3):
            raise ValueError(f"order outside search grid: {(self.p, self.d, self.q)}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.p, self.d, self.q)


@dataclass(frozen=True)
class ArimaFit:
    order: ArimaOrder
    phi: np.ndarray
    theta: np.ndarray
    sigma2: float
    intercept: float
    log_likelihood: float
    aic: float
    n_obs: int
    converged: bool

    def __post_init__(self):
        if self.sigma2 <= 0.0:
            raise ValueError("innovation variance must be > 0")
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=np.float64))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=np.float64))

    @property
    def k_params(self) -> int:
        return self.order.p + self.order.q + 2  # + intercept + variance


def difference(x, d: int) -> np.ndarray:
    """Apply the backward difference d times; output is len(x) - d long."""
    x = np.asarray(x, dtype=np.float64)
    if d < 0:
        raise ValueError("d must be >= 0")
    if x.size <= d:
        raise DataError(f"need more than d={d} points, got {x.size}")
    for _ in range(d):
        x = np.diff(x)
    return x


def _stable(coeffs: np.ndarray, sign: float) -> bool:
    """True when 1 + sign*sum(c_i z^i) has all roots with modulus > 1.001.

    Degrees 1 and 2 use the Jury conditions on the reciprocal-root
    polynomial; only cubics fall back to np.roots.
    """
    k = len(coeffs)
    if k == 0:
        return True
    # cheap sufficient condition: the polynomial cannot vanish on |z| <= 1.001
    total = 0.0
    for v in coeffs:
        total += abs(v)
    if total * ROOT_MODULUS_MIN ** k < 1.0:
        return True
    r = 1.0 / ROOT_MODULUS_MIN  # reciprocal roots must stay inside |w| < r
    if k == 1:
        return abs(coeffs[0]) < r
    if k == 2:
        # w^2 + a w + b with w = 1/z; roots inside radius r (Jury)
        a = sign * float(coeffs[0])
        b = sign * float(coeffs[1])
        return abs(b) < r * r and abs(a) * r < r * r + b
    poly = np.concatenate(([1.0], sign * np.asarray(coeffs)))[::-1]
    roots = np.roots(poly)
    if roots.size == 0:
        return True
    return bool(np.min(np.abs(roots)) > ROOT_MODULUS_MIN)


def _loglik_sigma2(y: np.ndarray, phi: np.ndarray, theta: np.ndarray,
                   intercept: float) -> tuple[float, float]:
    u = arma_residuals_raw(y - intercept, phi, theta)
    sigma2 = max(float(u @ u) / y.size, _SIGMA2_FLOOR)
    loglik = -0.5 * y.size * (math.log(2.0 * math.pi * sigma2) + 1.0)
    return loglik, sigma2


def fit(x, order: ArimaOrder) -> ArimaFit:
    """Fit one (p, d, q) model by CSS; raises DataError on too-short input."""
    x = np.asarray(x, dtype=np.float64)
    p, d, q = order.as_tuple()
    if x.size < 3 * (p + q) + d:
        raise DataError(
            f"series of {x.size} too short for order {(p, d, q)}")
    y = difference(x, d)

    def neg_loglik(params):
        phi = params[:p]
        theta = params[p:p + q]
        if not (_stable(phi, -1.0) and _stable(theta, 1.0)):
            return np.inf
        loglik, _ = _loglik_sigma2(y, phi, theta, params[-1])
        return -loglik

    x0 = np.zeros(p + q + 1)
    x0[-1] = float(np.mean(y))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        result = minimize(neg_loglik, x0, method="Nelder-Mead",
                          options={"maxiter": MAX_ITER, "xatol": 1e-3,
                                   "fatol": 1e-5, "adaptive": True})
    params = result.x
    phi = params[:p].copy()
    theta = params[p:p + q].copy()
    intercept = float(params[-1])
    loglik, sigma2 = _loglik_sigma2(y, phi, theta, intercept)
    if not np.isfinite(loglik):
        raise DataError(f"CSS likelihood not finite for order {(p, d, q)}")
    aic = 2.0 * (p + q + 2) - 2.0 * loglik
    if not result.success:
        warnings.warn(f"Nelder-Mead hit the iteration cap for order {(p, d, q)}",
                      RuntimeWarning, stacklevel=2)
    return ArimaFit(order=order, phi=phi, theta=theta, sigma2=sigma2,
                    intercept=intercept, log_likelihood=loglik, aic=aic,
                    n_obs=int(y.size), converged=bool(result.success))


def select_order(x) -> ArimaFit:
    """Fit all 27 grid orders and return the lowest-AIC fit. Exact ties go
    to the smaller p+d+q, then lexicographic (p, d, q)."""
    best = None
    best_key = None
    failures = []
    for p, d, q in GRID:
        try:
            cand = fit(x, ArimaOrder(p, d, q))
        except (DataError, ValueError) as exc:
            failures.append(f"{(p, d, q)}: {exc}")
            continue
        key = (cand.aic, p + d + q, p, d, q)
        if best is None or key < best_key:
            best = cand
            best_key = key
    if best is None:
        raise DataError("every grid order failed to fit: " + "; ".join(failures))
    return best


def forecast(fit_result: ArimaFit, x, horizon: int) -> np.ndarray:
    """Iterate the ARMA recursion with future innovations at zero, then
    integrate back to the original scale."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    p, d, q = fit_result.order.as_tuple()
    y = difference(x, d)
    z = y - fit_result.intercept
    u = arma_residuals_raw(z, fit_result.phi, fit_result.theta)
    n = z.size
    zz = np.concatenate([z, np.zeros(horizon)])
    uu = np.concatenate([u, np.zeros(horizon)])
    for t in range(n, n + horizon):
        acc = 0.0
        for i in range(p):
            k = t - 1 - i
            if k >= 0:
                acc += fit_result.phi[i] * zz[k]
        for j in range(q):
            k = t - 1 - j
            if k >= 0:
                acc += fit_result.theta[j] * uu[k]
        zz[t] = acc
    y_fore = zz[n:] + fit_result.intercept

    levels = [x]
    for _ in range(d):
        levels.append(np.diff(levels[-1]))
    out = y_fore
    for lev in range(d - 1, -1, -1):
        out = np.cumsum(out) + levels[lev][-1]
    return out
