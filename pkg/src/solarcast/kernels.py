"""Hot numeric kernels: ARMA innovation recursion and LSTM forward/backward.

Each kernel has a numba ``@njit`` path and a NumPy/SciPy fallback; the active
backend is chosen once at import time from the ``SOLARCAST_NUMBA`` flag (see
``_accel``). Both paths are kept importable so the test suite and the
benchmark script can compare them directly.
"""

import numpy as np
from scipy.signal import lfilter

from ._accel import NUMBA_ENABLED, njit

__all__ = [
    "arma_residuals",
    "arma_residuals_loop",
    "arma_residuals_lfilter",
    "lstm_forward",
    "lstm_backward",
]


# ---------------------------------------------------------------------------
# ARMA conditional-sum-of-squares residuals
# ---------------------------------------------------------------------------

@njit(cache=True)
def _arma_residuals_loop(y, phi, theta):
    n = y.shape[0]
    p = phi.shape[0]
    q = theta.shape[0]
    u = np.empty(n)
    for t in range(n):
        acc = y[t]
        for i in range(p):
            k = t - 1 - i
            if k >= 0:
                acc -= phi[i] * y[k]
        for j in range(q):
            k = t - 1 - j
            if k >= 0:
                acc -= theta[j] * u[k]
        u[t] = acc
    return u


def arma_residuals_loop(y, phi, theta):
    """Innovation recursion u_t = y_t - sum(phi_i y_{t-i}) - sum(theta_j u_{t-j}).

    Pre-sample values of both y and u are taken as zero.
    """
    return _arma_residuals_loop(
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(phi, dtype=np.float64),
        np.ascontiguousarray(theta, dtype=np.float64),
    )


def arma_residuals_lfilter(y, phi, theta):
    """Same recursion expressed as a linear filter (SciPy C path)."""
    b = np.concatenate(([1.0], -np.asarray(phi, dtype=np.float64)))
    a = np.concatenate(([1.0], np.asarray(theta, dtype=np.float64)))
    return lfilter(b, a, np.asarray(y, dtype=np.float64))


arma_residuals = arma_residuals_loop if NUMBA_ENABLED else arma_residuals_lfilter

# fast path for callers that guarantee contiguous float64 inputs
arma_residuals_raw = _arma_residuals_loop if NUMBA_ENABLED else arma_residuals_lfilter


# ---------------------------------------------------------------------------
# LSTM forward pass with cached activations, and backprop through time
# ---------------------------------------------------------------------------
#
# Shapes: x (T, D); wx* (H, D); wh* (H, H); b* (H,); wy (M, H); by (M,).
# Gate order throughout: input i, forget f, cell candidate g, output o.

@njit(cache=True)
def _lstm_forward(x, wxi, whi, bi, wxf, whf, bf, wxg, whg, bg, wxo, who, bo,
                  wy, by):
    n_steps = x.shape[0]
    n_hidden = bi.shape[0]
    i_s = np.empty((n_steps, n_hidden))
    f_s = np.empty((n_steps, n_hidden))
    g_s = np.empty((n_steps, n_hidden))
    o_s = np.empty((n_steps, n_hidden))
    c_s = np.empty((n_steps, n_hidden))
    tc_s = np.empty((n_steps, n_hidden))
    h_s = np.empty((n_steps, n_hidden))
    h = np.zeros(n_hidden)
    c = np.zeros(n_hidden)
    for t in range(n_steps):
        xt = x[t]
        ai = np.dot(wxi, xt) + np.dot(whi, h) + bi
        af = np.dot(wxf, xt) + np.dot(whf, h) + bf
        ag = np.dot(wxg, xt) + np.dot(whg, h) + bg
        ao = np.dot(wxo, xt) + np.dot(who, h) + bo
        i = 1.0 / (1.0 + np.exp(-ai))
        f = 1.0 / (1.0 + np.exp(-af))
        g = np.tanh(ag)
        o = 1.0 / (1.0 + np.exp(-ao))
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        i_s[t] = i
        f_s[t] = f
        g_s[t] = g
        o_s[t] = o
        c_s[t] = c
        tc_s[t] = tc
        h_s[t] = h
    y = np.dot(wy, h) + by
    return y, i_s, f_s, g_s, o_s, c_s, tc_s, h_s


@njit(cache=True)
def _lstm_backward(x, i_s, f_s, g_s, o_s, c_s, tc_s, h_s, dy,
                   whi, whf, whg, who, wy):
    n_steps, n_in = x.shape
    n_hidden = i_s.shape[1]
    dwxi = np.zeros((n_hidden, n_in))
    dwhi = np.zeros((n_hidden, n_hidden))
    dbi = np.zeros(n_hidden)
    dwxf = np.zeros((n_hidden, n_in))
    dwhf = np.zeros((n_hidden, n_hidden))
    dbf = np.zeros(n_hidden)
    dwxg = np.zeros((n_hidden, n_in))
    dwhg = np.zeros((n_hidden, n_hidden))
    dbg = np.zeros(n_hidden)
    dwxo = np.zeros((n_hidden, n_in))
    dwho = np.zeros((n_hidden, n_hidden))
    dbo = np.zeros(n_hidden)
    dwy = np.outer(dy, h_s[n_steps - 1])
    dby = dy.copy()
    dh = np.dot(wy.T, dy)
    dc = np.zeros(n_hidden)
    zeros = np.zeros(n_hidden)
    for t in range(n_steps - 1, -1, -1):
        xt = x[t]
        h_prev = h_s[t - 1] if t > 0 else zeros
        c_prev = c_s[t - 1] if t > 0 else zeros
        i = i_s[t]
        f = f_s[t]
        g = g_s[t]
        o = o_s[t]
        tc = tc_s[t]
        do = dh * tc
        dao = do * o * (1.0 - o)
        dc = dc + dh * o * (1.0 - tc * tc)
        df = dc * c_prev
        daf = df * f * (1.0 - f)
        di = dc * g
        dai = di * i * (1.0 - i)
        dg = dc * i
        dag = dg * (1.0 - g * g)
        dwxi += np.outer(dai, xt)
        dwhi += np.outer(dai, h_prev)
        dbi += dai
        dwxf += np.outer(daf, xt)
        dwhf += np.outer(daf, h_prev)
        dbf += daf
        dwxg += np.outer(dag, xt)
        dwhg += np.outer(dag, h_prev)
        dbg += dag
        dwxo += np.outer(dao, xt)
        dwho += np.outer(dao, h_prev)
        dbo += dao
        dh = (np.dot(whi.T, dai) + np.dot(whf.T, daf)
              + np.dot(whg.T, dag) + np.dot(who.T, dao))
        dc = dc * f
    return (dwxi, dwhi, dbi, dwxf, dwhf, dbf, dwxg, dwhg, dbg,
            dwxo, dwho, dbo, dwy, dby)


def lstm_forward(x, *params):
    """Run the LSTM over a (T, D) input; returns (y, *cached activations)."""
    return _lstm_forward(np.ascontiguousarray(x, dtype=np.float64), *params)


def lstm_backward(x, caches, dy, whi, whf, whg, who, wy):
    """Backprop through time; returns gradients in parameter order."""
    return _lstm_backward(np.ascontiguousarray(x, dtype=np.float64),
                          *caches, dy, whi, whf, whg, who, wy)
