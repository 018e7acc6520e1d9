"""Hot elementwise kernels for the LSTM cell.

Two implementations are provided: numba-compiled and pure numpy. The
active backend is chosen once at import time via the AFFECTSEQ_BACKEND
environment variable ("numba" or "numpy"; default numba when available).
Both paths produce bit-identical float64 results, which benchmarks/ and
tests/test_kernels.py rely on.

Gate layout in the preactivation matrix ``z`` (B x 4H) is
[input, forget, cell, output], each block of width H.
"""

import os

import numpy as np


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _gates_forward_numpy(z, c_prev):
    H = c_prev.shape[1]
    i = _sigmoid(z[:, 0 * H:1 * H])
    f = _sigmoid(z[:, 1 * H:2 * H])
    g = np.tanh(z[:, 2 * H:3 * H])
    o = _sigmoid(z[:, 3 * H:4 * H])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return i, f, g, o, c, h


def _gates_backward_numpy(dh, dc_out, i, f, g, o, c, c_prev):
    tc = np.tanh(c)
    do = dh * tc
    dc = dc_out + dh * o * (1.0 - tc * tc)
    di = dc * g
    df = dc * c_prev
    dg = dc * i
    dc_prev = dc * f
    dz = np.concatenate(
        [di * i * (1.0 - i), df * f * (1.0 - f), dg * (1.0 - g * g), do * o * (1.0 - o)],
        axis=1,
    )
    return dz, dc_prev


def _gates_forward_loop(z, c_prev):
    B, H = c_prev.shape
    i = np.empty((B, H))
    f = np.empty((B, H))
    g = np.empty((B, H))
    o = np.empty((B, H))
    c = np.empty((B, H))
    h = np.empty((B, H))
    for b in range(B):
        for k in range(H):
            iv = 1.0 / (1.0 + np.exp(-z[b, k]))
            fv = 1.0 / (1.0 + np.exp(-z[b, H + k]))
            gv = np.tanh(z[b, 2 * H + k])
            ov = 1.0 / (1.0 + np.exp(-z[b, 3 * H + k]))
            cv = fv * c_prev[b, k] + iv * gv
            i[b, k] = iv
            f[b, k] = fv
            g[b, k] = gv
            o[b, k] = ov
            c[b, k] = cv
            h[b, k] = ov * np.tanh(cv)
    return i, f, g, o, c, h


def _gates_backward_loop(dh, dc_out, i, f, g, o, c, c_prev):
    B, H = c.shape
    dz = np.empty((B, 4 * H))
    dc_prev = np.empty((B, H))
    for b in range(B):
        for k in range(H):
            tc = np.tanh(c[b, k])
            do = dh[b, k] * tc
            dc = dc_out[b, k] + dh[b, k] * o[b, k] * (1.0 - tc * tc)
            dz[b, k] = dc * g[b, k] * i[b, k] * (1.0 - i[b, k])
            dz[b, H + k] = dc * c_prev[b, k] * f[b, k] * (1.0 - f[b, k])
            dz[b, 2 * H + k] = dc * i[b, k] * (1.0 - g[b, k] * g[b, k])
            dz[b, 3 * H + k] = do * o[b, k] * (1.0 - o[b, k])
            dc_prev[b, k] = dc * f[b, k]
    return dz, dc_prev


def _pick_backend():
    choice = os.environ.get("AFFECTSEQ_BACKEND", "numba").lower()
    if choice == "numpy":
        return "numpy", _gates_forward_numpy, _gates_backward_numpy
    try:
        from numba import njit
    except ImportError:
        return "numpy", _gates_forward_numpy, _gates_backward_numpy
    fwd = njit(cache=True)(_gates_forward_loop)
    bwd = njit(cache=True)(_gates_backward_loop)
    return "numba", fwd, bwd


BACKEND, gates_forward, gates_backward = _pick_backend()
