"""Gated recurrent cell math: LSTM and GRU chains, forward and backward.

Parameters per (layer, direction) are packed along the gate axis:
LSTM uses gate order (i, f, o, g) so Wx is (4H, D), GRU uses (z, r, n) so
Wx is (3H, D). Inputs are either a list of active-index arrays (sparse
binary vectors, layer 0) or a dense (T, D) float array (stacked layers).

Cell equations. LSTM with forget gate, no peepholes:
    i,f,o = sigmoid(W x + U h + b);  g = tanh(W x + U h + b)
    c' = f*c + i*g;  h' = o*tanh(c')
GRU with the reset gate applied before the recurrent matmul:
    z,r = sigmoid(W x + U h + b)
    n = tanh(W x + U (r*h) + b);  h' = (1-z)*h + z*n
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GATE_COUNT = {"lstm": 4, "gru": 3}
GATE_NAMES = {"lstm": ("i", "f", "o", "g"), "gru": ("z", "r", "n")}


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _input_projection(Wx: np.ndarray, b: np.ndarray, xs) -> np.ndarray:
    """(T, G*H) pre-activations from the input path, bias included."""
    if isinstance(xs, np.ndarray):
        return xs @ Wx.T + b
    out = np.empty((len(xs), len(b)))
    for t, idx in enumerate(xs):
        out[t] = Wx[:, idx].sum(axis=1) + b
    return out


def _sparse_weight_grad(dWx: np.ndarray, xs: list[np.ndarray], dA: np.ndarray) -> None:
    for t, idx in enumerate(xs):
        dWx[:, idx] += dA[t, :, None]


@dataclass
class LstmCache:
    xs: object                 # list[np.ndarray] (sparse) or (T, D) array
    i: np.ndarray              # (T, H) input gate
    f: np.ndarray              # (T, H) forget gate
    o: np.ndarray              # (T, H) output gate
    g: np.ndarray              # (T, H) cell candidate
    c: np.ndarray              # (T, H) cell state
    tc: np.ndarray             # (T, H) tanh(cell state)
    h: np.ndarray              # (T, H) hidden state


def lstm_chain_forward(Wx: np.ndarray, Uh: np.ndarray, b: np.ndarray, xs,
                       h0: np.ndarray | None = None,
                       c0: np.ndarray | None = None) -> LstmCache:
    H = Uh.shape[1]
    T = len(xs)
    ax = _input_projection(Wx, b, xs)
    i = np.empty((T, H)); f = np.empty((T, H)); o = np.empty((T, H))
    g = np.empty((T, H)); c = np.empty((T, H)); tc = np.empty((T, H))
    h_all = np.empty((T, H))
    h = np.zeros(H) if h0 is None else h0
    c_prev = np.zeros(H) if c0 is None else c0
    for t in range(T):
        a = ax[t] + Uh @ h
        i[t] = sigmoid(a[:H])
        f[t] = sigmoid(a[H:2 * H])
        o[t] = sigmoid(a[2 * H:3 * H])
        g[t] = np.tanh(a[3 * H:])
        c[t] = f[t] * c_prev + i[t] * g[t]
        tc[t] = np.tanh(c[t])
        h_all[t] = o[t] * tc[t]
        h = h_all[t]
        c_prev = c[t]
    return LstmCache(xs=xs, i=i, f=f, o=o, g=g, c=c, tc=tc, h=h_all)


def lstm_chain_backward(Wx: np.ndarray, Uh: np.ndarray, cache: LstmCache,
                        dH: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray | None]:
    """Backpropagate dH (T, H) injections through the chain.

    Returns (dWx, dUh, db, dX) where dX is (T, D) for dense inputs and
    None for sparse inputs (their gradient lands directly in dWx).
    """
    T, H = cache.h.shape
    dA = np.empty((T, 4 * H))
    dh_rec = np.zeros(H)
    dc_rec = np.zeros(H)
    for t in range(T - 1, -1, -1):
        i, f, o, g = cache.i[t], cache.f[t], cache.o[t], cache.g[t]
        tc = cache.tc[t]
        c_prev = cache.c[t - 1] if t > 0 else np.zeros(H)
        dh = dH[t] + dh_rec
        do = dh * tc
        dc = dc_rec + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_rec = dc * f
        da = dA[t]
        da[:H] = di * i * (1.0 - i)
        da[H:2 * H] = df * f * (1.0 - f)
        da[2 * H:3 * H] = do * o * (1.0 - o)
        da[3 * H:] = dg * (1.0 - g * g)
        dh_rec = Uh.T @ da

    h_prev = np.vstack([np.zeros(H), cache.h[:-1]])
    dUh = dA.T @ h_prev
    db = dA.sum(axis=0)
    if isinstance(cache.xs, np.ndarray):
        dWx = dA.T @ cache.xs
        dX = dA @ Wx
    else:
        dWx = np.zeros_like(Wx)
        _sparse_weight_grad(dWx, cache.xs, dA)
        dX = None
    return dWx, dUh, db, dX


@dataclass
class GruCache:
    xs: object
    z: np.ndarray              # (T, H) update gate
    r: np.ndarray              # (T, H) reset gate
    n: np.ndarray              # (T, H) candidate
    rh: np.ndarray             # (T, H) r * h_prev
    h: np.ndarray              # (T, H) hidden state


def gru_chain_forward(Wx: np.ndarray, Uh: np.ndarray, b: np.ndarray, xs,
                      h0: np.ndarray | None = None) -> GruCache:
    H = Uh.shape[1]
    T = len(xs)
    ax = _input_projection(Wx, b, xs)
    Uzr, Un = Uh[:2 * H], Uh[2 * H:]
    z = np.empty((T, H)); r = np.empty((T, H)); n = np.empty((T, H))
    rh = np.empty((T, H)); h_all = np.empty((T, H))
    h = np.zeros(H) if h0 is None else h0
    for t in range(T):
        azr = ax[t, :2 * H] + Uzr @ h
        z[t] = sigmoid(azr[:H])
        r[t] = sigmoid(azr[H:])
        rh[t] = r[t] * h
        an = ax[t, 2 * H:] + Un @ rh[t]
        n[t] = np.tanh(an)
        h_all[t] = (1.0 - z[t]) * h + z[t] * n[t]
        h = h_all[t]
    return GruCache(xs=xs, z=z, r=r, n=n, rh=rh, h=h_all)


def gru_chain_backward(Wx: np.ndarray, Uh: np.ndarray, cache: GruCache,
                       dH: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray | None]:
    T, H = cache.h.shape
    Uzr, Un = Uh[:2 * H], Uh[2 * H:]
    dA = np.empty((T, 3 * H))
    dh_rec = np.zeros(H)
    for t in range(T - 1, -1, -1):
        z, r, n, rh = cache.z[t], cache.r[t], cache.n[t], cache.rh[t]
        h_prev = cache.h[t - 1] if t > 0 else np.zeros(H)
        dh = dH[t] + dh_rec
        dz = dh * (n - h_prev)
        dn = dh * z
        dh_prev = dh * (1.0 - z)
        dan = dn * (1.0 - n * n)
        drh = Un.T @ dan
        dr = drh * h_prev
        dh_prev = dh_prev + drh * r
        da = dA[t]
        da[:H] = dz * z * (1.0 - z)
        da[H:2 * H] = dr * r * (1.0 - r)
        da[2 * H:] = dan
        dh_rec = dh_prev + Uzr.T @ da[:2 * H]

    h_prev_all = np.vstack([np.zeros(H), cache.h[:-1]])
    dUh = np.empty_like(Uh)
    dUh[:2 * H] = dA[:, :2 * H].T @ h_prev_all
    dUh[2 * H:] = dA[:, 2 * H:].T @ cache.rh
    db = dA.sum(axis=0)
    if isinstance(cache.xs, np.ndarray):
        dWx = dA.T @ cache.xs
        dX = dA @ Wx
    else:
        dWx = np.zeros_like(Wx)
        _sparse_weight_grad(dWx, cache.xs, dA)
        dX = None
    return dWx, dUh, db, dX


def chain_forward(kind: str, Wx, Uh, b, xs):
    return lstm_chain_forward(Wx, Uh, b, xs) if kind == "lstm" else gru_chain_forward(Wx, Uh, b, xs)


def chain_backward(kind: str, Wx, Uh, cache, dH):
    if kind == "lstm":
        return lstm_chain_backward(Wx, Uh, cache, dH)
    return gru_chain_backward(Wx, Uh, cache, dH)
