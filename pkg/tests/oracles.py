"""Independent reference implementations used only by the test suite.

Everything here is written as plain, slow, loop-based code on purpose: it
shares no helpers with the package, so agreement between the two paths is
evidence that both are right, not that they share a bug.
"""
import math

import numpy as np


# --- wavelet analysis, naive O(n*K) convolution per level --------------------

def reflect(i, n):
    """Half-sample symmetric index fold (independent of the package's)."""
    while i < 0 or i >= n:
        if i < 0:
            i = -i - 1
        else:
            i = 2 * n - 1 - i
    return i


def dwt_band_naive(x, filt):
    """band[j] = sum_k filt[k] * x_sym[2j - k], j in [0, ceil((n+K-1)/2))."""
    n, kk = len(x), len(filt)
    m = -(-(n + kk - 1) // 2)
    band = []
    for j in range(m):
        acc = 0.0
        for k in range(kk):
            acc += filt[k] * x[reflect(2 * j - k, n)]
        band.append(acc)
    return np.array(band)


def dwt_cascade_naive(x, lowpass, highpass, levels):
    """Lists of (approx, detail) per level, low-pass branch recursed."""
    out = []
    current = np.asarray(x, dtype=float)
    for _ in range(levels):
        approx = dwt_band_naive(current, lowpass)
        detail = dwt_band_naive(current, highpass)
        out.append((approx, detail))
        current = approx
    return out


# --- direct DFT summation ------------------------------------------------------

def dft_sum(x):
    """X[m] = sum_n x[n] * exp(-2i pi m n / N), one bin at a time."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    idx = np.arange(n)
    return np.array([np.sum(x * np.exp(-2j * np.pi * m * idx / n))
                     for m in range(n)])


# --- straight-line transformer forward ------------------------------------------

def softmax_rows(a):
    out = np.zeros_like(a, dtype=float)
    for r in range(a.shape[0]):
        shifted = a[r] - np.max(a[r])
        e = np.exp(shifted)
        out[r] = e / np.sum(e)
    return out


def attention_head_naive(y, w1, w2, w3):
    d = y.shape[0]
    q = y @ w1
    k = y @ w2
    v = y @ w3
    scores = np.zeros((d, d))
    for a in range(d):
        for b in range(d):
            scores[a, b] = np.dot(q[a], k[b]) / math.sqrt(d)
    return softmax_rows(scores) @ v


def mab_naive(y, w_queries, w_keys, w_values, w_out):
    heads = [attention_head_naive(y, w_queries[i], w_keys[i], w_values[i])
             for i in range(len(w_queries))]
    concat = np.hstack(heads)
    return concat @ w_out


def layernorm_naive(x, scale, shift, eps=1e-8):
    out = np.zeros_like(x, dtype=float)
    for r in range(x.shape[0]):
        mu = np.mean(x[r])
        var = np.mean((x[r] - mu) ** 2)
        out[r] = scale * ((x[r] - mu) / math.sqrt(var + eps)) + shift
    return out


def ffb_naive(u, w1, b1, w2, b2):
    out = np.zeros_like(u, dtype=float)
    for r in range(u.shape[0]):
        hidden = np.maximum(u[r] @ w1 + b1, 0.0)
        out[r] = hidden @ w2 + b2
    return out


def encoder_layer_naive(y, layer):
    attn = mab_naive(y, layer.w_query, layer.w_key, layer.w_value, layer.w_out)
    u = layernorm_naive(y + attn, layer.ln1_scale, layer.ln1_shift)
    ff = ffb_naive(u, layer.ffb_w1, layer.ffb_b1, layer.ffb_w2, layer.ffb_b2)
    return layernorm_naive(u + ff, layer.ln2_scale, layer.ln2_shift)


def model_forward_naive(x, params):
    """Probability vector for a single (rows, seq_len) input, eval mode."""
    y = np.asarray(x, dtype=float)
    for layer in params.layers:
        y = encoder_layer_naive(y, layer)
    logits = y.reshape(-1) @ params.classifier_w + params.classifier_b
    shifted = logits - np.max(logits)
    e = np.exp(shifted)
    return e / np.sum(e)
