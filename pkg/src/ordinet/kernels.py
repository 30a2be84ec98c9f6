"""Hot numeric kernels with numba and pure-numpy twins.

Every function here is evaluated once per training step, so the loop
variants are compiled with ``numba.njit`` (no fastmath: results must be
reproducible and IEEE-faithful). The vectorized numpy twins produce the
same values within floating-point reassociation noise (< 1e-12) and act
as the fallback when numba is unavailable or disabled via the
ORDINET_BACKEND environment variable.

Dense-layer matmuls are intentionally *not* here: BLAS already wins there.

Kernel inventory (bound as module attributes by :func:`set_backend`):

- ``softmax_xent(logits, targets)``        -> (value, grad wrt logits)
- ``xent_on_probs(probs, targets)``        -> (value, grad wrt probs)
- ``wk_value_grad(probs, labels, omega, eps)`` -> (value, grad wrt probs)
- ``sb_forward(logits)``                   -> stick-breaking probabilities
- ``sb_backward(logits, upstream)``        -> grad wrt logits
- ``clm_forward(projection, thresholds, link_id)``  -> probabilities
- ``clm_backward(projection, thresholds, link_id, upstream)``
                                           -> (grad projection, grad thresholds)

Link ids: 0 = logit, 1 = probit, 2 = cloglog.
"""

import math

import numpy as np

from . import backend

PROB_CLAMP = 1e-15

LINK_LOGIT = 0
LINK_PROBIT = 1
LINK_CLOGLOG = 2

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

_erf_vec = np.vectorize(math.erf, otypes=[np.float64])


# ---------------------------------------------------------------------------
# numpy implementations (vectorized)
# ---------------------------------------------------------------------------


def sigmoid(x):
    """Numerically stable logistic function, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(logits):
    """Row-wise softmax with max-shift stabilization."""
    z = np.asarray(logits, dtype=np.float64)
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def link_cdf(x, link_id):
    if link_id == LINK_LOGIT:
        return sigmoid(x)
    if link_id == LINK_PROBIT:
        return 0.5 * (1.0 + _erf_vec(x / _SQRT2))
    xc = np.minimum(x, 30.0)
    return 1.0 - np.exp(-np.exp(xc))


def link_pdf(x, link_id):
    if link_id == LINK_LOGIT:
        s = sigmoid(x)
        return s * (1.0 - s)
    if link_id == LINK_PROBIT:
        return _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    xc = np.minimum(x, 30.0)
    return np.exp(xc - np.exp(xc))


def _softmax_xent_np(logits, targets):
    n = logits.shape[0]
    p = softmax(logits)
    value = -float(np.sum(targets * np.log(np.maximum(p, PROB_CLAMP)))) / n
    grad = (p - targets) / n
    return value, grad


def _xent_on_probs_np(probs, targets):
    n = probs.shape[0]
    safe = np.maximum(probs, PROB_CLAMP)
    value = -float(np.sum(targets * np.log(safe))) / n
    grad = np.where(probs > PROB_CLAMP, -targets / safe, 0.0) / n
    return value, grad


def _wk_value_grad_np(probs, labels, omega, eps):
    n = probs.shape[0]
    w_rows = omega[labels]
    observed = float(np.sum(w_rows * probs))
    col_p = probs.sum(axis=0)
    col_w = w_rows.sum(axis=0)
    expected = float(col_p @ col_w) / n
    denom = expected + eps
    value = observed / denom
    grad = (w_rows - (value / n) * col_w[None, :]) / denom
    return value, grad


def _sb_forward_np(logits):
    n, k = logits.shape
    q = sigmoid(logits)
    probs = np.empty((n, k + 1))
    rem = np.ones(n)
    for m in range(k):
        probs[:, m] = q[:, m] * rem
        rem = rem * (1.0 - q[:, m])
    probs[:, k] = rem
    return probs


def _sb_backward_np(logits, upstream):
    n, k = logits.shape
    q = sigmoid(logits)
    tail = np.empty((n, k))
    tail[:, k - 1] = upstream[:, k]
    for m in range(k - 2, -1, -1):
        tail[:, m] = upstream[:, m + 1] * q[:, m + 1] + (1.0 - q[:, m + 1]) * tail[:, m + 1]
    grad = np.empty((n, k))
    prefix = np.ones(n)
    for m in range(k):
        grad[:, m] = q[:, m] * (1.0 - q[:, m]) * prefix * (upstream[:, m] - tail[:, m])
        prefix = prefix * (1.0 - q[:, m])
    return grad


def _clm_forward_np(projection, thresholds, link_id):
    n = projection.shape[0]
    k = thresholds.shape[0]
    cum = link_cdf(thresholds[None, :] - projection[:, None], link_id)
    probs = np.empty((n, k + 1))
    probs[:, 0] = cum[:, 0]
    if k > 1:
        probs[:, 1:k] = cum[:, 1:] - cum[:, :-1]
    probs[:, k] = 1.0 - cum[:, k - 1]
    return np.maximum(probs, 0.0)


def _clm_backward_np(projection, thresholds, link_id, upstream):
    pdf = link_pdf(thresholds[None, :] - projection[:, None], link_id)
    d = (upstream[:, :-1] - upstream[:, 1:]) * pdf
    return -d.sum(axis=1), d.sum(axis=0)


_NUMPY_IMPLS = {
    "softmax_xent": _softmax_xent_np,
    "xent_on_probs": _xent_on_probs_np,
    "wk_value_grad": _wk_value_grad_np,
    "sb_forward": _sb_forward_np,
    "sb_backward": _sb_backward_np,
    "clm_forward": _clm_forward_np,
    "clm_backward": _clm_backward_np,
}


# ---------------------------------------------------------------------------
# numba implementations (explicit loops)
# ---------------------------------------------------------------------------

_NUMBA_IMPLS = {}

if backend.HAVE_NUMBA:
    from numba import njit

    @njit(cache=True, inline="always")
    def _sig(x):
        if x >= 0.0:
            return 1.0 / (1.0 + math.exp(-x))
        e = math.exp(x)
        return e / (1.0 + e)

    @njit(cache=True, inline="always")
    def _cdf(x, link_id):
        if link_id == 0:
            return _sig(x)
        if link_id == 1:
            return 0.5 * (1.0 + math.erf(x / _SQRT2))
        xc = min(x, 30.0)
        return 1.0 - math.exp(-math.exp(xc))

    @njit(cache=True, inline="always")
    def _pdf(x, link_id):
        if link_id == 0:
            s = _sig(x)
            return s * (1.0 - s)
        if link_id == 1:
            return _INV_SQRT_2PI * math.exp(-0.5 * x * x)
        xc = min(x, 30.0)
        return math.exp(xc - math.exp(xc))

    @njit(cache=True)
    def _softmax_xent_nb(logits, targets):
        n, j = logits.shape
        grad = np.empty((n, j))
        value = 0.0
        for i in range(n):
            m = logits[i, 0]
            for k in range(1, j):
                if logits[i, k] > m:
                    m = logits[i, k]
            s = 0.0
            for k in range(j):
                e = math.exp(logits[i, k] - m)
                grad[i, k] = e
                s += e
            for k in range(j):
                p = grad[i, k] / s
                t = targets[i, k]
                if t != 0.0:
                    pc = p if p > PROB_CLAMP else PROB_CLAMP
                    value -= t * math.log(pc)
                grad[i, k] = (p - t) / n
        return value / n, grad

    @njit(cache=True)
    def _xent_on_probs_nb(probs, targets):
        n, j = probs.shape
        grad = np.zeros((n, j))
        value = 0.0
        for i in range(n):
            for k in range(j):
                p = probs[i, k]
                t = targets[i, k]
                if t != 0.0:
                    pc = p if p > PROB_CLAMP else PROB_CLAMP
                    value -= t * math.log(pc)
                if p > PROB_CLAMP:
                    grad[i, k] = -t / p / n
        return value / n, grad

    @njit(cache=True)
    def _wk_value_grad_nb(probs, labels, omega, eps):
        n, j = probs.shape
        observed = 0.0
        col_p = np.zeros(j)
        col_w = np.zeros(j)
        for i in range(n):
            yi = labels[i]
            for k in range(j):
                w = omega[yi, k]
                observed += w * probs[i, k]
                col_w[k] += w
                col_p[k] += probs[i, k]
        expected = 0.0
        for k in range(j):
            expected += col_p[k] * col_w[k]
        expected /= n
        denom = expected + eps
        value = observed / denom
        grad = np.empty((n, j))
        for i in range(n):
            yi = labels[i]
            for k in range(j):
                grad[i, k] = (omega[yi, k] - value * col_w[k] / n) / denom
        return value, grad

    @njit(cache=True)
    def _sb_forward_nb(logits):
        n, k = logits.shape
        probs = np.empty((n, k + 1))
        for i in range(n):
            rem = 1.0
            for m in range(k):
                q = _sig(logits[i, m])
                probs[i, m] = q * rem
                rem *= 1.0 - q
            probs[i, k] = rem
        return probs

    @njit(cache=True)
    def _sb_backward_nb(logits, upstream):
        n, k = logits.shape
        grad = np.empty((n, k))
        q = np.empty(k)
        tail = np.empty(k)
        for i in range(n):
            for m in range(k):
                q[m] = _sig(logits[i, m])
            tail[k - 1] = upstream[i, k]
            for m in range(k - 2, -1, -1):
                tail[m] = upstream[i, m + 1] * q[m + 1] + (1.0 - q[m + 1]) * tail[m + 1]
            prefix = 1.0
            for m in range(k):
                grad[i, m] = q[m] * (1.0 - q[m]) * prefix * (upstream[i, m] - tail[m])
                prefix *= 1.0 - q[m]
        return grad

    @njit(cache=True)
    def _clm_forward_nb(projection, thresholds, link_id):
        n = projection.shape[0]
        k = thresholds.shape[0]
        probs = np.empty((n, k + 1))
        for i in range(n):
            prev = 0.0
            for m in range(k):
                c = _cdf(thresholds[m] - projection[i], link_id)
                p = c - prev
                probs[i, m] = p if p > 0.0 else 0.0
                prev = c
            p = 1.0 - prev
            probs[i, k] = p if p > 0.0 else 0.0
        return probs

    @njit(cache=True)
    def _clm_backward_nb(projection, thresholds, link_id, upstream):
        n = projection.shape[0]
        k = thresholds.shape[0]
        grad_proj = np.zeros(n)
        grad_thr = np.zeros(k)
        for i in range(n):
            for m in range(k):
                d = upstream[i, m] - upstream[i, m + 1]
                g = d * _pdf(thresholds[m] - projection[i], link_id)
                grad_proj[i] -= g
                grad_thr[m] += g
        return grad_proj, grad_thr

    _NUMBA_IMPLS = {
        "softmax_xent": _softmax_xent_nb,
        "xent_on_probs": _xent_on_probs_nb,
        "wk_value_grad": _wk_value_grad_nb,
        "sb_forward": _sb_forward_nb,
        "sb_backward": _sb_backward_nb,
        "clm_forward": _clm_forward_nb,
        "clm_backward": _clm_backward_nb,
    }


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_ACTIVE = "numpy"


def set_backend(name: str) -> None:
    """Bind the named kernel set ("numba" or "numpy") to module attributes."""
    global _ACTIVE
    if name == "numba":
        if not backend.HAVE_NUMBA:
            raise ImportError("numba backend requested but numba is not importable")
        impls = _NUMBA_IMPLS
    elif name == "numpy":
        impls = _NUMPY_IMPLS
    else:
        raise ValueError(f"unknown backend {name!r}")
    for fname, fn in impls.items():
        globals()[fname] = fn
    _ACTIVE = name


def active_backend() -> str:
    return _ACTIVE


set_backend("numba" if backend.USE_NUMBA else "numpy")
