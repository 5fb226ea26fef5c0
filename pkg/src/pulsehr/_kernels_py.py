"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable. Every function
here has a twin with an identical signature in ``_ckernels.pyx``.
"""

import math

import numpy as np
from scipy.signal import peak_prominences

BACKEND = "python"

KERNEL_RBF = 0
KERNEL_SIGMOID = 1
KERNEL_POLY = 2

ACT_RELU = 0
ACT_TANH = 1

METRIC_MANHATTAN = 0
METRIC_EUCLIDEAN = 1

_TAU = 1e-12


# ---------------------------------------------------------------- peaks

def moving_average(x, width):
    """Centered moving average; the window is truncated at both edges."""
    n = x.shape[0]
    half = width // 2
    cs = np.empty(n + 1)
    cs[0] = 0.0
    np.cumsum(x, out=cs[1:])
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    return (cs[hi] - cs[lo]) / (hi - lo)


def select_by_distance(peaks, heights, distance):
    """Greedy refractory suppression: taller first, earlier on equal height."""
    if distance <= 1 or peaks.size < 2:
        return peaks
    order = np.lexsort((peaks, -heights))
    keep = np.ones(peaks.size, dtype=bool)
    for j in order:
        if not keep[j]:
            continue
        p = peaks[j]
        lo = np.searchsorted(peaks, p - distance + 1, side="left")
        hi = np.searchsorted(peaks, p + distance - 1, side="right")
        keep[lo:j] = False
        keep[j + 1:hi] = False
    return peaks[keep]


def detect_peaks(x, distance, prom_factor, detrend_width):
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    if n < 3:
        return np.empty(0, dtype=np.int64)
    d = x - moving_average(x, detrend_width)
    thr = prom_factor * float(np.std(d))
    mid = d[1:-1]
    peaks = np.flatnonzero((mid > d[:-2]) & (mid > d[2:])) + 1
    if peaks.size == 0:
        return peaks.astype(np.int64)
    prom = peak_prominences(d, peaks)[0]
    peaks = peaks[prom >= thr]
    if peaks.size == 0:
        return peaks.astype(np.int64)
    return select_by_distance(peaks, d[peaks], distance).astype(np.int64)


def windowed_hr(x, fs, ends, width, distance, prom_factor, detrend_width):
    """Raw HR for each window ``x[end-width:end]``; NaN where < 2 peaks."""
    out = np.full(len(ends), np.nan)
    for w, end in enumerate(ends):
        pk = detect_peaks(x[end - width:end], distance, prom_factor, detrend_width)
        if pk.size >= 2:
            out[w] = 60.0 * (pk.size - 1) * fs / (pk[-1] - pk[0])
    return out


# ---------------------------------------------------------------- trees

def build_tree(X, y, max_depth):
    """Greedy CART regression tree in preorder.

    Returns ``(feature, threshold, left, right, value)``; leaves carry
    feature -1. Samples go left when ``x[feature] <= threshold``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    feature, threshold, left, right, value = [], [], [], [], []

    def grow(idx, depth):
        node = len(feature)
        ys = y[idx]
        n = ys.shape[0]
        total = 0.0
        for v in ys:
            total += v
        mean = total / n
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(mean)
        if depth >= max_depth or n < 2 or ys.max() == ys.min():
            return node
        split = best_split(X[idx], ys - mean)
        if split is None:
            return node
        f, thr = split
        go_left = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left[node] = grow(idx[go_left], depth + 1)
        right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(X.shape[0]), 0)
    return (np.array(feature, dtype=np.int32), np.array(threshold),
            np.array(left, dtype=np.int32), np.array(right, dtype=np.int32),
            np.array(value))


def _midpoint(a, b):
    """Threshold between ``a < b`` that still sends ``b`` to the right.

    For adjacent doubles the midpoint rounds to ``b``; ``a`` is used then.
    """
    m = (a + b) / 2.0
    return float(m) if m < b else float(a)


def best_split(Xn, yc):
    """Minimum-SSE split over all features and midpoints, or None."""
    n, k = Xn.shape
    tot_s = np.cumsum(yc)[-1]
    tot_q = np.cumsum(yc * yc)[-1]
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    best = math.inf
    best_f = -1
    best_t = 0.0
    for f in range(k):
        order = np.argsort(Xn[:, f], kind="stable")
        xs = Xn[order, f]
        ys = yc[order]
        s = np.cumsum(ys)[:-1]
        q = np.cumsum(ys * ys)[:-1]
        sse = (q - s * s / nl) + ((tot_q - q) - (tot_s - s) * (tot_s - s) / nr)
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        cand = np.where(valid, sse, math.inf)
        p = int(np.argmin(cand))
        if cand[p] < best:
            best = float(cand[p])
            best_f = f
            best_t = _midpoint(xs[p], xs[p + 1])
    if best_f < 0:
        return None
    return best_f, best_t


class TreeEvaluator:
    """Fast single-row traversal over a flattened tree."""

    def __init__(self, feature, threshold, left, right, value):
        self._f = [int(v) for v in feature]
        self._t = [float(v) for v in threshold]
        self._l = [int(v) for v in left]
        self._r = [int(v) for v in right]
        self._v = [float(v) for v in value]

    def predict_one(self, x):
        f, t, l, r = self._f, self._t, self._l, self._r
        i = 0
        while f[i] >= 0:
            i = l[i] if x[f[i]] <= t[i] else r[i]
        return self._v[i]

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0])
        rows = X.tolist()
        for j, row in enumerate(rows):
            out[j] = self.predict_one(row)
        return out


# ---------------------------------------------------------------- knn

def knn_predict(Xt, yt, Xq, n_neighbors, metric):
    Xt = np.asarray(Xt, dtype=np.float64)
    Xq = np.asarray(Xq, dtype=np.float64)
    out = np.empty(Xq.shape[0])
    chunk = max(1, 2_000_000 // max(1, Xt.shape[0] * Xt.shape[1]))
    for s in range(0, Xq.shape[0], chunk):
        diff = Xq[s:s + chunk, None, :] - Xt[None, :, :]
        if metric == METRIC_MANHATTAN:
            dist = np.abs(diff).sum(axis=2)
        else:
            dist = np.sqrt((diff * diff).sum(axis=2))
        nn = np.argsort(dist, axis=1, kind="stable")[:, :n_neighbors]
        out[s:s + chunk] = yt[nn].sum(axis=1) / n_neighbors
    return out


# ---------------------------------------------------------------- svr

def kernel_matrix(A, B, kernel, gamma, coef0, degree):
    dot = A @ B.T
    if kernel == KERNEL_RBF:
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * dot
        return np.exp(-gamma * np.maximum(sq, 0.0))
    if kernel == KERNEL_SIGMOID:
        return np.tanh(gamma * dot + coef0)
    return (gamma * dot + coef0) ** degree


def smo_solve(X, z, C, epsilon, kernel, gamma, coef0, degree, tol, max_iter):
    """Epsilon-SVR dual via SMO with second-order working-set selection.

    Returns ``(coef, rho, n_iter, violation)`` with ``coef = alpha - alpha*``
    and decision function ``sum(coef * K(sv, x)) - rho``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    l = X.shape[0]
    n = 2 * l
    ysign = np.concatenate([np.ones(l), -np.ones(l)])
    alpha = np.zeros(n)
    G = np.concatenate([epsilon - z, epsilon + z])
    QD = np.tile(_kdiag(X, kernel, gamma, coef0, degree), 2)
    cache = {}

    def qrow(i):
        r = cache.get(i % l)
        if r is None:
            r = kernel_matrix(X[i % l:i % l + 1], X, kernel, gamma, coef0, degree)[0]
            if len(cache) > 4096:
                cache.pop(next(iter(cache)))
            cache[i % l] = r
        full = np.concatenate([r, r])
        return ysign[i] * ysign * full

    it = 0
    violation = math.inf
    while it < max_iter:
        up = np.where(ysign > 0, alpha < C, alpha > 0)
        score = -ysign * G
        if not up.any():
            violation = 0.0
            break
        cand = np.where(up, score, -math.inf)
        i = int(np.argmax(cand))
        gmax = cand[i]
        low = np.where(ysign > 0, alpha > 0, alpha < C)
        if not low.any():
            violation = 0.0
            break
        gmax2 = float(np.max(np.where(low, -score, -math.inf)))
        violation = gmax + gmax2
        if violation < tol:
            break
        Qi = qrow(i)
        grad_diff = gmax - score
        quad = QD[i] + QD - 2.0 * ysign[i] * ysign * Qi
        quad = np.where(quad > 0, quad, _TAU)
        obj = np.where(low & (grad_diff > 0), -(grad_diff * grad_diff) / quad, math.inf)
        j = int(np.argmin(obj))
        if not math.isfinite(obj[j]):
            break
        Qj = qrow(j)
        ai, aj = alpha[i], alpha[j]
        if ysign[i] != ysign[j]:
            q = QD[i] + QD[j] + 2.0 * Qi[j]
            q = q if q > 0 else _TAU
            delta = (-G[i] - G[j]) / q
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            q = QD[i] + QD[j] - 2.0 * Qi[j]
            q = q if q > 0 else _TAU
            delta = (G[i] - G[j]) / q
            s = ai + aj
            ni, nj = ai - delta, aj + delta
            if s > C:
                if ni > C:
                    ni, nj = C, s - C
            elif nj < 0:
                nj, ni = 0.0, s
            if s > C:
                if nj > C:
                    nj, ni = C, s - C
            elif ni < 0:
                ni, nj = 0.0, s
        alpha[i], alpha[j] = ni, nj
        G += Qi * (ni - ai) + Qj * (nj - aj)
        it += 1

    rho = _rho(alpha, G, ysign, C)
    coef = alpha[:l] - alpha[l:]
    return coef, rho, it, float(violation)


def _kdiag(X, kernel, gamma, coef0, degree):
    sq = (X * X).sum(1)
    if kernel == KERNEL_RBF:
        return np.ones(X.shape[0])
    if kernel == KERNEL_SIGMOID:
        return np.tanh(gamma * sq + coef0)
    return (gamma * sq + coef0) ** degree


def _rho(alpha, G, ysign, C):
    yG = ysign * G
    at_ub = alpha >= C
    at_lb = alpha <= 0
    free = ~(at_ub | at_lb)
    if free.any():
        return float(yG[free].sum() / free.sum())
    ub_mask = (at_ub & (ysign < 0)) | (at_lb & (ysign > 0))
    lb_mask = (at_ub & (ysign > 0)) | (at_lb & (ysign < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else math.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -math.inf
    return float((ub + lb) / 2.0)


def svr_decision(SV, coef, rho, Xq, kernel, gamma, coef0, degree):
    Xq = np.atleast_2d(np.asarray(Xq, dtype=np.float64))
    if SV.shape[0] == 0:
        return np.full(Xq.shape[0], -rho)
    K = kernel_matrix(Xq, SV, kernel, gamma, coef0, degree)
    return K @ coef - rho


# ---------------------------------------------------------------- mlp

def mlp_unpack(theta, sizes):
    """Views ``[(W, b), ...]`` into the flat parameter vector."""
    layers = []
    off = 0
    for a, b in zip(sizes[:-1], sizes[1:]):
        W = theta[off:off + a * b].reshape(a, b)
        off += a * b
        bias = theta[off:off + b]
        off += b
        layers.append((W, bias))
    return layers


def mlp_forward(theta, sizes, X, act):
    h = np.asarray(X, dtype=np.float64)
    layers = mlp_unpack(theta, sizes)
    for li, (W, b) in enumerate(layers):
        h = h @ W + b
        if li < len(layers) - 1:
            h = np.maximum(h, 0.0) if act == ACT_RELU else np.tanh(h)
    return h[:, 0]


def mlp_loss_grad(theta, sizes, X, y, alpha, act):
    """Batch loss ``mean((p - y)^2) + alpha/2 * sum(W^2)`` and its gradient."""
    layers = mlp_unpack(theta, sizes)
    acts = [np.asarray(X, dtype=np.float64)]
    h = acts[0]
    for li, (W, b) in enumerate(layers):
        h = h @ W + b
        if li < len(layers) - 1:
            h = np.maximum(h, 0.0) if act == ACT_RELU else np.tanh(h)
        acts.append(h)
    pred = acts[-1][:, 0]
    m = pred.shape[0]
    err = pred - y
    reg = sum(float((W * W).sum()) for W, _ in layers)
    loss = float((err * err).sum() / m) + 0.5 * alpha * reg
    grad = np.empty_like(theta)
    gl = mlp_unpack(grad, sizes)
    delta = (2.0 / m) * err[:, None]
    for li in range(len(layers) - 1, -1, -1):
        W, _ = layers[li]
        gW, gb = gl[li]
        gW[...] = acts[li].T @ delta + alpha * W
        gb[...] = delta.sum(axis=0)
        if li > 0:
            delta = delta @ W.T
            a = acts[li]
            delta = delta * (a > 0) if act == ACT_RELU else delta * (1.0 - a * a)
    return loss, grad


def mlp_epoch(theta, m1, m2, step, sizes, X, y, perm, batch, alpha, lr, act):
    """One pass of minibatch Adam over ``perm``; updates in place, returns step."""
    b1, b2, eps = 0.9, 0.999, 1e-8
    n = perm.shape[0]
    for s in range(0, n, batch):
        idx = perm[s:s + batch]
        _, g = mlp_loss_grad(theta, sizes, X[idx], y[idx], alpha, act)
        step += 1
        m1 *= b1
        m1 += (1.0 - b1) * g
        m2 *= b2
        m2 += (1.0 - b2) * g * g
        c1 = 1.0 - b1 ** step
        c2 = 1.0 - b2 ** step
        theta -= lr * (m1 / c1) / (np.sqrt(m2 / c2) + eps)
    return step
