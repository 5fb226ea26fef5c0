# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: peak detection, CART growth and traversal, KNN,
SMO for epsilon-SVR and minibatch Adam epochs for the MLP.

Signatures mirror ``_kernels_py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, tanh, pow, fabs, INFINITY, isfinite
from libc.stdlib cimport malloc, free, qsort
from libc.string cimport memcpy

cnp.import_array()

BACKEND = "cython"

KERNEL_RBF = 0
KERNEL_SIGMOID = 1
KERNEL_POLY = 2

ACT_RELU = 0
ACT_TANH = 1

METRIC_MANHATTAN = 0
METRIC_EUCLIDEAN = 1

cdef double TAU = 1e-12


# ---------------------------------------------------------------- peaks

cdef struct Cand:
    double h
    Py_ssize_t i


cdef int _cmp_cand(const void* a, const void* b) noexcept nogil:
    cdef const Cand* x = <const Cand*> a
    cdef const Cand* y = <const Cand*> b
    if x.h > y.h:
        return -1
    if x.h < y.h:
        return 1
    if x.i < y.i:
        return -1
    if x.i > y.i:
        return 1
    return 0


def moving_average(const double[::1] x, Py_ssize_t width):
    cdef Py_ssize_t n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double* cs = <double*> malloc((n + 1) * sizeof(double))
    _moving_average(&x[0], n, width, cs, &o[0])
    free(cs)
    return out


cdef void _moving_average(const double* x, Py_ssize_t n, Py_ssize_t width,
                          double* cs, double* out) noexcept nogil:
    cdef Py_ssize_t i, lo, hi, half = width // 2
    cs[0] = 0.0
    for i in range(n):
        cs[i + 1] = cs[i] + x[i]
    for i in range(n):
        lo = i - half
        if lo < 0:
            lo = 0
        hi = i + half + 1
        if hi > n:
            hi = n
        out[i] = (cs[hi] - cs[lo]) / (hi - lo)


cdef Py_ssize_t _detect(const double* x, Py_ssize_t n, Py_ssize_t distance,
                        double prom_factor, Py_ssize_t detrend_width,
                        double* d, double* cs, Cand* cand, char* keep,
                        Py_ssize_t* out) noexcept nogil:
    """Writes ascending peak indices to ``out`` and returns their count."""
    cdef Py_ssize_t i, j, m = 0, p, q
    cdef double mean = 0.0, var = 0.0, thr, lmin, rmin, h, base
    if n < 3:
        return 0
    _moving_average(x, n, detrend_width, cs, d)
    for i in range(n):
        d[i] = x[i] - d[i]
    for i in range(n):
        mean += d[i]
    mean /= n
    for i in range(n):
        var += (d[i] - mean) * (d[i] - mean)
    thr = prom_factor * sqrt(var / n)
    for i in range(1, n - 1):
        h = d[i]
        if not (h > d[i - 1] and h > d[i + 1]):
            continue
        lmin = h
        j = i - 1
        while j >= 0 and d[j] <= h:
            if d[j] < lmin:
                lmin = d[j]
            j -= 1
        rmin = h
        j = i + 1
        while j < n and d[j] <= h:
            if d[j] < rmin:
                rmin = d[j]
            j += 1
        base = lmin if lmin > rmin else rmin
        if h - base >= thr:
            cand[m].h = h
            cand[m].i = i
            m += 1
    if m == 0:
        return 0
    if distance <= 1 or m == 1:
        for j in range(m):
            out[j] = cand[j].i
        return m
    # cand is in index order here; keep[] is indexed by sample position
    for i in range(n):
        keep[i] = 0
    for j in range(m):
        keep[cand[j].i] = 1
    qsort(cand, m, sizeof(Cand), _cmp_cand)
    for j in range(m):
        p = cand[j].i
        if keep[p] != 1:
            continue
        keep[p] = 2
        q = p - distance + 1
        if q < 0:
            q = 0
        while q < p + distance and q < n:
            if keep[q] == 1:
                keep[q] = 0
            q += 1
    j = 0
    for i in range(n):
        if keep[i] == 2:
            out[j] = i
            j += 1
    return j


def detect_peaks(x, Py_ssize_t distance, double prom_factor, Py_ssize_t detrend_width):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], m
    if n < 3:
        return np.empty(0, dtype=np.int64)
    cdef double* d = <double*> malloc(n * sizeof(double))
    cdef double* cs = <double*> malloc((n + 1) * sizeof(double))
    cdef Cand* cand = <Cand*> malloc(n * sizeof(Cand))
    cdef char* keep = <char*> malloc(n)
    res = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] r = res
    cdef Py_ssize_t* outbuf = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t i
    m = _detect(&xv[0], n, distance, prom_factor, detrend_width, d, cs, cand, keep, outbuf)
    for i in range(m):
        r[i] = outbuf[i]
    free(d); free(cs); free(cand); free(keep); free(outbuf)
    return res[:m].copy()


def windowed_hr(x, double fs, ends, Py_ssize_t width, Py_ssize_t distance,
                double prom_factor, Py_ssize_t detrend_width):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const cnp.int64_t[::1] ev = np.ascontiguousarray(ends, dtype=np.int64)
    cdef Py_ssize_t nw = ev.shape[0], w, m, end
    out = np.full(nw, np.nan)
    cdef double[::1] o = out
    cdef double* d = <double*> malloc(width * sizeof(double))
    cdef double* cs = <double*> malloc((width + 1) * sizeof(double))
    cdef Cand* cand = <Cand*> malloc(width * sizeof(Cand))
    cdef char* keep = <char*> malloc(width)
    cdef Py_ssize_t* pk = <Py_ssize_t*> malloc(width * sizeof(Py_ssize_t))
    with nogil:
        for w in range(nw):
            end = ev[w]
            m = _detect(&xv[end - width], width, distance, prom_factor,
                        detrend_width, d, cs, cand, keep, pk)
            if m >= 2:
                o[w] = 60.0 * (m - 1) * fs / (pk[m - 1] - pk[0])
    free(d); free(cs); free(cand); free(keep); free(pk)
    return out


# ---------------------------------------------------------------- trees

cdef class _TreeBuilder:
    """Greedy CART over presorted per-feature row orders.

    ``order[f*n + j]`` lists the rows of the current node sorted by feature
    ``f`` (ties by row index); every split stably partitions each of these
    lists, so a node always owns the same ``[start, end)`` slice in all of
    them and no sorting happens below the root.
    """
    cdef const double[:, ::1] X
    cdef const double[::1] y
    cdef int max_depth
    cdef Py_ssize_t n, k, count
    cdef cnp.int32_t[::1] feature, left, right
    cdef double[::1] threshold, value
    cdef Py_ssize_t* idx
    cdef Py_ssize_t* order
    cdef Py_ssize_t* tmp
    cdef double* yc
    cdef char* goes_left

    def __cinit__(self, X, y, int max_depth):
        self.X = X
        self.y = y
        self.max_depth = max_depth
        self.n = X.shape[0]
        self.k = X.shape[1]
        self.count = 0
        cap = max(1, 2 * self.n - 1)
        self.feature = np.full(cap, -1, dtype=np.int32)
        self.left = np.full(cap, -1, dtype=np.int32)
        self.right = np.full(cap, -1, dtype=np.int32)
        self.threshold = np.zeros(cap)
        self.value = np.zeros(cap)
        self.idx = <Py_ssize_t*> malloc(max(1, self.n) * sizeof(Py_ssize_t))
        self.order = <Py_ssize_t*> malloc(max(1, self.n * self.k) * sizeof(Py_ssize_t))
        self.tmp = <Py_ssize_t*> malloc(max(1, self.n) * sizeof(Py_ssize_t))
        self.yc = <double*> malloc(max(1, self.n) * sizeof(double))
        self.goes_left = <char*> malloc(max(1, self.n))
        cdef Py_ssize_t i, f
        cdef const cnp.intp_t[::1] srt
        for i in range(self.n):
            self.idx[i] = i
        for f in range(self.k):
            srt = np.ascontiguousarray(np.argsort(X[:, f], kind="stable"), dtype=np.intp)
            for i in range(self.n):
                self.order[f * self.n + i] = srt[i]

    def __dealloc__(self):
        free(self.idx); free(self.order); free(self.tmp); free(self.yc); free(self.goes_left)

    cdef void _partition(self, Py_ssize_t* a, Py_ssize_t start, Py_ssize_t end) noexcept nogil:
        cdef Py_ssize_t i, pos = 0, m = end - start
        for i in range(start, end):
            if self.goes_left[a[i]]:
                self.tmp[pos] = a[i]
                pos += 1
        for i in range(start, end):
            if not self.goes_left[a[i]]:
                self.tmp[pos] = a[i]
                pos += 1
        memcpy(&a[start], self.tmp, m * sizeof(Py_ssize_t))

    cdef Py_ssize_t grow(self, Py_ssize_t start, Py_ssize_t end, int depth) noexcept nogil:
        cdef Py_ssize_t node = self.count, m = end - start, i, p, f, r, nl_count, best_f = -1
        cdef Py_ssize_t* o
        cdef double total = 0.0, mean, ymin, ymax, v, tot_s = 0.0, tot_q = 0.0
        cdef double s, q, nl, nr, sse, best = INFINITY, best_t = 0.0, xa, xb
        self.count += 1
        # sums run in row-index order so results match the reference builder
        for i in range(start, end):
            total += self.y[self.idx[i]]
        mean = total / m
        self.value[node] = mean
        if depth >= self.max_depth or m < 2:
            return node
        ymin = ymax = self.y[self.idx[start]]
        for i in range(start, end):
            v = self.y[self.idx[i]]
            if v < ymin:
                ymin = v
            if v > ymax:
                ymax = v
        if ymin == ymax:
            return node
        for i in range(start, end):
            r = self.idx[i]
            v = self.y[r] - mean
            self.yc[r] = v
            tot_s += v
        for i in range(start, end):
            r = self.idx[i]
            tot_q += self.yc[r] * self.yc[r]
        for f in range(self.k):
            o = &self.order[f * self.n]
            s = 0.0
            q = 0.0
            for p in range(start, end - 1):
                v = self.yc[o[p]]
                s += v
                q += v * v
                xa = self.X[o[p], f]
                xb = self.X[o[p + 1], f]
                if not (xa < xb):
                    continue
                nl = p - start + 1
                nr = m - nl
                sse = (q - s * s / nl) + ((tot_q - q) - (tot_s - s) * (tot_s - s) / nr)
                if sse < best:
                    best = sse
                    best_f = f
                    best_t = (xa + xb) / 2.0
                    if not (best_t < xb):  # adjacent doubles: keep xb on the right
                        best_t = xa
        if best_f < 0:
            return node
        nl_count = 0
        for i in range(start, end):
            r = self.idx[i]
            if self.X[r, best_f] <= best_t:
                self.goes_left[r] = 1
                nl_count += 1
            else:
                self.goes_left[r] = 0
        self._partition(self.idx, start, end)
        for f in range(self.k):
            self._partition(&self.order[f * self.n], start, end)
        self.feature[node] = best_f
        self.threshold[node] = best_t
        self.left[node] = self.grow(start, start + nl_count, depth + 1)
        self.right[node] = self.grow(start + nl_count, end, depth + 1)
        return node


def build_tree(X, y, int max_depth):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    cdef _TreeBuilder b = _TreeBuilder(X, y, max_depth)
    with nogil:
        b.grow(0, b.n, 0)
    c = b.count
    return (np.asarray(b.feature)[:c].copy(), np.asarray(b.threshold)[:c].copy(),
            np.asarray(b.left)[:c].copy(), np.asarray(b.right)[:c].copy(),
            np.asarray(b.value)[:c].copy())


cdef class TreeEvaluator:
    """Single-row and batch traversal over a flattened tree."""
    cdef const cnp.int32_t[::1] f, l, r
    cdef const double[::1] t, v
    cdef object _keep

    def __init__(self, feature, threshold, left, right, value):
        self._keep = (np.ascontiguousarray(feature, dtype=np.int32),
                      np.ascontiguousarray(threshold, dtype=np.float64),
                      np.ascontiguousarray(left, dtype=np.int32),
                      np.ascontiguousarray(right, dtype=np.int32),
                      np.ascontiguousarray(value, dtype=np.float64))
        self.f, self.t, self.l, self.r, self.v = self._keep

    cpdef double predict_one(self, x):
        cdef Py_ssize_t i = 0
        cdef const double[::1] xv
        if isinstance(x, np.ndarray):
            xv = x
            while self.f[i] >= 0:
                i = self.l[i] if xv[self.f[i]] <= self.t[i] else self.r[i]
        else:
            while self.f[i] >= 0:
                i = self.l[i] if <double> x[self.f[i]] <= self.t[i] else self.r[i]
        return self.v[i]

    def predict(self, X):
        cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
        cdef Py_ssize_t j, i, n = xv.shape[0]
        out = np.empty(n)
        cdef double[::1] o = out
        with nogil:
            for j in range(n):
                i = 0
                while self.f[i] >= 0:
                    i = self.l[i] if xv[j, self.f[i]] <= self.t[i] else self.r[i]
                o[j] = self.v[i]
        return out


# ---------------------------------------------------------------- knn

def knn_predict(Xt, yt, Xq, Py_ssize_t n_neighbors, int metric):
    cdef const double[:, ::1] T = np.ascontiguousarray(Xt, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(yt, dtype=np.float64)
    cdef const double[:, ::1] Q = np.ascontiguousarray(Xq, dtype=np.float64)
    cdef Py_ssize_t n = T.shape[0], k = T.shape[1], nq = Q.shape[0]
    cdef Py_ssize_t a, i, j, c, kk = n_neighbors
    cdef double dist, diff, acc
    out = np.empty(nq)
    cdef double[::1] o = out
    cdef double* bd = <double*> malloc(kk * sizeof(double))
    cdef Py_ssize_t* bi = <Py_ssize_t*> malloc(kk * sizeof(Py_ssize_t))
    with nogil:
        for a in range(nq):
            c = 0
            for i in range(n):
                dist = 0.0
                if metric == 0:
                    for j in range(k):
                        dist += fabs(Q[a, j] - T[i, j])
                else:
                    for j in range(k):
                        diff = Q[a, j] - T[i, j]
                        dist += diff * diff
                    dist = sqrt(dist)
                # bounded insertion; strict < keeps earlier rows ahead on ties
                if c < kk:
                    j = c
                    c += 1
                elif dist < bd[kk - 1]:
                    j = kk - 1
                else:
                    continue
                while j > 0 and dist < bd[j - 1]:
                    bd[j] = bd[j - 1]
                    bi[j] = bi[j - 1]
                    j -= 1
                bd[j] = dist
                bi[j] = i
            acc = 0.0
            for j in range(kk):
                acc += Y[bi[j]]
            o[a] = acc / kk
    free(bd); free(bi)
    return out


# ---------------------------------------------------------------- svr

cdef inline double _kernel(const double* a, const double* b, Py_ssize_t k, int kernel,
                           double gamma, double coef0, int degree) noexcept nogil:
    cdef Py_ssize_t j
    cdef double acc = 0.0, diff
    if kernel == 0:
        for j in range(k):
            diff = a[j] - b[j]
            acc += diff * diff
        return exp(-gamma * acc)
    for j in range(k):
        acc += a[j] * b[j]
    if kernel == 1:
        return tanh(gamma * acc + coef0)
    return pow(gamma * acc + coef0, degree)


def kernel_matrix(A, B, int kernel, double gamma, double coef0, int degree):
    cdef const double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef Py_ssize_t i, j, na = a.shape[0], nb = b.shape[0], k = a.shape[1]
    out = np.empty((na, nb))
    cdef double[:, ::1] o = out
    if na == 0 or nb == 0:
        return out
    with nogil:
        for i in range(na):
            for j in range(nb):
                o[i, j] = _kernel(&a[i, 0], &b[j, 0], k, kernel, gamma, coef0, degree)
    return out


cdef class _RowCache:
    """FIFO cache of kernel rows K(i, :) over the l training rows."""
    cdef const double[:, ::1] X
    cdef Py_ssize_t l, k, slots, next_slot
    cdef int kernel, degree
    cdef double gamma, coef0
    cdef double* data
    cdef Py_ssize_t* slot_of
    cdef Py_ssize_t* owner

    def __cinit__(self, X, int kernel, double gamma, double coef0, int degree,
                  Py_ssize_t budget_bytes):
        self.X = X
        self.l = X.shape[0]
        self.k = X.shape[1]
        self.kernel = kernel
        self.gamma = gamma
        self.coef0 = coef0
        self.degree = degree
        self.slots = max(2, min(self.l, budget_bytes // max(1, self.l * 8)))
        self.next_slot = 0
        self.data = <double*> malloc(self.slots * self.l * sizeof(double))
        self.slot_of = <Py_ssize_t*> malloc(self.l * sizeof(Py_ssize_t))
        self.owner = <Py_ssize_t*> malloc(self.slots * sizeof(Py_ssize_t))
        for i in range(self.l):
            self.slot_of[i] = -1
        for i in range(self.slots):
            self.owner[i] = -1

    def __dealloc__(self):
        free(self.data); free(self.slot_of); free(self.owner)

    cdef double* row(self, Py_ssize_t i, Py_ssize_t pinned) noexcept nogil:
        cdef Py_ssize_t s = self.slot_of[i], j
        cdef double* r
        if s >= 0:
            return self.data + s * self.l
        s = self.next_slot
        if self.owner[s] == pinned and pinned >= 0:
            s = (s + 1) % self.slots
        self.next_slot = (s + 1) % self.slots
        if self.owner[s] >= 0:
            self.slot_of[self.owner[s]] = -1
        self.owner[s] = i
        self.slot_of[i] = s
        r = self.data + s * self.l
        for j in range(self.l):
            r[j] = _kernel(&self.X[i, 0], &self.X[j, 0], self.k, self.kernel,
                           self.gamma, self.coef0, self.degree)
        return r


def smo_solve(X, z, double C, double epsilon, int kernel, double gamma,
              double coef0, int degree, double tol, long max_iter,
              Py_ssize_t cache_bytes=256 * 1024 * 1024):
    X = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t l = X.shape[0], n = 2 * l, t, i, j, ii, jj
    cdef _RowCache cache = _RowCache(X, kernel, gamma, coef0, degree, cache_bytes)
    alpha_a = np.zeros(n)
    G_a = np.empty(n)
    QD_a = np.empty(n)
    cdef double[::1] alpha = alpha_a
    cdef double[::1] G = G_a
    cdef double[::1] QD = QD_a
    cdef const double[:, ::1] xv = X
    cdef double* Ki
    cdef double* Kj
    cdef double gmax, gmax2, score, grad_diff, quad, obj, obj_min, yi, yj, kij
    cdef double ai, aj, ni, nj, delta, diff, s, q, dai, daj, violation = INFINITY
    cdef long it = 0
    cdef Py_ssize_t k = X.shape[1]
    for t in range(l):
        G[t] = epsilon - zv[t]
        G[t + l] = epsilon + zv[t]
        QD[t] = _kernel(&xv[t, 0], &xv[t, 0], k, kernel, gamma, coef0, degree)
        QD[t + l] = QD[t]
    with nogil:
        while it < max_iter:
            gmax = -INFINITY
            i = -1
            for t in range(n):
                if t < l:
                    if alpha[t] < C and -G[t] > gmax:
                        gmax = -G[t]
                        i = t
                else:
                    if alpha[t] > 0 and G[t] > gmax:
                        gmax = G[t]
                        i = t
            if i < 0:
                violation = 0.0
                break
            ii = i % l
            yi = 1.0 if i < l else -1.0
            Ki = cache.row(ii, -1)
            gmax2 = -INFINITY
            j = -1
            obj_min = INFINITY
            for t in range(n):
                if t < l:
                    if not (alpha[t] > 0):
                        continue
                    score = G[t]
                    grad_diff = gmax + G[t]
                else:
                    if not (alpha[t] < C):
                        continue
                    score = -G[t]
                    grad_diff = gmax - G[t]
                if score >= gmax2:
                    gmax2 = score
                if grad_diff > 0:
                    quad = QD[i] + QD[t] - 2.0 * Ki[t % l]
                    if quad <= 0:
                        quad = TAU
                    obj = -(grad_diff * grad_diff) / quad
                    if obj < obj_min:
                        obj_min = obj
                        j = t
            violation = gmax + gmax2
            if violation < tol or j < 0:
                break
            jj = j % l
            yj = 1.0 if j < l else -1.0
            Kj = cache.row(jj, ii)
            Ki = cache.row(ii, jj)
            kij = Ki[jj]
            ai = alpha[i]
            aj = alpha[j]
            if yi != yj:
                quad = QD[i] + QD[j] - 2.0 * kij
                if quad <= 0:
                    quad = TAU
                delta = (-G[i] - G[j]) / quad
                diff = ai - aj
                ni = ai + delta
                nj = aj + delta
                if diff > 0:
                    if nj < 0:
                        nj = 0.0
                        ni = diff
                elif ni < 0:
                    ni = 0.0
                    nj = -diff
                if diff > 0:
                    if ni > C:
                        ni = C
                        nj = C - diff
                elif nj > C:
                    nj = C
                    ni = C + diff
            else:
                quad = QD[i] + QD[j] - 2.0 * kij
                if quad <= 0:
                    quad = TAU
                delta = (G[i] - G[j]) / quad
                s = ai + aj
                ni = ai - delta
                nj = aj + delta
                if s > C:
                    if ni > C:
                        ni = C
                        nj = s - C
                elif nj < 0:
                    nj = 0.0
                    ni = s
                if s > C:
                    if nj > C:
                        nj = C
                        ni = s - C
                elif ni < 0:
                    ni = 0.0
                    nj = s
            alpha[i] = ni
            alpha[j] = nj
            dai = (ni - ai) * yi
            daj = (nj - aj) * yj
            # G[t] += y_t * (K(i,t) * y_i * dai + K(j,t) * y_j * daj)
            for t in range(l):
                q = Ki[t] * dai + Kj[t] * daj
                G[t] += q
                G[t + l] -= q
            it += 1
    rho = _rho(alpha_a, G_a, l, C)
    coef = alpha_a[:l] - alpha_a[l:]
    return coef, rho, int(it), float(violation)


cdef double _rho(double[::1] alpha, double[::1] G, Py_ssize_t l, double C):
    cdef Py_ssize_t t, n = 2 * l, nfree = 0
    cdef double ub = INFINITY, lb = -INFINITY, sfree = 0.0, yG, y
    for t in range(n):
        y = 1.0 if t < l else -1.0
        yG = y * G[t]
        if alpha[t] >= C:
            if y < 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        elif alpha[t] <= 0:
            if y > 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        else:
            nfree += 1
            sfree += yG
    if nfree > 0:
        return sfree / nfree
    return (ub + lb) / 2.0


def svr_decision(SV, coef, double rho, Xq, int kernel, double gamma, double coef0, int degree):
    cdef const double[:, ::1] sv = np.ascontiguousarray(SV, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(coef, dtype=np.float64)
    cdef const double[:, ::1] q = np.ascontiguousarray(np.atleast_2d(Xq), dtype=np.float64)
    cdef Py_ssize_t a, i, ns = sv.shape[0], nq = q.shape[0], k = q.shape[1]
    cdef double acc
    out = np.empty(nq)
    cdef double[::1] o = out
    with nogil:
        for a in range(nq):
            acc = 0.0
            for i in range(ns):
                acc += c[i] * _kernel(&sv[i, 0], &q[a, 0], k, kernel, gamma, coef0, degree)
            o[a] = acc - rho
    return out


# ---------------------------------------------------------------- mlp

def mlp_unpack(theta, sizes):
    layers = []
    off = 0
    sizes = tuple(sizes)
    for a, b in zip(sizes[:len(sizes) - 1], sizes[1:]):
        W = theta[off:off + a * b].reshape(a, b)
        off += a * b
        bias = theta[off:off + b]
        off += b
        layers.append((W, bias))
    return layers


def mlp_forward(theta, sizes, X, int act):
    h = np.asarray(X, dtype=np.float64)
    layers = mlp_unpack(theta, sizes)
    for li, (W, b) in enumerate(layers):
        h = h @ W + b
        if li < len(layers) - 1:
            h = np.maximum(h, 0.0) if act == 0 else np.tanh(h)
    return h[:, 0]


cdef void _batch_grad(const double* theta, double* grad, const Py_ssize_t* sizes,
                      Py_ssize_t nl, const double[:, ::1] X, const double[::1] y,
                      const cnp.int64_t* rows, Py_ssize_t m, double alpha, int act,
                      double* acts, double* delta, double* delta2,
                      Py_ssize_t width, double* loss) noexcept nogil:
    """Accumulates the batch gradient of mean sq. error + L2 into ``grad``.

    ``acts`` holds (nl+1) rows of ``width`` doubles for a single sample.
    """
    cdef Py_ssize_t P = 0, li, a, b, r, j, off, s, wo, bo
    cdef double acc, err, v, total = 0.0
    for li in range(nl):
        P += sizes[li] * sizes[li + 1] + sizes[li + 1]
    for j in range(P):
        grad[j] = 0.0
    for s in range(m):
        r = rows[s]
        for j in range(sizes[0]):
            acts[j] = X[r, j]
        off = 0
        for li in range(nl):
            a = sizes[li]
            b = sizes[li + 1]
            for j in range(b):
                acc = theta[off + a * b + j]
                for wo in range(a):
                    acc += acts[li * width + wo] * theta[off + wo * b + j]
                if li < nl - 1:
                    if act == 0:
                        acc = acc if acc > 0 else 0.0
                    else:
                        acc = tanh(acc)
                acts[(li + 1) * width + j] = acc
            off += a * b + b
        err = acts[nl * width] - y[r]
        total += err * err
        delta[0] = 2.0 * err / m
        # backward; off points at the start of layer li's block
        for li in range(nl - 1, -1, -1):
            a = sizes[li]
            b = sizes[li + 1]
            off -= a * b + b
            for wo in range(a):
                v = acts[li * width + wo]
                for j in range(b):
                    grad[off + wo * b + j] += v * delta[j]
            bo = off + a * b
            for j in range(b):
                grad[bo + j] += delta[j]
            if li > 0:
                for wo in range(a):
                    acc = 0.0
                    for j in range(b):
                        acc += theta[off + wo * b + j] * delta[j]
                    v = acts[li * width + wo]
                    if act == 0:
                        delta2[wo] = acc if v > 0 else 0.0
                    else:
                        delta2[wo] = acc * (1.0 - v * v)
                for wo in range(a):
                    delta[wo] = delta2[wo]
    loss[0] = total / m
    off = 0
    acc = 0.0
    for li in range(nl):
        a = sizes[li]
        b = sizes[li + 1]
        for j in range(a * b):
            grad[off + j] += alpha * theta[off + j]
            acc += theta[off + j] * theta[off + j]
        off += a * b + b
    loss[0] += 0.5 * alpha * acc


cdef Py_ssize_t* _sizes_buf(sizes, Py_ssize_t* width):
    cdef Py_ssize_t nl = len(sizes) - 1
    cdef Py_ssize_t* sz = <Py_ssize_t*> malloc((nl + 1) * sizeof(Py_ssize_t))
    width[0] = 1
    for i in range(nl + 1):
        sz[i] = sizes[i]
        if sz[i] > width[0]:
            width[0] = sz[i]
    return sz


def mlp_loss_grad(theta, sizes, X, y, double alpha, int act):
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t width, nl = len(sizes) - 1, m = xv.shape[0]
    cdef Py_ssize_t* sz = _sizes_buf(sizes, &width)
    grad_a = np.zeros(th.shape[0])
    cdef double[::1] g = grad_a
    rows_a = np.arange(m, dtype=np.int64)
    cdef cnp.int64_t[::1] rows = rows_a
    cdef double* acts = <double*> malloc((nl + 1) * width * sizeof(double))
    cdef double* d1 = <double*> malloc(width * sizeof(double))
    cdef double* d2 = <double*> malloc(width * sizeof(double))
    cdef double loss = 0.0
    _batch_grad(&th[0], &g[0], sz, nl, xv, yv, &rows[0], m, alpha, act,
                acts, d1, d2, width, &loss)
    free(sz); free(acts); free(d1); free(d2)
    return loss, grad_a


def mlp_epoch(theta, m1, m2, long step, sizes, X, y, perm, Py_ssize_t batch,
              double alpha, double lr, int act):
    cdef double[::1] th = theta
    cdef double[::1] mv = m1
    cdef double[::1] vv = m2
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const cnp.int64_t[::1] pv = np.ascontiguousarray(perm, dtype=np.int64)
    cdef Py_ssize_t width, nl = len(sizes) - 1, n = pv.shape[0], P = th.shape[0]
    cdef Py_ssize_t* sz = _sizes_buf(sizes, &width)
    cdef double* g = <double*> malloc(P * sizeof(double))
    cdef double* acts = <double*> malloc((nl + 1) * width * sizeof(double))
    cdef double* d1 = <double*> malloc(width * sizeof(double))
    cdef double* d2 = <double*> malloc(width * sizeof(double))
    cdef double loss, b1 = 0.9, b2 = 0.999, eps = 1e-8, c1, c2
    cdef Py_ssize_t s, m, j
    with nogil:
        s = 0
        while s < n:
            m = batch if s + batch <= n else n - s
            _batch_grad(&th[0], g, sz, nl, xv, yv, &pv[s], m, alpha, act,
                        acts, d1, d2, width, &loss)
            step += 1
            c1 = 1.0 - pow(b1, step)
            c2 = 1.0 - pow(b2, step)
            for j in range(P):
                mv[j] = b1 * mv[j] + (1.0 - b1) * g[j]
                vv[j] = b2 * vv[j] + (1.0 - b2) * g[j] * g[j]
                th[j] -= lr * (mv[j] / c1) / (sqrt(vv[j] / c2) + eps)
            s += batch
    free(sz); free(g); free(acts); free(d1); free(d2)
    return step
