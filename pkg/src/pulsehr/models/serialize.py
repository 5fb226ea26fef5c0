"""Canonical little-endian binary model format.

Layout::

    b"PHRM" | version u8 (=1) | kind u8
    u32 header length | header   (k u32, rows u32, seed u64, hyperparams)
    u32 payload length | payload (kind specific)

All floats are 64-bit, there is no padding, and equal artifacts serialize to
equal bytes.
"""

import struct

import numpy as np

from ..errors import BadMagic, FormatError, TruncatedPayload, UnsupportedVersion
from .artifact import (ForestPayload, KnnPayload, MlpPayload, ModelArtifact,
                       SvrPayload, TrainMeta, TreePayload)
from .params import (ACTIVATIONS, GAMMA_MODES, KNN_METRICS, SVR_KERNELS,
                     DTParams, KNNParams, MLPParams, ModelKind, RFParams,
                     SVRParams)

MAGIC = b"PHRM"
VERSION = 1
_NODE = struct.Struct("<HdBd")


class _Writer:
    def __init__(self):
        self.parts = []

    def pack(self, fmt, *vals):
        self.parts.append(struct.pack("<" + fmt, *vals))

    def floats(self, arr):
        self.parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    def bytes(self):
        return b"".join(self.parts)


class _Reader:
    def __init__(self, buf, what):
        self.buf = memoryview(buf)
        self.pos = 0
        self.what = what

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise TruncatedPayload(f"{self.what}: need {n} bytes at offset {self.pos}, "
                                   f"only {len(self.buf) - self.pos} left")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        s = struct.Struct("<" + fmt)
        vals = s.unpack(self.take(s.size))
        return vals[0] if len(vals) == 1 else vals

    def floats(self, count):
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)

    def done(self):
        if self.pos != len(self.buf):
            raise FormatError(f"{self.what}: {len(self.buf) - self.pos} trailing bytes")


# ---------------------------------------------------------------- header

def _write_header(w, m):
    meta, hp = m.train_meta, m.hyperparams
    w.pack("IIQ", meta.k, meta.n_rows, meta.seed)
    if m.kind is ModelKind.DT:
        w.pack("B", hp.max_depth)
    elif m.kind is ModelKind.RF:
        w.pack("BBB", hp.n_trees, hp.max_depth, int(hp.bootstrap))
    elif m.kind is ModelKind.KNN:
        w.pack("BB", hp.n_neighbors, KNN_METRICS.index(hp.metric))
    elif m.kind is ModelKind.SVR:
        w.pack("BddBBd", SVR_KERNELS.index(hp.kernel), hp.c, hp.epsilon_bpm,
               GAMMA_MODES.index(hp.gamma_mode), hp.degree, hp.coef0)
    elif m.kind is ModelKind.MLP:
        w.pack("BBBBddIII", *hp.hidden, ACTIVATIONS.index(hp.activation), hp.alpha,
               hp.lr, hp.batch, hp.max_epochs, hp.patience)


def _choice(options, i, name):
    if i >= len(options):
        raise FormatError(f"bad {name} code {i}")
    return options[i]


def _read_header(r, kind):
    k, rows, seed = r.unpack("IIQ")
    if kind is ModelKind.DT:
        hp = DTParams(r.unpack("B"))
    elif kind is ModelKind.RF:
        n, d, b = r.unpack("BBB")
        hp = RFParams(n, d, bool(b))
    elif kind is ModelKind.KNN:
        n, metric = r.unpack("BB")
        hp = KNNParams(n, _choice(KNN_METRICS, metric, "metric"))
    elif kind is ModelKind.SVR:
        kern, c, eps, gm, deg, coef0 = r.unpack("BddBBd")
        hp = SVRParams(_choice(SVR_KERNELS, kern, "kernel"), c, eps,
                       _choice(GAMMA_MODES, gm, "gamma mode"), deg, coef0)
    else:
        h1, h2, h3, act, alpha, lr, batch, epochs, patience = r.unpack("BBBBddIII")
        hp = MLPParams((h1, h2, h3), _choice(ACTIVATIONS, act, "activation"),
                       alpha, lr, batch, epochs, patience)
    return TrainMeta(k, rows, seed), hp


# ---------------------------------------------------------------- payloads

def _write_tree(w, t):
    w.pack("I", t.n_nodes)
    parts = []
    for f, thr, v in zip(t.feature.tolist(), t.threshold.tolist(), t.value.tolist()):
        if f < 0:
            parts.append(_NODE.pack(0, 0.0, 1, v))
        else:
            parts.append(_NODE.pack(f, thr, 0, v))
    w.parts.append(b"".join(parts))


def _read_tree(r):
    n = r.unpack("I")
    raw = r.take(_NODE.size * n)
    nodes = list(_NODE.iter_unpack(raw))
    feature = np.full(n, -1, dtype=np.int32)
    threshold = np.zeros(n)
    value = np.zeros(n)
    left = np.full(n, -1, dtype=np.int32)
    right = np.full(n, -1, dtype=np.int32)
    # preorder: left child follows its parent, right child follows the left subtree
    pos = 0

    def parse():
        nonlocal pos
        if pos >= n:
            raise TruncatedPayload("tree ends before all children were read")
        i = pos
        pos += 1
        f, thr, leaf, v = nodes[i]
        value[i] = v
        if not leaf:
            feature[i] = f
            threshold[i] = thr
        return i

    root = parse()
    # iterative to avoid recursion limits on deep trees
    pending = [(root, 0)]
    while pending:
        i, state = pending.pop()
        if feature[i] < 0:
            continue
        if state == 0:
            left[i] = parse()
            pending.append((i, 1))
            pending.append((left[i], 0))
        else:
            right[i] = parse()
            pending.append((right[i], 0))
    if pos != n:
        raise FormatError(f"tree declares {n} nodes but only {pos} are reachable")
    return TreePayload(feature, threshold, left, right, value)


def _write_payload(w, m):
    p = m.payload
    if m.kind is ModelKind.DT:
        _write_tree(w, p)
    elif m.kind is ModelKind.RF:
        w.pack("I", len(p.trees))
        for t in p.trees:
            _write_tree(w, t)
    elif m.kind is ModelKind.KNN:
        w.pack("I", p.y.shape[0])
        w.floats(p.X)
        w.floats(p.y)
    elif m.kind is ModelKind.SVR:
        w.pack("I", p.dual_coef.shape[0])
        w.floats(p.support_vectors)
        w.floats(p.dual_coef)
        w.pack("dd", p.bias, p.gamma)
        w.floats(p.x_mean)
        w.floats(p.x_scale)
        w.pack("B", int(p.converged))
    elif m.kind is ModelKind.MLP:
        w.pack("B", len(p.sizes))
        w.pack("H" * len(p.sizes), *p.sizes)
        layers = p.layers()
        for W, _ in layers:
            w.floats(W)
        for _, b in layers:
            w.floats(b)
        w.floats(p.x_mean)
        w.floats(p.x_scale)


def _read_payload(r, kind, k):
    if kind is ModelKind.DT:
        return _read_tree(r)
    if kind is ModelKind.RF:
        n = r.unpack("I")
        return ForestPayload(tuple(_read_tree(r) for _ in range(n)))
    if kind is ModelKind.KNN:
        n = r.unpack("I")
        X = r.floats(n * k).reshape(n, k)
        return KnnPayload(X, r.floats(n))
    if kind is ModelKind.SVR:
        n = r.unpack("I")
        sv = r.floats(n * k).reshape(n, k)
        coef = r.floats(n)
        bias, gamma = r.unpack("dd")
        mean = r.floats(k)
        scale = r.floats(k)
        conv = bool(r.unpack("B"))
        return SvrPayload(sv, coef, bias, gamma, mean, scale, conv)
    n_sizes = r.unpack("B")
    sizes = r.unpack("H" * n_sizes)
    sizes = (sizes,) if isinstance(sizes, int) else tuple(sizes)
    if n_sizes < 2 or sizes[0] != k:
        raise FormatError(f"bad layer sizes {sizes} for k={k}")
    Ws = [r.floats(a * b) for a, b in zip(sizes[:-1], sizes[1:])]
    bs = [r.floats(b) for b in sizes[1:]]
    theta = np.concatenate([x for pair in zip(Ws, bs) for x in pair])
    mean = r.floats(k)
    scale = r.floats(k)
    return MlpPayload(sizes, theta, mean, scale)


# ---------------------------------------------------------------- api

def serialize(m):
    """Canonical bytes for ``m``."""
    head = _Writer()
    _write_header(head, m)
    body = _Writer()
    _write_payload(body, m)
    hb, pb = head.bytes(), body.bytes()
    return b"".join([MAGIC, bytes([VERSION, int(m.kind)]),
                     struct.pack("<I", len(hb)), hb, struct.pack("<I", len(pb)), pb])


def deserialize(data):
    data = bytes(data)
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic("not a pulsehr model file (bad magic)")
    r = _Reader(data, "model")
    r.take(4)
    version, kind_code = r.unpack("BB")
    if version != VERSION:
        raise UnsupportedVersion(f"model format version {version} is not supported")
    try:
        kind = ModelKind(kind_code)
    except ValueError:
        raise FormatError(f"unknown model kind code {kind_code}") from None
    hlen = r.unpack("I")
    hr = _Reader(r.take(hlen), "header")
    meta, hp = _read_header(hr, kind)
    hr.done()
    plen = r.unpack("I")
    pr = _Reader(r.take(plen), "payload")
    payload = _read_payload(pr, kind, meta.k)
    pr.done()
    r.done()
    return ModelArtifact(kind, hp, payload, meta)


def model_size(m):
    """Serialized size in bytes."""
    return len(serialize(m))


def save(m, path):
    with open(path, "wb") as fh:
        fh.write(serialize(m))


def load(path):
    with open(path, "rb") as fh:
        return deserialize(fh.read())
