"""Trained-model container and the prediction entry points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import DimensionMismatch
from ..signal_model import HR_MAX_BPM, HR_MIN_BPM
from .params import ModelKind


def _ro(a, dtype=np.float64):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TreePayload:
    """Preorder node arrays; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "feature", _ro(self.feature, np.int32))
        object.__setattr__(self, "threshold", _ro(self.threshold))
        object.__setattr__(self, "left", _ro(self.left, np.int32))
        object.__setattr__(self, "right", _ro(self.right, np.int32))
        object.__setattr__(self, "value", _ro(self.value))

    @property
    def n_nodes(self):
        return int(self.feature.shape[0])

    @property
    def depth(self):
        def d(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(d(self.left[i]), d(self.right[i]))
        return d(0)

    def evaluator(self):
        return kernels.TreeEvaluator(self.feature, self.threshold, self.left,
                                     self.right, self.value)


@dataclass(frozen=True, eq=False)
class ForestPayload:
    trees: tuple


@dataclass(frozen=True, eq=False)
class KnnPayload:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "X", _ro(self.X))
        object.__setattr__(self, "y", _ro(self.y))


@dataclass(frozen=True, eq=False)
class SvrPayload:
    support_vectors: np.ndarray
    dual_coef: np.ndarray
    bias: float
    gamma: float
    x_mean: np.ndarray
    x_scale: np.ndarray
    converged: bool = True

    def __post_init__(self):
        sv = np.array(self.support_vectors, dtype=np.float64).reshape(-1, len(self.x_mean))
        object.__setattr__(self, "support_vectors", _ro(sv))
        object.__setattr__(self, "dual_coef", _ro(self.dual_coef))
        object.__setattr__(self, "x_mean", _ro(self.x_mean))
        object.__setattr__(self, "x_scale", _ro(self.x_scale))
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "gamma", float(self.gamma))


@dataclass(frozen=True, eq=False)
class MlpPayload:
    sizes: tuple
    theta: np.ndarray
    x_mean: np.ndarray
    x_scale: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "theta", _ro(self.theta))
        object.__setattr__(self, "x_mean", _ro(self.x_mean))
        object.__setattr__(self, "x_scale", _ro(self.x_scale))

    def layers(self):
        return kernels.mlp_unpack(self.theta, self.sizes)


@dataclass(frozen=True)
class TrainMeta:
    k: int
    n_rows: int
    seed: int = 0


@dataclass(frozen=True, eq=False)
class ModelArtifact:
    kind: ModelKind
    hyperparams: object
    payload: object
    train_meta: TrainMeta
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def k(self):
        return self.train_meta.k

    def _raw_batch(self):
        fn = self._cache.get("batch")
        if fn is None:
            fn = _make_batch(self)
            self._cache["batch"] = fn
        return fn

    def _raw_one(self):
        fn = self._cache.get("one")
        if fn is None:
            fn = _make_one(self)
            self._cache["one"] = fn
        return fn


def _standardized_vec(p, x):
    return ((np.asarray(x, dtype=np.float64) - p.x_mean) / p.x_scale)[None, :]


def _make_one(m):
    p = m.payload
    if m.kind is ModelKind.DT:
        return p.evaluator().predict_one
    if m.kind is ModelKind.RF:
        evs = [t.evaluator().predict_one for t in p.trees]
        inv = 1.0 / len(evs)

        def rf_one(x):
            acc = 0.0
            for e in evs:
                acc += e(x)
            return acc * inv
        return rf_one
    if m.kind is ModelKind.KNN:
        nn = m.hyperparams.n_neighbors
        metric = _metric_id(m.hyperparams.metric)
        return lambda x: float(kernels.knn_predict(p.X, p.y, np.asarray(x, dtype=np.float64)[None, :],
                                                   nn, metric)[0])
    if m.kind is ModelKind.SVR:
        kid, coef0, degree = _svr_kernel(m.hyperparams)
        return lambda x: float(kernels.svr_decision(
            p.support_vectors, p.dual_coef, -p.bias, _standardized_vec(p, x),
            kid, p.gamma, coef0, degree)[0])
    if m.kind is ModelKind.MLP:
        layers = [(np.ascontiguousarray(W), np.ascontiguousarray(b)) for W, b in p.layers()]
        relu = m.hyperparams.activation == "relu"
        last = len(layers) - 1

        def mlp_one(x):
            h = (np.asarray(x, dtype=np.float64) - p.x_mean) / p.x_scale
            for li, (W, b) in enumerate(layers):
                h = h @ W + b
                if li < last:
                    h = np.maximum(h, 0.0) if relu else np.tanh(h)
            return float(h[0])
        return mlp_one
    raise ValueError(m.kind)


def _make_batch(m):
    p = m.payload
    if m.kind is ModelKind.DT:
        return p.evaluator().predict
    if m.kind is ModelKind.RF:
        evs = [t.evaluator() for t in p.trees]
        return lambda X: sum(e.predict(X) for e in evs) / len(evs)
    if m.kind is ModelKind.KNN:
        nn = m.hyperparams.n_neighbors
        metric = _metric_id(m.hyperparams.metric)
        return lambda X: kernels.knn_predict(p.X, p.y, X, nn, metric)
    if m.kind is ModelKind.SVR:
        kid, coef0, degree = _svr_kernel(m.hyperparams)
        return lambda X: kernels.svr_decision(
            p.support_vectors, p.dual_coef, -p.bias, (X - p.x_mean) / p.x_scale,
            kid, p.gamma, coef0, degree)
    if m.kind is ModelKind.MLP:
        act = kernels.ACT_RELU if m.hyperparams.activation == "relu" else kernels.ACT_TANH
        return lambda X: kernels.mlp_forward(p.theta, p.sizes, (X - p.x_mean) / p.x_scale, act)
    raise ValueError(m.kind)


def _metric_id(name):
    return kernels.METRIC_MANHATTAN if name == "manhattan" else kernels.METRIC_EUCLIDEAN


def _svr_kernel(hp):
    kid = {"rbf": kernels.KERNEL_RBF, "sigmoid": kernels.KERNEL_SIGMOID,
           "polynomial": kernels.KERNEL_POLY}[hp.kernel]
    return kid, float(hp.coef0), int(hp.degree)


def predict(m, x):
    """HR estimate in bpm for one feature vector, clamped to [20, 230]."""
    if len(x) != m.train_meta.k:
        raise DimensionMismatch(f"expected {m.train_meta.k} features, got {len(x)}")
    if isinstance(x, np.ndarray):
        if x.dtype != np.float64 or not x.flags.c_contiguous:
            x = np.ascontiguousarray(x, dtype=np.float64)
        if not math.isfinite(x.sum()):
            raise ValueError("feature vector contains non-finite values")
    elif not all(math.isfinite(v) for v in x):
        raise ValueError("feature vector contains non-finite values")
    v = m._raw_one()(x)
    if v < HR_MIN_BPM:
        return HR_MIN_BPM
    if v > HR_MAX_BPM:
        return HR_MAX_BPM
    return v


def predict_batch(m, X):
    """Vectorised :func:`predict` over the rows of ``X``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.train_meta.k:
        raise DimensionMismatch(f"expected rows of {m.train_meta.k} features, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("feature matrix contains non-finite values")
    if X.shape[0] == 0:
        return np.empty(0)
    return np.clip(m._raw_batch()(X), HR_MIN_BPM, HR_MAX_BPM)
