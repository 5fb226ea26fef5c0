"""Model kinds and their hyperparameter records."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields

from ..errors import InvalidConfig


class ModelKind(enum.IntEnum):
    DT = 0
    RF = 1
    KNN = 2
    SVR = 3
    MLP = 4

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            valid = ", ".join(k.name.lower() for k in cls)
            raise InvalidConfig(f"unknown model {value!r}; valid models: {valid}") from None


def _check_int(name, v, lo, hi):
    if isinstance(v, bool) or int(v) != v or not lo <= v <= hi:
        raise InvalidConfig(f"{name} must be an integer in [{lo}, {hi}], got {v!r}")


def _check_float(name, v, lo, hi):
    if not (isinstance(v, (int, float)) and math.isfinite(v) and lo <= v <= hi):
        raise InvalidConfig(f"{name} must lie in [{lo}, {hi}], got {v!r}")


def _check_choice(name, v, choices):
    if v not in choices:
        raise InvalidConfig(f"{name} must be one of {', '.join(choices)}, got {v!r}")


@dataclass(frozen=True)
class DTParams:
    max_depth: int = 8

    def validate(self):
        _check_int("max_depth", self.max_depth, 1, 20)
        return self


@dataclass(frozen=True)
class RFParams:
    n_trees: int = 10
    max_depth: int = 5
    bootstrap: bool = True

    def validate(self):
        _check_int("n_trees", self.n_trees, 1, 30)
        _check_int("max_depth", self.max_depth, 3, 7)
        if not isinstance(self.bootstrap, bool):
            raise InvalidConfig("bootstrap must be a bool")
        return self


KNN_METRICS = ("manhattan", "euclidean")


@dataclass(frozen=True)
class KNNParams:
    n_neighbors: int = 5
    metric: str = "euclidean"

    def validate(self):
        _check_int("n_neighbors", self.n_neighbors, 1, 30)
        _check_choice("metric", self.metric, KNN_METRICS)
        return self


SVR_KERNELS = ("rbf", "sigmoid", "polynomial")
GAMMA_MODES = ("scale", "auto")


@dataclass(frozen=True)
class SVRParams:
    kernel: str = "rbf"
    c: float = 1.0
    epsilon_bpm: float = 0.5
    gamma_mode: str = "scale"
    degree: int = 3
    coef0: float = 0.0

    def validate(self):
        _check_choice("kernel", self.kernel, SVR_KERNELS)
        _check_float("c", self.c, 1e-5, 10.0)
        _check_float("epsilon_bpm", self.epsilon_bpm, 0.0, 50.0)
        _check_choice("gamma_mode", self.gamma_mode, GAMMA_MODES)
        _check_int("degree", self.degree, 1, 5)
        _check_float("coef0", self.coef0, -10.0, 10.0)
        return self


ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class MLPParams:
    hidden: tuple = (10, 10, 10)
    activation: str = "relu"
    alpha: float = 1e-4
    lr: float = 1e-3
    batch: int = 32
    max_epochs: int = 500
    patience: int = 20

    def validate(self):
        if len(self.hidden) != 3:
            raise InvalidConfig(f"hidden must list 3 layer sizes, got {self.hidden!r}")
        for i, h in enumerate(self.hidden):
            _check_int(f"hidden[{i}]", h, 2, 15)
        _check_choice("activation", self.activation, ACTIVATIONS)
        # alpha = 0 is allowed for unregularised fits
        if self.alpha != 0:
            _check_float("alpha", self.alpha, 1e-5, 10.0)
        _check_float("lr", self.lr, 1e-6, 1.0)
        _check_int("batch", self.batch, 1, 1 << 20)
        _check_int("max_epochs", self.max_epochs, 1, 100_000)
        _check_int("patience", self.patience, 1, 100_000)
        return self


PARAMS_BY_KIND = {
    ModelKind.DT: DTParams,
    ModelKind.RF: RFParams,
    ModelKind.KNN: KNNParams,
    ModelKind.SVR: SVRParams,
    ModelKind.MLP: MLPParams,
}


def default_params(kind):
    return PARAMS_BY_KIND[ModelKind.parse(kind)]()


def params_from_dict(kind, values):
    """Build a hyperparameter record from loose (e.g. string) values."""
    cls = PARAMS_BY_KIND[ModelKind.parse(kind)]
    base = cls()
    out = {}
    names = {f.name for f in fields(cls)}
    for key, raw in values.items():
        if key not in names:
            raise InvalidConfig(f"{cls.__name__} has no field {key!r}")
        ref = getattr(base, key)
        try:
            if isinstance(ref, bool):
                val = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes", "on")
            elif isinstance(ref, tuple):
                val = tuple(int(v) for v in (raw.split(",") if isinstance(raw, str) else raw))
            elif isinstance(ref, int):
                val = int(raw)
            elif isinstance(ref, float):
                val = float(raw)
            else:
                val = str(raw)
        except (TypeError, ValueError):
            raise InvalidConfig(f"bad value for {key}: {raw!r}") from None
        out[key] = val
    return cls(**out).validate()


def params_to_dict(hp):
    d = {}
    for f in fields(hp):
        v = getattr(hp, f.name)
        d[f.name] = list(v) if isinstance(v, tuple) else v
    return d
