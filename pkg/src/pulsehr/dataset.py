"""Lagged PPG-HR feature matrices and train/test splitting."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, EmptyMatrix, InsufficientData, InvalidConfig

_TIME_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rows ``[pphr[t-k+1], ..., pphr[t]]`` with label ``truth[t]`` at ``times[i] = t``."""

    k: int
    X: np.ndarray
    y: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, copy=True).reshape(-1, self.k)
        y = np.array(self.y, dtype=np.float64, copy=True).reshape(-1)
        t = np.array(self.times, dtype=np.float64, copy=True).reshape(-1)
        if not (X.shape[0] == y.shape[0] == t.shape[0]):
            raise AlignmentError("X, y and times must have the same number of rows")
        for a in (X, y, t):
            a.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.y.shape[0]

    @property
    def n_rows(self):
        return self.y.shape[0]

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return FeatureMatrix(self.k, self.X[idx], self.y[idx], self.times[idx])

    @property
    def last_feature(self):
        """The current-second PPG-HR of every row."""
        return self.X[:, -1]


class SplitMode(str, enum.Enum):
    CHRONOLOGICAL = "chronological"
    RANDOM = "random"


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    mode: SplitMode = SplitMode.CHRONOLOGICAL
    seed: int = 0

    def validate(self):
        if not 0 < self.train_fraction < 1:
            raise InvalidConfig(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        SplitMode(self.mode)
        return self


def _overlap(a, b):
    if a.rate_hz != 1.0 or b.rate_hz != 1.0:
        raise AlignmentError(f"both series must be 1 Hz (got {a.rate_hz} and {b.rate_hz})")
    shift = b.t0_s - a.t0_s
    if abs(shift - round(shift)) > _TIME_TOL:
        raise AlignmentError("series timestamps are not on a common 1 s grid")
    start = max(a.t0_s, b.t0_s)
    stop = min(a.t0_s + len(a), b.t0_s + len(b))
    if stop - start < 1 - _TIME_TOL:
        raise AlignmentError("series do not overlap in time")
    ia = int(round(start - a.t0_s))
    ib = int(round(start - b.t0_s))
    n = int(round(stop - start))
    return start, ia, ib, n


def build_features(pphr, truth, k):
    """Rows of the last ``k`` PPG-HR readings labelled with the current truth.

    Feature order is oldest first; the label sits at the time of the last
    feature. Only the time overlap of the two series is used.
    """
    if int(k) < 1:
        raise InvalidConfig(f"k must be >= 1, got {k}")
    k = int(k)
    start, ia, ib, n = _overlap(pphr, truth)
    if n < k:
        raise InsufficientData(f"overlap of {n} s is shorter than k={k}")
    p = np.asarray(pphr.values[ia:ia + n], dtype=np.float64)
    y = np.asarray(truth.values[ib + k - 1:ib + n], dtype=np.float64)
    X = np.lib.stride_tricks.sliding_window_view(p, k)
    times = start + np.arange(k - 1, n, dtype=np.float64)
    return FeatureMatrix(k, X, y, times)


def split(fm, spec=SplitSpec()):
    """``(train, test)`` partition of ``fm``; train gets ``ceil(f * n)`` rows."""
    spec.validate()
    n = len(fm)
    if n == 0:
        raise EmptyMatrix("cannot split an empty feature matrix")
    n_train = min(n, int(math.ceil(spec.train_fraction * n - 1e-9)))
    if SplitMode(spec.mode) is SplitMode.CHRONOLOGICAL:
        order = np.arange(n)
    else:
        order = np.random.default_rng(int(spec.seed)).permutation(n)
    tr = np.sort(order[:n_train])
    te = np.sort(order[n_train:])
    return fm.take(tr), fm.take(te)
