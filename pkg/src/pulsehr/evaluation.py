"""Accuracy, model-size and single-reading latency metrics."""

from __future__ import annotations

import gc
import json
import math
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .errors import (AlignmentError, DimensionMismatch, EmptyList,
                     InvalidConfig, LengthMismatch, NonPositiveTruth)

METRIC_KEYS = ("mape_pct", "ape_sd_pct", "n_rows", "model_size_bytes",
               "latency_mean_us", "latency_median_us", "latency_p99_us", "reps",
               "baseline_mape_pct")


def _pair(pred, truth):
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(truth, dtype=np.float64).reshape(-1)
    if p.shape != t.shape or p.size == 0:
        raise LengthMismatch(f"need equal non-empty lengths, got {p.size} and {t.size}")
    if np.any(t <= 0):
        raise NonPositiveTruth("truth values must be > 0")
    return p, t


def ape(pred, truth):
    """Per-reading absolute percentage errors."""
    p, t = _pair(pred, truth)
    return 100.0 * np.abs(p - t) / t


def mape(pred, truth):
    """Mean absolute percentage error, in percent."""
    return float(np.mean(ape(pred, truth)))


def sample_sd(values):
    v = np.asarray(values, dtype=np.float64)
    return float(np.std(v, ddof=1)) if v.size > 1 else 0.0


@dataclass(frozen=True)
class SubjectSummary:
    mapes: tuple
    mean: float
    sd: float


def summarize_subjects(mapes):
    """Mean and sample (n-1) sd across subjects; one subject gives sd 0."""
    vals = [float(v) for v in mapes]
    if not vals:
        raise EmptyList("need at least one subject MAPE")
    return SubjectSummary(tuple(vals), float(np.mean(vals)), sample_sd(vals))


@dataclass(frozen=True)
class LatencyStats:
    mean_us: float
    median_us: float
    p99_us: float
    reps: int


@contextmanager
def _pinned_single_cpu():
    """Pin to one logical CPU and pause the GC while timing."""
    old = None
    if hasattr(os, "sched_getaffinity"):
        try:
            old = os.sched_getaffinity(0)
            os.sched_setaffinity(0, {min(old)})
        except OSError:
            old = None
    gc_was = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if gc_was:
            gc.enable()
        if old is not None:
            try:
                os.sched_setaffinity(0, old)
            except OSError:
                pass


def bench_latency(m, probe, reps=10_000, warmup=1_000):
    """Time ``reps`` single-reading predictions after ``warmup`` untimed ones."""
    from .models import predict

    if reps < 100 or warmup < 100:
        raise InvalidConfig("reps and warmup must both be >= 100")
    probe = np.ascontiguousarray(probe, dtype=np.float64)
    if probe.ndim != 1 or probe.shape[0] != m.train_meta.k:
        raise DimensionMismatch(f"probe must have {m.train_meta.k} features, got {probe.shape}")
    clock = time.perf_counter_ns
    samples = np.empty(reps, dtype=np.int64)
    sink = 0.0
    with _pinned_single_cpu():
        for _ in range(warmup):
            sink += predict(m, probe)
        for i in range(reps):
            t0 = clock()
            v = predict(m, probe)
            samples[i] = clock() - t0
            sink += v
    if not math.isfinite(sink):
        raise ArithmeticError("non-finite prediction during benchmark")
    us = samples / 1000.0
    return LatencyStats(float(us.mean()), float(np.median(us)),
                        float(np.percentile(us, 99)), int(reps))


@dataclass
class MetricsReport:
    mape_pct: float
    ape_sd_pct: float
    n_rows: int
    model_size_bytes: int | None = None
    latency: LatencyStats | None = None
    baseline_mape_pct: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "mape_pct": self.mape_pct,
            "ape_sd_pct": self.ape_sd_pct,
            "n_rows": self.n_rows,
            "model_size_bytes": self.model_size_bytes,
            "latency_mean_us": self.latency.mean_us if self.latency else None,
            "latency_median_us": self.latency.median_us if self.latency else None,
            "latency_p99_us": self.latency.p99_us if self.latency else None,
            "reps": self.latency.reps if self.latency else None,
            "baseline_mape_pct": self.baseline_mape_pct,
        }
        d.update(self.extra)
        return d

    def to_json(self):
        return dumps_metrics(self.to_dict())


def dumps_metrics(d):
    """Flat JSON with full-precision floats (``repr`` round-trip)."""
    return json.dumps(d, indent=2, allow_nan=False) + "\n"


def evaluate(m, test, pphr_test=None, truth_test=None):
    """Model and Stage-2-only accuracy on the rows of ``test``.

    ``pphr_test`` defaults to the last feature of each row (the Stage-2
    reading at the label time) and ``truth_test`` to the row labels.
    """
    from .models import model_size, predict_batch

    truth = test.y if truth_test is None else np.asarray(truth_test, dtype=np.float64)
    pphr = test.last_feature if pphr_test is None else np.asarray(pphr_test, dtype=np.float64)
    if not (len(truth) == len(pphr) == len(test)):
        raise AlignmentError(
            f"test rows ({len(test)}), Stage-2 values ({len(pphr)}) and truth ({len(truth)}) differ")
    pred = predict_batch(m, test.X)
    errs = ape(pred, truth)
    return MetricsReport(
        mape_pct=float(errs.mean()),
        ape_sd_pct=sample_sd(errs),
        n_rows=int(len(test)),
        model_size_bytes=int(model_size(m)),
        baseline_mape_pct=mape(pphr, truth),
    )
