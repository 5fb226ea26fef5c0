"""Peak-based HR extraction from raw PPG: one smoothed reading per second.

The chain is ``initial_hr`` (4 readings/s from sliding windows) ->
``zscore_filter`` -> ``smooth_per_second`` -> ``clamp_smooth``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidConfig, RecordingTooShort, TooFewSamples
from .signal_model import (DEFAULT_CHANNEL, HR_MAX_BPM, HR_MIN_BPM, HrSeries,
                           validate_recording)

FALLBACK_HR_BPM = 70.0
ZSCORE_MIN_READINGS = 8


@dataclass(frozen=True)
class SigprocConfig:
    window_s: float = 8.0
    hop_s: float = 0.25
    detrend_window_s: float = 1.0
    min_prominence_factor: float = 0.5
    max_hr_bpm: float = 220.0
    z_threshold: float = 3.0
    z_window_readings: int = 120
    clamp_bound: float = 0.05
    channel: int = DEFAULT_CHANNEL

    def validate(self):
        if not self.window_s >= 2 * 60.0 / HR_MIN_BPM:
            raise InvalidConfig(f"window_s must be >= 6 s to hold two beats at 20 bpm, got {self.window_s}")
        if not math.isclose(self.hop_s * 4.0, 1.0):
            raise InvalidConfig(f"hop_s must be 0.25 s (4 readings per second), got {self.hop_s}")
        if not self.detrend_window_s > 0:
            raise InvalidConfig("detrend_window_s must be > 0")
        if not self.min_prominence_factor >= 0:
            raise InvalidConfig("min_prominence_factor must be >= 0")
        if not HR_MIN_BPM < self.max_hr_bpm <= 600:
            raise InvalidConfig("max_hr_bpm out of range")
        if not self.z_threshold > 0:
            raise InvalidConfig("z_threshold must be > 0")
        if not self.z_window_readings >= 1:
            raise InvalidConfig("z_window_readings must be >= 1")
        if not 0 < self.clamp_bound < 1:
            raise InvalidConfig("clamp_bound must lie in (0, 1)")
        return self

    def refractory_samples(self, fs_hz):
        return int(math.floor(fs_hz * 60.0 / self.max_hr_bpm))

    def detrend_samples(self, fs_hz):
        w = max(1, int(round(self.detrend_window_s * fs_hz)))
        return w if w % 2 else w + 1


DEFAULT_CONFIG = SigprocConfig()


def detect_peaks(samples, fs_hz, cfg=DEFAULT_CONFIG):
    """Ascending indices of prominent, refractory-separated local maxima.

    The signal is first detrended by a centered moving average. Candidates
    are strict local maxima whose topographic prominence is at least
    ``min_prominence_factor`` times the detrended std. Candidates closer than
    ``floor(fs * 60 / max_hr_bpm)`` samples are then thinned greedily,
    keeping the taller peak (the earlier one on equal height).
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 3:
        raise TooFewSamples(f"need at least 3 samples, got {x.size}")
    if not fs_hz > 0:
        raise InvalidConfig(f"fs_hz must be > 0, got {fs_hz}")
    return kernels.detect_peaks(x, cfg.refractory_samples(fs_hz),
                                cfg.min_prominence_factor, cfg.detrend_samples(fs_hz))


def window_ends(n_samples, fs_hz, cfg=DEFAULT_CONFIG):
    """End sample index (exclusive) of every analysis window that fits."""
    duration = n_samples / fs_hz
    count = int(math.floor((duration - cfg.window_s) / cfg.hop_s + 1e-9)) + 1
    end_t = cfg.window_s + cfg.hop_s * np.arange(count)
    ends = np.floor(end_t * fs_hz + 0.5).astype(np.int64)
    return ends[ends <= n_samples]


def initial_hr(rec, cfg=DEFAULT_CONFIG):
    """Four HR readings per second from trailing windows of ``window_s``.

    Reading ``j`` covers the window ending at ``t0 + window_s + j * hop_s``.
    Windows with fewer than two peaks repeat the previous reading (70 bpm if
    there is none yet).
    """
    cfg.validate()
    validate_recording(rec)
    fs = rec.fs_hz
    width = int(round(cfg.window_s * fs))
    if rec.n_samples < width or rec.duration_s + 1e-9 < cfg.window_s:
        raise RecordingTooShort(
            f"recording of {rec.duration_s:.3f} s is shorter than the {cfg.window_s} s window")
    x = rec.channel(cfg.channel)
    ends = window_ends(rec.n_samples, fs, cfg)
    ends = ends[ends >= width]
    raw = kernels.windowed_hr(x, fs, ends, width, cfg.refractory_samples(fs),
                              cfg.min_prominence_factor, cfg.detrend_samples(fs))
    out = np.empty_like(raw)
    prev = FALLBACK_HR_BPM
    for i, v in enumerate(raw):
        if not np.isnan(v):
            prev = min(max(v, HR_MIN_BPM), HR_MAX_BPM)
        out[i] = prev
    return HrSeries(1.0 / cfg.hop_s, out, rec.t0_s + cfg.window_s)


def zscore_filter(hr, cfg=DEFAULT_CONFIG):
    """Replace trailing-window z-score outliers by their neighbours' mean.

    Statistics use the raw input over the last ``z_window_readings`` readings
    including the current one; the filter is idle until 8 readings exist.
    The predecessor used for repair is the already-filtered value, the
    successor is the raw next reading; endpoints use their one neighbour.
    """
    v = np.asarray(hr.values, dtype=np.float64)
    n = v.shape[0]
    if n == 0:
        return hr
    w = int(cfg.z_window_readings)
    cs = np.concatenate([[0.0], np.cumsum(v)])
    cq = np.concatenate([[0.0], np.cumsum(v * v)])
    idx = np.arange(n)
    lo = np.maximum(idx + 1 - w, 0)
    cnt = idx + 1 - lo
    mean = (cs[idx + 1] - cs[lo]) / cnt
    var = np.maximum((cq[idx + 1] - cq[lo]) / cnt - mean * mean, 0.0)
    std = np.sqrt(var)
    active = (cnt >= ZSCORE_MIN_READINGS) & (std > 1e-9 * np.maximum(np.abs(mean), 1.0))
    z = np.zeros(n)
    z[active] = np.abs(v[active] - mean[active]) / std[active]
    flagged = np.flatnonzero(active & (z > cfg.z_threshold))
    # the cumulative-sum variance is only a screen; confirm exactly
    out = v.copy()
    for i in flagged:
        seg = v[lo[i]:i + 1]
        s = seg.std()
        if s <= 0 or abs(v[i] - seg.mean()) / s <= cfg.z_threshold:
            continue
        if n == 1:
            continue
        if i == 0:
            out[i] = v[1]
        elif i == n - 1:
            out[i] = out[i - 1]
        else:
            out[i] = (out[i - 1] + v[i + 1]) / 2.0
    return HrSeries(hr.rate_hz, out, hr.t0_s)


def smooth_per_second(hr):
    """Average each group of four 4 Hz readings; a trailing partial group is dropped."""
    v = np.asarray(hr.values, dtype=np.float64)
    m = v.shape[0] // 4
    out = v[:m * 4].reshape(m, 4).mean(axis=1)
    return HrSeries(hr.rate_hz / 4.0, out, hr.t0_s)


def clamp_smooth(hr, cfg=DEFAULT_CONFIG):
    """Limit each reading to within ``clamp_bound`` of the previous output."""
    v = np.asarray(hr.values, dtype=np.float64)
    out = np.empty_like(v)
    b = cfg.clamp_bound
    for t in range(v.shape[0]):
        if t == 0:
            out[0] = v[0]
            continue
        p = out[t - 1]
        out[t] = min(max(v[t], p * (1.0 - b)), p * (1.0 + b))
    return HrSeries(hr.rate_hz, out, hr.t0_s)


def stage2(rec, cfg=DEFAULT_CONFIG):
    """Raw PPG -> smoothed 1 Hz PPG-HR.

    An ``N``-second recording gives ``floor(4 * (N - window_s)) + 1`` initial
    readings and ``floor((floor(4 * (N - window_s)) + 1) / 4)`` outputs, i.e.
    exactly ``N - window_s`` outputs for integer ``N``. Output ``i`` is
    stamped ``t0 + window_s + i``.
    """
    hr4 = initial_hr(rec, cfg)
    hr4 = zscore_filter(hr4, cfg)
    hr1 = smooth_per_second(hr4)
    out = clamp_smooth(hr1, cfg)
    vals = np.clip(out.values, HR_MIN_BPM, HR_MAX_BPM)
    return HrSeries(1.0, vals, out.t0_s)


def expected_output_length(duration_s, cfg=DEFAULT_CONFIG):
    n4 = int(math.floor((duration_s - cfg.window_s) / cfg.hop_s + 1e-9)) + 1
    return n4 // 4
