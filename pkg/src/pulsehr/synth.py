"""Seeded synthetic PPG and ground-truth HR generator.

Stands in for recorded sessions: a bounded random-walk HR track drives a
three-harmonic pulse waveform with baseline wander, white noise and
band-limited motion-artifact bursts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import butter, sosfiltfilt

from .errors import InvalidConfig
from .signal_model import (DEFAULT_FS_HZ, HR_MAX_BPM, HR_MIN_BPM, HrSeries,
                           PpgRecording, Scenario)

HARMONICS = (1.0, 0.35, 0.12)
WANDER_HZ = 0.1
MA_BAND_HZ = (0.8, 3.5)

# (slew variance scale, MA bursts per minute)
SCENARIO_PRESETS = {
    Scenario.SITTING: (0.2, 0.5),
    Scenario.SLEEPING: (0.1, 0.2),
    Scenario.DAILY: (1.0, 4.0),
}

SCENARIO_HR_START = {
    Scenario.SITTING: 72.0,
    Scenario.SLEEPING: 60.0,
    Scenario.DAILY: 80.0,
}


@dataclass(frozen=True)
class SynthConfig:
    scenario: Scenario = Scenario.DAILY
    duration_s: float = 600.0
    fs_hz: float = DEFAULT_FS_HZ
    seed: int = 0
    hr_start_bpm: float = 80.0
    hr_bounds_bpm: tuple = (50.0, 150.0)
    hr_max_slew_bpm_per_s: float = 3.0
    noise_std: float = 0.1
    baseline_wander_amp: float = 0.3
    ma_rate_per_min: float = 4.0
    ma_amp: float = 1.5
    ma_dur_s: float = 3.0
    slew_var_scale: float = 1.0

    @classmethod
    def for_scenario(cls, scenario, **overrides):
        """Config with the scenario's slew and artifact presets applied."""
        sc = Scenario.parse(scenario)
        var_scale, ma_rate = SCENARIO_PRESETS[sc]
        base = cls(scenario=sc, slew_var_scale=var_scale, ma_rate_per_min=ma_rate,
                   hr_start_bpm=SCENARIO_HR_START[sc])
        return replace(base, **overrides)

    def validate(self):
        if not isinstance(self.scenario, Scenario):
            raise InvalidConfig(f"scenario must be a Scenario, got {self.scenario!r}")
        if not (np.isfinite(self.duration_s) and self.duration_s > 0):
            raise InvalidConfig(f"duration_s must be > 0, got {self.duration_s}")
        if not (np.isfinite(self.fs_hz) and self.fs_hz > 0):
            raise InvalidConfig(f"fs_hz must be > 0, got {self.fs_hz}")
        lo, hi = self.hr_bounds_bpm
        if not (HR_MIN_BPM <= lo <= hi <= HR_MAX_BPM):
            raise InvalidConfig(f"hr_bounds_bpm {self.hr_bounds_bpm} not within [20, 230]")
        if not lo <= self.hr_start_bpm <= hi:
            raise InvalidConfig("hr_start_bpm outside hr_bounds_bpm")
        for name in ("hr_max_slew_bpm_per_s", "noise_std", "baseline_wander_amp",
                     "ma_rate_per_min", "ma_amp", "ma_dur_s", "slew_var_scale"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise InvalidConfig(f"{name} must be finite and >= 0, got {v}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidConfig("seed must fit in 64 bits")
        return self


def _rng(cfg, stream):
    return np.random.default_rng([int(cfg.seed), stream])


def gen_truth_hr(cfg):
    """1 Hz ground-truth HR: a clamped random walk with bounded steps.

    Steps are Gaussian with std ``slew * sqrt(slew_var_scale) / 2`` plus a
    weak pull toward the start value, then clipped to the slew limit.
    """
    cfg.validate()
    n = int(np.floor(cfg.duration_s)) + 1
    lo, hi = cfg.hr_bounds_bpm
    slew = cfg.hr_max_slew_bpm_per_s
    hr = np.empty(n)
    hr[0] = cfg.hr_start_bpm
    if slew == 0 or n == 1:
        hr[:] = cfg.hr_start_bpm
        return HrSeries(1.0, hr, 0.0)
    rng = _rng(cfg, 1)
    sigma = slew * np.sqrt(cfg.slew_var_scale) / 2.0
    steps = rng.normal(0.0, sigma, size=n - 1) if sigma > 0 else np.zeros(n - 1)
    for t in range(n - 1):
        pull = 0.01 * (cfg.hr_start_bpm - hr[t])
        delta = min(max(steps[t] + pull, -slew), slew)
        hr[t + 1] = min(max(hr[t] + delta, lo), hi)
    return HrSeries(1.0, hr, 0.0)


def pulse_phase(truth, t):
    """Phase 2*pi*integral(hr/60) at times ``t``; HR linearly interpolated."""
    tt = truth.times()
    hz = np.asarray(truth.values) / 60.0
    # cumulative trapezoid of the piecewise-linear rate at the knots
    knots = np.concatenate([[0.0], np.cumsum(np.diff(tt) * (hz[:-1] + hz[1:]) / 2.0)])
    if len(tt) == 1:
        return 2.0 * np.pi * hz[0] * (t - tt[0])
    j = np.clip(np.searchsorted(tt, t, side="right") - 1, 0, len(tt) - 2)
    dt = t - tt[j]
    slope = (hz[j + 1] - hz[j]) / (tt[j + 1] - tt[j])
    return 2.0 * np.pi * (knots[j] + hz[j] * dt + 0.5 * slope * dt * dt)


def gen_ppg(truth, cfg):
    """Synthesize a single-channel PPG recording that follows ``truth``."""
    cfg.validate()
    if truth.rate_hz != 1.0:
        raise InvalidConfig(f"truth must be a 1 Hz series, got {truth.rate_hz} Hz")
    n = int(round(cfg.duration_s * cfg.fs_hz))
    if n < 1:
        raise InvalidConfig("duration too short for one sample")
    t = truth.t0_s + np.arange(n) / cfg.fs_hz
    phi = pulse_phase(truth, t)
    sig = np.zeros(n)
    for m, a in enumerate(HARMONICS, start=1):
        sig += a * np.sin(m * phi)
    if cfg.baseline_wander_amp > 0:
        sig += cfg.baseline_wander_amp * np.sin(2.0 * np.pi * WANDER_HZ * t)
    if cfg.noise_std > 0:
        sig += _rng(cfg, 2).normal(0.0, cfg.noise_std, size=n)
    if cfg.ma_rate_per_min > 0 and cfg.ma_amp > 0 and cfg.ma_dur_s > 0:
        sig += motion_artifacts(n, cfg)
    return PpgRecording(cfg.fs_hz, (sig,), truth.t0_s)


def motion_artifacts(n, cfg):
    """Sum of Poisson-timed band-limited noise bursts, ``ma_amp`` RMS each."""
    rng = _rng(cfg, 3)
    out = np.zeros(n)
    duration = n / cfg.fs_hz
    rate_hz = cfg.ma_rate_per_min / 60.0
    starts = []
    t = rng.exponential(1.0 / rate_hz)
    while t < duration:
        starts.append(t)
        t += rng.exponential(1.0 / rate_hz)
    if not starts:
        return out
    burst_len = max(4, int(round(cfg.ma_dur_s * cfg.fs_hz)))
    nyq = cfg.fs_hz / 2.0
    hi = min(MA_BAND_HZ[1], 0.95 * nyq)
    sos = butter(2, [MA_BAND_HZ[0] / nyq, hi / nyq], btype="band", output="sos")
    pad = 3 * burst_len
    taper = np.hanning(burst_len + 2)[1:-1]
    for s in starts:
        raw = rng.normal(size=burst_len + 2 * pad)
        band = sosfiltfilt(sos, raw)[pad:pad + burst_len]
        rms = np.sqrt(np.mean(band * band))
        if rms > 0:
            band *= cfg.ma_amp / rms
        i0 = int(s * cfg.fs_hz)
        i1 = min(n, i0 + burst_len)
        out[i0:i1] += (band * taper)[:i1 - i0]
    return out


def generate(cfg):
    """Convenience: ``(ppg, truth)`` for ``cfg``."""
    truth = gen_truth_hr(cfg)
    return gen_ppg(truth, cfg), truth


def constant_hr_truth(hr_bpm, duration_s):
    n = int(np.floor(duration_s)) + 1
    return HrSeries(1.0, np.full(n, float(hr_bpm)), 0.0)
