"""Core domain types: PPG recordings, HR series and recording scenarios."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (ChannelLengthMismatch, HrOutOfRange, NonFiniteSample,
                     NonPositiveRate, ValidationError)

HR_MIN_BPM = 20.0
HR_MAX_BPM = 230.0
DEFAULT_FS_HZ = 25.0
# infrared
DEFAULT_CHANNEL = 1


def _frozen(a):
    arr = np.array(a, dtype=np.float64, copy=True).reshape(-1)
    arr.flags.writeable = False
    return arr


class Scenario(str, enum.Enum):
    SITTING = "sitting"
    SLEEPING = "sleeping"
    DAILY = "daily"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValidationError(
                f"unknown scenario {value!r}; valid scenarios: {valid}") from None


@dataclass(frozen=True, eq=False)
class PpgRecording:
    """Uniformly sampled PPG light channels.

    ``channels`` holds one or two 1-D float arrays (ADC counts). Arrays are
    copied and made read-only on construction.
    """

    fs_hz: float
    channels: tuple
    t0_s: float = 0.0

    def __post_init__(self):
        chans = self.channels
        if isinstance(chans, np.ndarray) and chans.ndim == 1:
            chans = (chans,)
        object.__setattr__(self, "channels", tuple(_frozen(c) for c in chans))
        object.__setattr__(self, "fs_hz", float(self.fs_hz))
        object.__setattr__(self, "t0_s", float(self.t0_s))

    @property
    def n_samples(self):
        return len(self.channels[0]) if self.channels else 0

    @property
    def duration_s(self):
        return self.n_samples / self.fs_hz

    def channel(self, index=DEFAULT_CHANNEL):
        """Return the requested channel, falling back to the only one present."""
        if len(self.channels) == 1:
            return self.channels[0]
        return self.channels[index]

    def times(self):
        return self.t0_s + np.arange(self.n_samples) / self.fs_hz

    def __eq__(self, other):
        if not isinstance(other, PpgRecording):
            return NotImplemented
        return (self.fs_hz == other.fs_hz and self.t0_s == other.t0_s
                and len(self.channels) == len(other.channels)
                and all(np.array_equal(a, b) for a, b in zip(self.channels, other.channels)))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class HrSeries:
    """HR readings in bpm at ``rate_hz`` readings per second."""

    rate_hz: float
    values: np.ndarray
    t0_s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "rate_hz", float(self.rate_hz))
        object.__setattr__(self, "t0_s", float(self.t0_s))

    def __len__(self):
        return len(self.values)

    def times(self):
        return self.t0_s + np.arange(len(self.values)) / self.rate_hz

    def __eq__(self, other):
        if not isinstance(other, HrSeries):
            return NotImplemented
        return (self.rate_hz == other.rate_hz and self.t0_s == other.t0_s
                and np.array_equal(self.values, other.values))

    __hash__ = None


def validate_recording(rec):
    """Return ``rec`` unchanged if it satisfies every recording invariant."""
    if not (np.isfinite(rec.fs_hz) and rec.fs_hz > 0):
        raise NonPositiveRate(rec.fs_hz)
    if not rec.channels or len(rec.channels) > 2:
        raise ValidationError(f"expected 1 or 2 channels, got {len(rec.channels)}")
    n = len(rec.channels[0])
    if n < 1:
        raise ValidationError("channels must hold at least one sample")
    for ci, ch in enumerate(rec.channels):
        if len(ch) != n:
            raise ChannelLengthMismatch(ci, n, len(ch))
    for ci, ch in enumerate(rec.channels):
        bad = np.flatnonzero(~np.isfinite(ch))
        if bad.size:
            raise NonFiniteSample(int(bad[0]), ci)
    return rec


def validate_hr_series(hr):
    """Return ``hr`` unchanged if every reading is finite and in range."""
    if not (np.isfinite(hr.rate_hz) and hr.rate_hz > 0):
        raise NonPositiveRate(hr.rate_hz)
    v = hr.values
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        raise NonFiniteSample(int(bad[0]))
    bad = np.flatnonzero((v < HR_MIN_BPM) | (v > HR_MAX_BPM))
    if bad.size:
        i = int(bad[0])
        raise HrOutOfRange(i, float(v[i]))
    return hr


def clamp_hr(values):
    return np.clip(values, HR_MIN_BPM, HR_MAX_BPM)
