import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pulsehr import sigproc, synth
from pulsehr.errors import RecordingTooShort, TooFewSamples
from pulsehr.signal_model import HrSeries, PpgRecording
from pulsehr.sigproc import SigprocConfig


# ------------------------------------------------------------------ oracle

def brute_force_peaks(x, distance, prom_factor, width):
    """Peak rules applied index by index, without any shared code."""
    n = len(x)
    half = width // 2
    d = np.array([x[i] - np.mean(x[max(0, i - half):min(n, i + half + 1)]) for i in range(n)])
    thr = prom_factor * np.sqrt(np.mean((d - d.mean()) ** 2))
    cands = []
    for i in range(1, n - 1):
        if not (d[i] > d[i - 1] and d[i] > d[i + 1]):
            continue
        # prominence: drop to the higher of the two bases before terrain rises above d[i]
        j = i
        left_min = d[i]
        while j > 0 and d[j - 1] <= d[i]:
            j -= 1
            left_min = min(left_min, d[j])
        j = i
        right_min = d[i]
        while j < n - 1 and d[j + 1] <= d[i]:
            j += 1
            right_min = min(right_min, d[j])
        if d[i] - max(left_min, right_min) >= thr:
            cands.append(i)
    kept = []
    for i in sorted(cands, key=lambda i: (-d[i], i)):
        if all(abs(i - k) >= distance for k in kept):
            kept.append(i)
    return sorted(kept)


# dyadic samples keep the running sums of the moving average exact, so the
# comparison checks the peak rules rather than summation-order rounding
dyadic = st.integers(-400, 400).map(lambda v: v / 64.0)


@given(arrays(np.float64, st.integers(3, 200), elements=dyadic),
       st.integers(1, 12), st.sampled_from([0.0, 0.25, 0.5, 1.0]),
       st.sampled_from([1, 3, 5, 25]))
def test_detect_peaks_matches_brute_force(backend, x, distance, prom, width):
    got = backend.detect_peaks(x, distance, prom, width)
    assert got.tolist() == brute_force_peaks(x, distance, prom, width)


@given(arrays(np.float64, st.integers(3, 200), elements=st.integers(-3, 3)))
def test_detect_peaks_brute_force_with_ties(backend, x):
    # integer-valued signals create plateaus and equal-height peaks
    got = backend.detect_peaks(x, 4, 0.5, 5)
    assert got.tolist() == brute_force_peaks(x, 4, 0.5, 5)


# ------------------------------------------------------------------ detect_peaks

def test_sine_1p2_hz_gives_12_peaks():
    t = np.arange(250) / 25.0
    pk = sigproc.detect_peaks(np.sin(2 * np.pi * 1.2 * t), 25.0)
    assert len(pk) == 12
    assert np.all(np.abs(np.diff(pk) - 25.0 / 1.2) <= 1)


def test_constant_signal_has_no_peaks():
    assert sigproc.detect_peaks(np.full(100, 3.0), 25.0).size == 0


def test_spike_between_peaks_is_thinned():
    t = np.arange(250) / 25.0
    x = np.sin(2 * np.pi * 1.2 * t)
    pk0 = sigproc.detect_peaks(x, 25.0)
    x[pk0[5] + 3] += 50.0  # closer to a true peak than the refractory distance
    pk = sigproc.detect_peaks(x, 25.0)
    assert len(pk) <= 13
    assert np.all(np.diff(pk) >= SigprocConfig().refractory_samples(25.0))
    assert pk0[5] + 3 in pk and pk0[5] not in pk  # the taller spike wins


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        sigproc.detect_peaks([1.0, 2.0], 25.0)


def test_refractory_distance():
    assert SigprocConfig().refractory_samples(25.0) == 6
    assert SigprocConfig().refractory_samples(125.0) == 34
    assert SigprocConfig().detrend_samples(25.0) == 25


# ------------------------------------------------------------------ initial_hr

def clean_recording(hr, duration, fs=25.0):
    cfg = synth.SynthConfig(noise_std=0.0, baseline_wander_amp=0.0, ma_rate_per_min=0.0,
                            duration_s=duration, fs_hz=fs)
    return synth.gen_ppg(synth.constant_hr_truth(hr, duration), cfg)


def test_initial_hr_clean_72():
    hr4 = sigproc.initial_hr(clean_recording(72.0, 60))
    assert hr4.rate_hz == 4.0
    assert hr4.t0_s == 8.0
    assert np.all((hr4.values >= 69) & (hr4.values <= 75))


def test_initial_hr_too_short():
    with pytest.raises(RecordingTooShort):
        sigproc.initial_hr(clean_recording(72.0, 7.9))


def test_flat_segment_repeats_previous_reading():
    live = clean_recording(90.0, 30).channel(1)
    x = np.concatenate([live, np.zeros(25 * 20)])
    hr4 = sigproc.initial_hr(PpgRecording(25.0, (x,)))
    # windows lying entirely in the flat tail repeat the last real reading
    ends = 8.0 + np.arange(len(hr4)) * 0.25
    flat = ends - 8.0 >= 30.0 + 1.0
    last_live = hr4.values[np.flatnonzero(~flat)[-1]]
    assert np.all(hr4.values[flat] == last_live)


def test_all_flat_falls_back_to_70():
    hr4 = sigproc.initial_hr(PpgRecording(25.0, (np.zeros(25 * 12),)))
    assert np.all(hr4.values == 70.0)


# ------------------------------------------------------------------ zscore

def test_zscore_constant_unchanged():
    hr = HrSeries(4.0, np.full(200, 70.0))
    assert sigproc.zscore_filter(hr) == hr


def test_zscore_replaces_spike_with_neighbour_mean():
    v = np.array([70.0] * 119 + [200.0] + [70.0] * 5)
    out = sigproc.zscore_filter(HrSeries(4.0, v)).values
    assert out[119] == 70.0
    assert np.array_equal(np.delete(out, 119), np.delete(v, 119))
    # hand check that the reading is an outlier: z over 120 trailing readings
    win = v[:120]
    assert (200 - win.mean()) / win.std() > 3


def test_zscore_uses_both_neighbours():
    v = np.concatenate([70 + np.sin(np.arange(60)), [250.0], [74.0]])
    out = sigproc.zscore_filter(HrSeries(4.0, v)).values
    assert out[60] == pytest.approx((v[59] + 74.0) / 2)


def test_zscore_trailing_endpoint_uses_predecessor():
    v = np.concatenate([70 + np.sin(np.arange(40)), [250.0]])
    out = sigproc.zscore_filter(HrSeries(4.0, v)).values
    assert out[-1] == v[-2]


def test_zscore_idle_before_eight_readings():
    v = np.array([70.0, 70, 70, 70, 70, 70, 200])
    assert np.array_equal(sigproc.zscore_filter(HrSeries(4.0, v)).values, v)


@given(st.lists(st.floats(60, 80), min_size=1, max_size=300))
def test_zscore_no_outlier_is_noop(vals):
    v = np.array(vals)
    cfg = SigprocConfig(z_threshold=1e6)
    assert np.array_equal(sigproc.zscore_filter(HrSeries(4.0, v), cfg).values, v)


@given(st.lists(st.floats(40, 200), min_size=1, max_size=400))
def test_zscore_flags_exactly_the_outliers(vals):
    # independent per-reading statistics, no cumulative sums
    v = np.array(vals)
    out = sigproc.zscore_filter(HrSeries(4.0, v)).values
    assert out.shape == v.shape
    for i in range(len(v)):
        seg = v[max(0, i - 119):i + 1]
        s = seg.std()
        outlier = len(seg) >= 8 and s > 1e-9 * max(abs(seg.mean()), 1.0) \
            and abs(v[i] - seg.mean()) / s > 3
        if not outlier:
            assert out[i] == v[i]


# ------------------------------------------------------------------ smoothing

def test_smooth_per_second_examples():
    assert sigproc.smooth_per_second(HrSeries(4.0, [72.0] * 4)).values.tolist() == [72.0]
    assert sigproc.smooth_per_second(HrSeries(4.0, [70.0, 72, 74, 76])).values.tolist() == [73.0]
    out = sigproc.smooth_per_second(HrSeries(4.0, np.arange(9.0)))
    assert len(out) == 2 and out.rate_hz == 1.0


def test_clamp_examples():
    c = sigproc.clamp_smooth
    assert c(HrSeries(1.0, [100.0, 110.0])).values.tolist() == [100.0, 105.0]
    assert c(HrSeries(1.0, [100.0, 103.0])).values.tolist() == [100.0, 103.0]
    assert c(HrSeries(1.0, [100.0, 120.0, 140.0])).values == pytest.approx([100, 105, 110.25])


@given(st.lists(st.floats(20, 230), min_size=1, max_size=200), st.floats(0.01, 0.5))
def test_clamp_invariant(vals, bound):
    out = sigproc.clamp_smooth(HrSeries(1.0, vals), SigprocConfig(clamp_bound=bound)).values
    assert out[0] == vals[0]
    assert np.all(np.abs(np.diff(out)) <= bound * out[:-1] + 1e-9)


# ------------------------------------------------------------------ stage2

@pytest.mark.parametrize("hr", [50.0, 72.0, 120.0, 180.0])
def test_stage2_clean_constant(hr):
    out = sigproc.stage2(clean_recording(hr, 60))
    assert np.all(np.abs(out.values - hr) <= 3.0)


def test_stage2_noisy_invariants_and_determinism(daily_run):
    out = daily_run["pphr"]
    v = out.values
    assert np.all(np.abs(np.diff(v)) <= 0.05 * v[:-1] + 1e-9)
    assert v.min() >= 20 and v.max() <= 230
    assert sigproc.stage2(daily_run["rec"]) == out


@given(st.floats(8.0, 80.0), st.sampled_from([25.0, 50.0, 125.0]))
def test_stage2_length_contract(duration, fs):
    n = int(math.floor(duration * fs + 1e-9))
    if n < 8 * fs:
        return
    rec = PpgRecording(fs, (np.sin(np.arange(n) * 2 * np.pi * 1.3 / fs),))
    out = sigproc.stage2(rec)
    n4 = int(math.floor((n / fs - 8.0) * 4 + 1e-9)) + 1
    assert len(out) == n4 // 4 == sigproc.expected_output_length(n / fs)
    assert out.t0_s == 8.0 and out.rate_hz == 1.0


def test_integer_duration_gives_n_minus_window_outputs():
    for n_s in (8, 9, 60, 61):
        rec = PpgRecording(25.0, (np.sin(np.arange(25 * n_s) / 3.0),))
        assert len(sigproc.stage2(rec)) == n_s - 8


def test_config_validation():
    with pytest.raises(ValueError):
        SigprocConfig(clamp_bound=1.5).validate()
    with pytest.raises(ValueError):
        SigprocConfig(window_s=4.0).validate()
    with pytest.raises(ValueError):
        SigprocConfig(z_threshold=0.0).validate()
