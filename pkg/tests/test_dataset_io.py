import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pulsehr import dataset_io, synth
from pulsehr.errors import BadHeader, HrOutOfRange, NonUniformSpacing, ParseError
from pulsehr.signal_model import HrSeries, PpgRecording

from conftest import toy_matrix


@given(arrays(np.float64, st.integers(2, 60),
              elements=st.floats(-1e12, 1e12, allow_subnormal=True)),
       st.sampled_from([25.0, 125.0, 1.0, 4.0]), st.integers(-10, 1000))
def test_ppg_round_trip_bitwise(x, fs, t0):
    rec = PpgRecording(fs, (x, x[::-1].copy()), float(t0))
    back = dataset_io.read_ppg_csv(dataset_io.write_ppg_csv(rec))
    assert back.fs_hz == fs and back.t0_s == t0
    for a, b in zip(back.channels, rec.channels):
        assert a.tobytes() == b.tobytes()


def test_synthetic_recording_round_trip():
    rec, truth = synth.generate(synth.SynthConfig(duration_s=30, seed=2))
    assert dataset_io.read_ppg_csv(dataset_io.write_ppg_csv(rec)) == rec
    assert dataset_io.read_hr_csv(dataset_io.write_hr_csv(truth)) == truth


def test_bad_header_line_one():
    with pytest.raises(BadHeader) as exc:
        dataset_io.read_ppg_csv(b"time,ch1\n0.0,1.0\n0.04,2.0\n")
    assert exc.value.line == 1


def test_jittered_timestamps():
    text = "t_s,ch1\n0.0,1\n0.04,1\n0.0800021,1\n0.12,1\n0.16,1\n"
    with pytest.raises(NonUniformSpacing) as exc:
        dataset_io.read_ppg_csv(text.encode())
    assert exc.value.row == 4


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as exc:
        dataset_io.read_ppg_csv(b"t_s,ch1\n0.0,1\n0.04,abc\n")
    assert (exc.value.row, exc.value.col) == (3, 2)
    with pytest.raises(ParseError) as exc:
        dataset_io.read_ppg_csv(b"t_s,ch1\n0.0,1\n0.04\n")
    assert exc.value.row == 3
    with pytest.raises(ParseError):
        dataset_io.read_ppg_csv(b"t_s,ch1\r\n0.0,1\r\n0.04,2\r\n")
    with pytest.raises(ParseError):
        dataset_io.read_hr_csv(b"t_s,hr_bpm\n0,70\n1,nan\n")


def test_hr_range_error():
    with pytest.raises(HrOutOfRange):
        dataset_io.read_hr_csv(b"t_s,hr_bpm\n0,70\n1,-5\n2,70\n")


def test_hr_file_shape():
    data = dataset_io.write_hr_csv(HrSeries(1.0, [70.0, 71.5, 72.0]))
    assert data.decode().count("\n") == 4
    assert data.startswith(b"t_s,hr_bpm\n0.0,70.0\n")


def test_reads_paths_and_streams(tmp_path):
    hr = HrSeries(1.0, [70.0, 71.0, 72.0], 8.0)
    path = tmp_path / "hr.csv"
    dataset_io.write_bytes(path, dataset_io.write_hr_csv(hr))
    assert dataset_io.read_hr_csv(path) == hr
    assert dataset_io.read_hr_csv(str(path)) == hr
    assert dataset_io.read_hr_csv(io.BytesIO(path.read_bytes())) == hr


def test_feature_csv_round_trip():
    fm = toy_matrix([[70.0, 71.25], [71.25, 72.0]], [70.5, 72.125], t0=5.0)
    back = dataset_io.read_features_csv(dataset_io.write_features_csv(fm))
    assert back.k == 2
    assert np.array_equal(back.X, fm.X) and np.array_equal(back.y, fm.y)
    assert np.array_equal(back.times, fm.times)
    with pytest.raises(BadHeader):
        dataset_io.read_features_csv(b"t_s,x1,label\n0,1,70\n")
