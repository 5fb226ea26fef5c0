"""CSV formats for PPG recordings, HR series and feature matrices.

All files are UTF-8 with LF line endings. Floats are written with Python's
shortest round-trip ``repr`` so that reading back restores them bit for bit.
Readers reject malformed input; errors carry 1-based line numbers.
"""

from __future__ import annotations

import io
import os

import numpy as np

from .dataset import FeatureMatrix
from .errors import BadHeader, NonUniformSpacing, ParseError
from .signal_model import HrSeries, PpgRecording, validate_hr_series, validate_recording

SPACING_TOL_S = 1e-6


def _fmt(v):
    return repr(float(v))


def _open_text(src):
    if isinstance(src, (bytes, bytearray)):
        return io.StringIO(bytes(src).decode("utf-8"))
    if isinstance(src, (str, os.PathLike)):
        with open(src, "r", encoding="utf-8", newline="") as fh:
            return io.StringIO(fh.read())
    data = src.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


def _rows(src, expected_headers):
    """Header plus numeric rows; ``expected_headers`` lists accepted headers."""
    text = _open_text(src).read()
    if "\r" in text:
        raise ParseError(text[:text.index("\r")].count("\n") + 1, 1, "CR line ending")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise BadHeader(1, "")
    header = lines[0].split(",")
    if header not in expected_headers:
        raise BadHeader(1, lines[0])
    ncol = len(header)
    out = np.empty((len(lines) - 1, ncol))
    for r, line in enumerate(lines[1:]):
        cells = line.split(",")
        if len(cells) != ncol:
            raise ParseError(r + 2, min(len(cells), ncol) + 1,
                             f"expected {ncol} cells, got {len(cells)}")
        for c, cell in enumerate(cells):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(r + 2, c + 1, f"not a number: {cell!r}") from None
            if cell.strip() != cell or not np.isfinite(v):
                raise ParseError(r + 2, c + 1, f"invalid value: {cell!r}")
            out[r, c] = v
    return header, out


def _uniform_rate(t):
    """Infer samples/s from timestamps and check every row sits on the grid."""
    n = t.shape[0]
    if n < 2:
        raise NonUniformSpacing(2, "(need at least two rows to infer the rate)")
    step = (t[-1] - t[0]) / (n - 1)
    if not step > 0:
        raise NonUniformSpacing(3, "(timestamps must strictly increase)")
    rate = 1.0 / step
    # snap to a value whose reciprocal reproduces written timestamps
    rounded = round(rate, 6)
    if abs(rounded - rate) < 1e-6 * max(1.0, rate):
        rate = rounded
    grid = t[0] + np.arange(n) / rate
    dev = np.abs(t - grid)
    bad = np.flatnonzero((dev > SPACING_TOL_S) | (np.diff(t, prepend=-np.inf) <= 0))
    if bad.size:
        i = int(bad[0])
        raise NonUniformSpacing(i + 2, f"(t={t[i]!r} deviates {dev[i]:.3g} s from the grid)")
    return rate


def read_ppg_csv(src):
    """Read a ``t_s,ch1[,ch2]`` file into a :class:`PpgRecording`."""
    _, a = _rows(src, (["t_s", "ch1"], ["t_s", "ch1", "ch2"]))
    fs = _uniform_rate(a[:, 0])
    rec = PpgRecording(fs, tuple(a[:, c] for c in range(1, a.shape[1])), a[0, 0])
    return validate_recording(rec)


def write_ppg_csv(rec):
    validate_recording(rec)
    cols = ["t_s"] + [f"ch{i + 1}" for i in range(len(rec.channels))]
    t = rec.times()
    chans = [c.tolist() for c in rec.channels]
    lines = [",".join(cols)]
    for i, ti in enumerate(t.tolist()):
        lines.append(",".join([_fmt(ti)] + [_fmt(c[i]) for c in chans]))
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_hr_csv(src):
    """Read a ``t_s,hr_bpm`` file; every reading must lie in [20, 230]."""
    _, a = _rows(src, (["t_s", "hr_bpm"],))
    rate = _uniform_rate(a[:, 0])
    return validate_hr_series(HrSeries(rate, a[:, 1], a[0, 0]))


def write_hr_csv(hr):
    lines = ["t_s,hr_bpm"]
    for t, v in zip(hr.times().tolist(), hr.values.tolist()):
        lines.append(f"{_fmt(t)},{_fmt(v)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_features_csv(fm):
    cols = ["t_s"] + [f"f{i + 1}" for i in range(fm.k)] + ["label"]
    lines = [",".join(cols)]
    for t, row, y in zip(fm.times.tolist(), fm.X.tolist(), fm.y.tolist()):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in row] + [_fmt(y)]))
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_features_csv(src):
    text = _open_text(src).read()
    first = text.split("\n", 1)[0].split(",")
    k = len(first) - 2
    expected = ["t_s"] + [f"f{i + 1}" for i in range(max(k, 0))] + ["label"]
    if k < 1 or first != expected:
        raise BadHeader(1, text.split("\n", 1)[0])
    _, a = _rows(io.StringIO(text), (expected,))
    return FeatureMatrix(k, a[:, 1:-1], a[:, -1], a[:, 0])


def write_bytes(path, data):
    with open(path, "wb") as fh:
        fh.write(data)
