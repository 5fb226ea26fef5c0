"""The compiled core and the numpy fallback must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pulsehr import _kernels_py as py_k
from pulsehr import kernels, synth
from pulsehr.sigproc import DEFAULT_CONFIG, window_ends

c_k = kernels.compiled_backend()
needs_compiled = pytest.mark.skipif(c_k is None, reason="compiled extension not built")


def test_backend_is_selected():
    assert kernels.BACKEND in ("cython", "python")
    if c_k is not None:
        assert kernels.BACKEND == "cython"


def test_env_var_forces_fallback():
    env = dict(os.environ, PULSEHR_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import pulsehr; print(pulsehr.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
@given(st.integers(0, 2**32 - 1), st.integers(3, 400), st.integers(1, 31))
def test_moving_average_and_peaks_agree(seed, n, width):
    x = np.random.default_rng(seed).normal(size=n)
    assert np.allclose(c_k.moving_average(x, width), py_k.moving_average(x, width),
                       rtol=0, atol=1e-12)
    assert np.array_equal(c_k.detect_peaks(x, 6, 0.5, width | 1),
                          py_k.detect_peaks(x, 6, 0.5, width | 1))


@needs_compiled
def test_windowed_hr_agrees():
    rec, _ = synth.generate(synth.SynthConfig.for_scenario("daily", duration_s=300, seed=8))
    x = np.ascontiguousarray(rec.channel(1))
    ends = window_ends(rec.n_samples, 25.0, DEFAULT_CONFIG)
    args = (x, 25.0, ends, 200, 6, 0.5, 25)
    a, b = c_k.windowed_hr(*args), py_k.windowed_hr(*args)
    assert np.array_equal(np.isnan(a), np.isnan(b))
    assert np.allclose(a, b, rtol=1e-12, equal_nan=True)


@needs_compiled
@given(st.integers(0, 2**32 - 1), st.integers(1, 120), st.integers(1, 5), st.integers(0, 9))
def test_trees_bit_identical(seed, n, k, depth):
    rng = np.random.default_rng(seed)
    X = np.round(rng.normal(size=(n, k)), int(rng.integers(0, 3)))
    y = np.round(rng.normal(70, 10, size=n), 1)
    a, b = c_k.build_tree(X, y, depth), py_k.build_tree(X, y, depth)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)
    q = rng.normal(size=(20, k))
    ea, eb = c_k.TreeEvaluator(*a), py_k.TreeEvaluator(*b)
    assert np.array_equal(ea.predict(q), eb.predict(q))
    assert ea.predict_one(q[0]) == eb.predict_one(q[0])


@needs_compiled
@pytest.mark.parametrize("metric", [0, 1])
def test_knn_identical(metric):
    rng = np.random.default_rng(3)
    Xt = rng.integers(0, 4, size=(200, 3)).astype(float)
    yt = rng.normal(70, 5, size=200)
    q = rng.integers(0, 4, size=(300, 3)).astype(float)
    assert np.array_equal(c_k.knn_predict(Xt, yt, q, 7, metric),
                          py_k.knn_predict(Xt, yt, q, 7, metric))


@needs_compiled
@pytest.mark.parametrize("kernel", [0, 1, 2])
def test_smo_agrees(kernel):
    rng = np.random.default_rng(4)
    X = rng.normal(size=(80, 3))
    z = X[:, 0] - 0.5 * X[:, 1] + rng.normal(0, 0.2, size=80)
    z -= z.mean()
    ca, ra, _, va = c_k.smo_solve(X, z, 1.0, 0.1, kernel, 0.3, 0.0, 3, 1e-3, 10**6)
    cb, rb, _, vb = py_k.smo_solve(X, z, 1.0, 0.1, kernel, 0.3, 0.0, 3, 1e-3, 10**6)
    q = rng.normal(size=(30, 3))
    da = c_k.svr_decision(X, ca, ra, q, kernel, 0.3, 0.0, 3)
    db = py_k.svr_decision(X, cb, rb, q, kernel, 0.3, 0.0, 3)
    # both stop within tolerance; decision functions agree to solver accuracy
    assert va < 1e-3 and vb < 1e-3
    assert np.allclose(da, db, atol=5e-3)


@needs_compiled
@pytest.mark.parametrize("act", [0, 1])
def test_mlp_kernels_agree(act):
    rng = np.random.default_rng(6)
    sizes = (4, 5, 3, 2, 1)
    n = sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))
    theta = rng.normal(0, 0.5, size=n)
    X = rng.normal(size=(70, 4))
    y = rng.normal(size=70)
    la, ga = c_k.mlp_loss_grad(theta, sizes, X, y, 0.01, act)
    lb, gb = py_k.mlp_loss_grad(theta, sizes, X, y, 0.01, act)
    assert la == pytest.approx(lb, rel=1e-12)
    assert np.allclose(ga, gb, rtol=1e-10, atol=1e-14)
    assert np.allclose(c_k.mlp_forward(theta, sizes, X, act),
                       py_k.mlp_forward(theta, sizes, X, act), rtol=1e-12)
    perm = rng.permutation(70)
    states = []
    for k in (c_k, py_k):
        th, m1, m2 = theta.copy(), np.zeros(n), np.zeros(n)
        step = k.mlp_epoch(th, m1, m2, 0, sizes, X, y, perm, 16, 0.01, 1e-3, act)
        states.append((step, th))
    assert states[0][0] == states[1][0] == 5
    assert np.allclose(states[0][1], states[1][1], rtol=1e-10, atol=1e-13)
