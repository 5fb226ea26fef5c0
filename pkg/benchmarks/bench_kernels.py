"""Compare the compiled and pure-Python kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Each kernel runs on identical inputs under both backends; the table reports
the best wall time of ``--repeat`` runs and the speed-up of the compiled
core. Outputs are cross-checked so a fast-but-wrong build cannot hide.
"""

import argparse
import json
import sys
import time

import numpy as np

from pulsehr import _kernels_py as py_k
from pulsehr import synth
from pulsehr.sigproc import DEFAULT_CONFIG, window_ends

try:
    from pulsehr import _ckernels as c_k
except ImportError:  # extension not built
    c_k = None


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _close(a, b):
    if isinstance(a, tuple):
        return all(_close(x, y) for x, y in zip(a, b))
    if isinstance(a, float):
        return abs(a - b) <= 1e-6 * max(1.0, abs(a))
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and np.allclose(a, b, rtol=1e-6, atol=1e-6, equal_nan=True)


def cases():
    rng = np.random.default_rng(0)
    cfg = synth.SynthConfig.for_scenario("daily", duration_s=1800, seed=0)
    rec, _ = synth.generate(cfg)
    x = np.ascontiguousarray(rec.channel(1))
    fs = rec.fs_hz
    width = int(round(DEFAULT_CONFIG.window_s * fs))
    ends = window_ends(rec.n_samples, fs, DEFAULT_CONFIG)
    dist = DEFAULT_CONFIG.refractory_samples(fs)
    det = DEFAULT_CONFIG.detrend_samples(fs)

    X = rng.normal(70, 10, size=(4000, 15))
    y = X[:, -1] + rng.normal(0, 2, size=4000)
    Xq = rng.normal(70, 10, size=(200, 15))
    Xs = rng.normal(size=(400, 15))
    ys = Xs[:, 0] - Xs[:, 1] + rng.normal(0, 0.1, size=400)
    sizes = (15, 10, 10, 10, 1)
    n_theta = sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))
    theta0 = rng.normal(0, 0.3, size=n_theta)
    perm = rng.permutation(4000)
    Xn = (X - X.mean(0)) / X.std(0)

    def mlp_epoch(k):
        theta = theta0.copy()
        m1 = np.zeros_like(theta)
        m2 = np.zeros_like(theta)
        k.mlp_epoch(theta, m1, m2, 0, sizes, Xn, y - y.mean(), perm, 32, 1e-4, 1e-3, k.ACT_RELU)
        return theta

    def tree_one(k):
        t = k.build_tree(X[:1000], y[:1000], 7)
        ev = k.TreeEvaluator(*t)
        row = X[0].copy()
        acc = 0.0
        for _ in range(20000):
            acc += ev.predict_one(row)
        return acc

    return [
        ("windowed_hr (30 min)", lambda k: k.windowed_hr(x, fs, ends, width, dist, 0.5, det)),
        ("build_tree d7 (4000x15)", lambda k: k.build_tree(X, y, 7)),
        ("tree predict_one x20000", tree_one),
        ("knn_predict (200 q)", lambda k: k.knn_predict(X, y, Xq, 10, k.METRIC_EUCLIDEAN)),
        ("smo_solve rbf (400)", lambda k: k.smo_solve(Xs, ys, 1.0, 0.05, k.KERNEL_RBF,
                                                       1.0 / 15, 0.0, 3, 1e-3, 10**6)[:2]),
        ("mlp_epoch (4000 rows)", mlp_epoch),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="write results as JSON")
    args = ap.parse_args(argv)
    if c_k is None:
        print("compiled backend not available; build with "
              "`pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    rows = []
    print(f"{'kernel':<26}{'python s':>12}{'compiled s':>12}{'speed-up':>10}  match")
    for name, fn in cases():
        tp, op = best_time(lambda: fn(py_k), args.repeat)
        tc, oc = best_time(lambda: fn(c_k), args.repeat)
        ok = _close(op, oc)
        rows.append({"kernel": name, "python_s": tp, "compiled_s": tc,
                     "speedup": tp / tc, "outputs_match": bool(ok)})
        print(f"{name:<26}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x  {'yes' if ok else 'NO'}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["outputs_match"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
