"""Command-line driver: ``pulsehr <command> [flags]``.

Commands: ``synth``, ``process``, ``train``, ``tune``, ``eval``, ``bench`` and
``pipeline``. Settings come from built-in defaults, then an optional
``--config`` file of ``key=value`` lines (``#`` starts a comment), then
``--set key=value`` flags, then dedicated flags such as ``--seed``. The
environment variable ``PULSEHR_SEED`` supplies the seed when none is given.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import dataset, dataset_io, evaluation, models, sigproc, synth, tuning
from .errors import NoConvergence, PulseHRError, ValidationError
from .kernels import BACKEND
from .models import ModelKind
from .signal_model import Scenario

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
SEED_ENV = "PULSEHR_SEED"
ALL_KINDS = ("dt", "rf", "knn", "svr", "mlp")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------- config

def _int(v):
    return int(str(v), 10) if isinstance(v, str) else int(v)


def _float(v):
    return float(v)


def _str(v):
    return str(v)


def _int_list(v):
    if isinstance(v, str):
        v = [p for p in v.replace(" ", "").split(",") if p]
    return tuple(int(p) for p in v)


def _name_list(v):
    if isinstance(v, str):
        v = [p for p in v.replace(" ", "").split(",") if p]
    return tuple(str(p).lower() for p in v)


# key -> (group, field, converter)
KEYS = {
    "scenario": ("synth", "scenario", _str),
    "duration": ("synth", "duration_s", _float),
    "fs": ("synth", "fs_hz", _float),
    "hr_start_bpm": ("synth", "hr_start_bpm", _float),
    "hr_min_bpm": ("synth", "hr_min_bpm", _float),
    "hr_max_bpm": ("synth", "hr_max_bpm", _float),
    "hr_max_slew_bpm_per_s": ("synth", "hr_max_slew_bpm_per_s", _float),
    "noise_std": ("synth", "noise_std", _float),
    "baseline_wander_amp": ("synth", "baseline_wander_amp", _float),
    "ma_rate_per_min": ("synth", "ma_rate_per_min", _float),
    "ma_amp": ("synth", "ma_amp", _float),
    "ma_dur_s": ("synth", "ma_dur_s", _float),
    "slew_var_scale": ("synth", "slew_var_scale", _float),
    "window_s": ("sigproc", "window_s", _float),
    "hop_s": ("sigproc", "hop_s", _float),
    "detrend_window_s": ("sigproc", "detrend_window_s", _float),
    "min_prominence_factor": ("sigproc", "min_prominence_factor", _float),
    "max_hr_bpm": ("sigproc", "max_hr_bpm", _float),
    "z_threshold": ("sigproc", "z_threshold", _float),
    "z_window_readings": ("sigproc", "z_window_readings", _int),
    "clamp_bound": ("sigproc", "clamp_bound", _float),
    "channel": ("sigproc", "channel", _int),
    "model": ("run", "model", _str),
    "features": ("run", "features", _int_list),
    "models": ("run", "models", _name_list),
    "iters": ("search", "n_iter", _int),
    "folds": ("search", "n_folds", _int),
    "train_fraction": ("split", "train_fraction", _float),
    "split_mode": ("split", "mode", _str),
    "seed": ("run", "seed", _int),
}


@dataclass(frozen=True)
class RunConfig:
    """Fully validated settings for one command invocation."""

    synth: synth.SynthConfig
    sigproc: sigproc.SigprocConfig
    search: tuning.SearchSpec
    split: dataset.SplitSpec
    features: tuple
    models: tuple
    seed: int
    hyperparams: dict

    @property
    def k(self):
        return self.features[0]

    @property
    def kind(self):
        return self.search.kind

    def to_lines(self):
        """Effective settings as ``key=value`` lines (config-file syntax)."""
        out = {}
        for key, (group, name, _) in KEYS.items():
            if group == "synth" and name in ("hr_min_bpm", "hr_max_bpm"):
                lo, hi = self.synth.hr_bounds_bpm
                v = lo if name == "hr_min_bpm" else hi
            elif group == "run":
                v = {"model": self.kind.name.lower(), "seed": self.seed,
                     "features": ",".join(map(str, self.features)),
                     "models": ",".join(self.models)}[name]
            else:
                v = getattr(getattr(self, group), name)
            if hasattr(v, "value"):
                v = v.value
            out[key] = v
        for name, v in sorted(self.hyperparams.items()):
            out["hp." + name] = v
        return [f"{k}={v}" for k, v in out.items()]


def parse_config_text(text, source="<config>"):
    """``key=value`` pairs from config-file text."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        _check_key(key, f"{source}:{lineno}")
        values[key] = val
    return values


def _check_key(key, where):
    if key.startswith("hp.") and len(key) > 3:
        return
    if key not in KEYS:
        raise UsageError(f"{where}: unknown setting {key!r}")


def build_run_config(values, defaults=None):
    """Validate merged ``values`` into a :class:`RunConfig`.

    Raises :class:`UsageError` or a validation error before any work starts.
    """
    merged = dict(defaults or {})
    merged.update({k: v for k, v in values.items() if v is not None})
    groups = {"synth": {}, "sigproc": {}, "search": {}, "split": {}, "run": {}}
    hp = {}
    for key, raw in merged.items():
        _check_key(key, "setting")
        if key.startswith("hp."):
            hp[key[3:]] = raw
            continue
        group, name, conv = KEYS[key]
        try:
            groups[group][name] = conv(raw)
        except (TypeError, ValueError):
            raise UsageError(f"bad value for {key}: {raw!r}") from None

    run = groups["run"]
    seed = run.get("seed")
    if seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            seed = int(env) if env not in (None, "") else 0
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if not 0 <= seed < 2**63:
        raise UsageError(f"seed must lie in [0, 2^63), got {seed}")

    syn = groups["synth"]
    scenario = Scenario.parse(syn.pop("scenario", "daily"))
    lo = syn.pop("hr_min_bpm", None)
    hi = syn.pop("hr_max_bpm", None)
    if lo is not None or hi is not None:
        base = synth.SynthConfig().hr_bounds_bpm
        syn["hr_bounds_bpm"] = (base[0] if lo is None else lo, base[1] if hi is None else hi)
    syn_cfg = synth.SynthConfig.for_scenario(scenario, seed=seed, **syn)
    syn_cfg.validate()

    sp_cfg = sigproc.SigprocConfig(**groups["sigproc"]).validate()
    kind = ModelKind.parse(run.get("model", "dt"))
    search = tuning.SearchSpec(kind=kind, seed=seed, **groups["search"]).validate()
    sp = groups["split"]
    if "mode" in sp:
        try:
            sp["mode"] = dataset.SplitMode(sp["mode"].lower())
        except ValueError:
            raise UsageError(f"split_mode must be chronological or random, got {sp['mode']!r}") from None
    split_spec = dataset.SplitSpec(seed=seed, **sp).validate()

    feats = run.get("features", (15,))
    if not feats or any(k < 1 for k in feats):
        raise UsageError(f"features must be positive integers, got {feats}")
    kinds = run.get("models", ALL_KINDS)
    for name in kinds:
        ModelKind.parse(name)
    if not kinds:
        raise UsageError("models must name at least one model kind")
    if hp:
        models.params_from_dict(kind, hp)
    return RunConfig(syn_cfg, sp_cfg, search, split_spec, tuple(feats), tuple(kinds),
                     int(seed), dict(hp))


# --------------------------------------------------------------------- helpers

def _say(args, msg):
    if not getattr(args, "quiet", False):
        print(msg)


def _write(path, data):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    dataset_io.write_bytes(path, data)


def _json_bytes(obj):
    return evaluation.dumps_metrics(obj).encode("utf-8")


def _features(cfg, pphr_path, truth_path, k):
    pphr = dataset_io.read_hr_csv(pphr_path)
    truth = dataset_io.read_hr_csv(truth_path)
    fm = dataset.build_features(pphr, truth, k)
    return dataset.split(fm, cfg.split)


def _fit_quiet(kind, train, hp, seed):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoConvergence)
        return models.fit(kind, train, hp, seed=seed)


def _trace_bytes(test, pred):
    lines = ["t_s,truth_bpm,pphr_bpm,pred_bpm"]
    for t, y, p, q in zip(test.times.tolist(), test.y.tolist(),
                          test.last_feature.tolist(), np.asarray(pred).tolist()):
        lines.append(f"{t!r},{y!r},{p!r},{q!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# --------------------------------------------------------------------- commands

def cmd_synth(args, cfg):
    rec, truth = synth.generate(cfg.synth)
    _write(args.out, dataset_io.write_ppg_csv(rec))
    _write(args.truth, dataset_io.write_hr_csv(truth))
    s = cfg.synth
    _say(args, f"synth: scenario={s.scenario.value} duration={s.duration_s:g} s "
               f"fs={s.fs_hz:g} Hz samples={rec.n_samples} seed={s.seed}")
    return EXIT_OK


def cmd_process(args, cfg):
    rec = dataset_io.read_ppg_csv(args.ppg)
    out = sigproc.stage2(rec, cfg.sigproc)
    _write(args.out, dataset_io.write_hr_csv(out))
    _say(args, f"process: {len(out)} readings at 1 Hz from t={out.t0_s:g} s "
               f"(mean {float(np.mean(out.values)):.2f} bpm)")
    return EXIT_OK


def cmd_train(args, cfg):
    train, _ = _features(cfg, args.pphr, args.truth, cfg.k)
    hp = models.params_from_dict(cfg.kind, cfg.hyperparams)
    m = _fit_quiet(cfg.kind, train, hp, cfg.seed)
    data = models.serialize(m)
    _write(args.out, data)
    _say(args, f"train: {cfg.kind.name.lower()} k={cfg.k} rows={len(train)} "
               f"size={len(data)} B -> {args.out}")
    return EXIT_OK


def cmd_tune(args, cfg):
    train, _ = _features(cfg, args.pphr, args.truth, cfg.k)
    report = tuning.random_search(train, cfg.search)
    _write(args.out, models.serialize(report.model))
    if args.report:
        _write(args.report, _json_bytes(report.to_dict()))
    _say(args, f"tune: {cfg.kind.name.lower()} k={cfg.k} best trial {report.best_index} "
               f"cv_mape={report.best.mean_mape:.3f}% "
               f"{json.dumps(models.params_to_dict(report.best.hyperparams))}")
    return EXIT_OK


def cmd_eval(args, cfg):
    m = models.load(args.model_path)
    _, test = _features(cfg, args.pphr, args.truth, m.k)
    rep = evaluation.evaluate(m, test)
    _write(args.out, _json_bytes(rep.to_dict()))
    if args.trace:
        _write(args.trace, _trace_bytes(test, models.predict_batch(m, test.X)))
    _say(args, f"eval: mape={rep.mape_pct:.3f}% sd={rep.ape_sd_pct:.3f}% "
               f"baseline={rep.baseline_mape_pct:.3f}% rows={rep.n_rows}")
    return EXIT_OK


def _probe(m, cfg, args):
    if args.pphr and args.truth:
        _, test = _features(cfg, args.pphr, args.truth, m.k)
        return np.array(test.X[0])
    return np.full(m.k, 70.0)


def cmd_bench(args, cfg):
    m = models.load(args.model_path)
    probe = _probe(m, cfg, args)
    lat = evaluation.bench_latency(m, probe, reps=args.reps, warmup=args.warmup)
    rep = evaluation.MetricsReport(float("nan"), float("nan"), 0,
                                   models.model_size(m), lat)
    d = rep.to_dict()
    for key in ("mape_pct", "ape_sd_pct", "n_rows", "baseline_mape_pct"):
        d.pop(key)
    d["backend"] = BACKEND
    _write(args.out, _json_bytes(d))
    _say(args, f"bench: median={lat.median_us:.3f} us mean={lat.mean_us:.3f} us "
               f"p99={lat.p99_us:.3f} us size={d['model_size_bytes']} B")
    return EXIT_OK


# --------------------------------------------------------------------- pipeline

def _tune_cell(job):
    """Tune and score one (kind, k) cell; runs in a worker process."""
    kind, k, train, test, spec = job
    report = tuning.random_search(train, replace(spec, kind=ModelKind.parse(kind)))
    pred = models.predict_batch(report.model, test.X)
    rep = evaluation.evaluate(report.model, test)
    return (kind, k, models.serialize(report.model), report.to_dict(),
            rep.to_dict(), pred)


def _table_text(kinds, feats, cells, baseline):
    def row(label, vals, width=16):
        return f"{label:<10}" + "".join(f"{v:>{width}}" for v in vals)

    head = row("model", [f"k={k}" for k in feats])
    out = ["Test MAPE % (mean +- SD of per-reading APE)", head]
    out.append(row("sigproc", [f"{baseline[k][0]:.2f}+-{baseline[k][1]:.2f}" for k in feats]))
    for kind in kinds:
        out.append(row(kind, [f"{cells[kind, k]['mape_pct']:.2f}+-{cells[kind, k]['ape_sd_pct']:.2f}"
                              for k in feats]))
    out += ["", "Serialized model size (bytes)", head]
    for kind in kinds:
        out.append(row(kind, [str(cells[kind, k]["model_size_bytes"]) for k in feats]))
    out += ["", "Median single-reading latency (us)", head]
    for kind in kinds:
        out.append(row(kind, [f"{cells[kind, k]['latency_median_us']:.3f}" for k in feats]))
    return "\n".join(out) + "\n"


ACCURACY_FIELDS = ("kind", "k", "mape_pct", "ape_sd_pct", "n_rows", "model_size_bytes",
                   "baseline_mape_pct", "best_hyperparams", "best_mean_cv_mape_pct")


def cmd_pipeline(args, cfg):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if bool(args.ppg) != bool(args.truth):
        raise UsageError("--ppg and --truth must be given together")
    if args.ppg:
        rec = dataset_io.read_ppg_csv(args.ppg)
        truth = dataset_io.read_hr_csv(args.truth)
        source = "user"
    else:
        rec, truth = synth.generate(cfg.synth)
        _write(out_dir / "ppg.csv", dataset_io.write_ppg_csv(rec))
        _write(out_dir / "truth.csv", dataset_io.write_hr_csv(truth))
        source = "synthetic"
    _write(out_dir / "run_config.txt", ("\n".join(cfg.to_lines()) + "\n").encode())
    pphr = sigproc.stage2(rec, cfg.sigproc)
    _write(out_dir / "pphr.csv", dataset_io.write_hr_csv(pphr))
    _say(args, f"pipeline: {source} data, {rec.n_samples} samples, {len(pphr)} Stage-2 readings")

    feats, kinds = cfg.features, cfg.models
    splits, baseline, jobs = {}, {}, []
    for k in feats:
        train, test = dataset.split(dataset.build_features(pphr, truth, k), cfg.split)
        splits[k] = (train, test)
        errs = evaluation.ape(test.last_feature, test.y)
        baseline[k] = (float(errs.mean()), evaluation.sample_sd(errs))
        for kind in kinds:
            jobs.append((kind, k, train, test, cfg.search))

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_tune_cell, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_tune_cell(job))
            _say(args, f"  tuned {job[0]} k={job[1]}")

    cells = {}
    trace_dir = out_dir / "traces"
    for kind, k, blob, report, metrics, pred in results:
        m = models.deserialize(blob)
        _write(out_dir / "models" / f"{kind}_k{k}.bin", blob)
        _write(trace_dir / f"{kind}_k{k}.csv", _trace_bytes(splits[k][1], pred))
        # timing runs serially so cells do not compete for the CPU
        lat = evaluation.bench_latency(m, np.array(splits[k][1].X[0]),
                                       reps=args.reps, warmup=args.warmup)
        cells[kind, k] = dict(metrics, kind=kind, k=k,
                              best_hyperparams=report["best_hyperparams"],
                              best_mean_cv_mape_pct=report["best_mean_cv_mape_pct"],
                              latency_mean_us=lat.mean_us, latency_median_us=lat.median_us,
                              latency_p99_us=lat.p99_us, reps=lat.reps)

    ordered = [cells[kind, k] for kind in kinds for k in feats]
    sig_rows = [{"k": k, "mape_pct": baseline[k][0], "ape_sd_pct": baseline[k][1]}
                for k in feats]
    table = {"source": source, "seed": cfg.seed, "features": list(feats),
             "models": list(kinds), "backend": BACKEND,
             "sigproc_only": sig_rows, "cells": ordered}
    accuracy = {"source": source, "seed": cfg.seed, "features": list(feats),
                "models": list(kinds), "sigproc_only": sig_rows,
                "cells": [{f: c[f] for f in ACCURACY_FIELDS} for c in ordered]}
    text = _table_text(kinds, feats, cells, baseline)
    _write(out_dir / "table.txt", text.encode("utf-8"))
    _write(out_dir / "table.json", _json_bytes(table))
    _write(out_dir / "accuracy.json", _json_bytes(accuracy))
    _say(args, text.rstrip("\n"))
    return EXIT_OK


# --------------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p):
    p.add_argument("--config", help="key=value settings file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one setting (repeatable)")
    p.add_argument("--seed", type=int, help=f"random seed (default ${SEED_ENV} or 0)")
    p.add_argument("--quiet", action="store_true")


def _synth_flags(p):
    p.add_argument("--scenario", help="sitting, sleeping or daily")
    p.add_argument("--duration", type=float, help="seconds")
    p.add_argument("--fs", type=float, help="sampling rate in Hz")


def _sigproc_flags(p):
    p.add_argument("--channel", type=int, help="1-based PPG channel")
    p.add_argument("--clamp-bound", dest="clamp_bound", type=float)
    p.add_argument("--z-threshold", dest="z_threshold", type=float)


def _data_flags(p, required=True):
    p.add_argument("--pphr", required=required, help="Stage-2 HR csv")
    p.add_argument("--truth", required=required, help="ground-truth HR csv")
    p.add_argument("--train-fraction", dest="train_fraction", type=float)


def build_parser():
    parser = _Parser(prog="pulsehr", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate synthetic PPG and truth HR")
    _common(p)
    _synth_flags(p)
    p.add_argument("--out", required=True, help="PPG csv to write")
    p.add_argument("--truth", required=True, help="truth HR csv to write")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("process", help="Stage-2 signal processing to 1 Hz HR")
    _common(p)
    _sigproc_flags(p)
    p.add_argument("--ppg", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_process)

    for name, func, helptext in (("train", cmd_train, "fit one model"),
                                 ("tune", cmd_tune, "random-search one model kind")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        _data_flags(p)
        p.add_argument("--model", help="dt, rf, knn, svr or mlp")
        p.add_argument("--features", help="number of trailing readings k")
        p.add_argument("--out", required=True, help="model file to write")
        if name == "train":
            p.add_argument("--hp", action="append", default=[], metavar="NAME=VALUE",
                           help="hyperparameter (repeatable)")
        else:
            p.add_argument("--iters", type=int)
            p.add_argument("--folds", type=int)
            p.add_argument("--report", help="search report JSON to write")
        p.set_defaults(func=func)

    p = sub.add_parser("eval", help="accuracy of a model on the test split")
    _common(p)
    _data_flags(p)
    p.add_argument("--model", dest="model_path", required=True, help="model file")
    p.add_argument("--out", required=True, help="metrics JSON to write")
    p.add_argument("--trace", help="per-reading trace csv to write")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="single-reading latency of a model")
    _common(p)
    _data_flags(p, required=False)
    p.add_argument("--model", dest="model_path", required=True, help="model file")
    p.add_argument("--out", required=True, help="metrics JSON to write")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--warmup", type=int, default=1_000)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("pipeline", help="end-to-end comparison table")
    _common(p)
    _synth_flags(p)
    _sigproc_flags(p)
    p.add_argument("--ppg", help="user PPG csv (skips synthesis)")
    p.add_argument("--truth", help="user truth HR csv")
    p.add_argument("--features", help="comma-separated k values")
    p.add_argument("--models", help="comma-separated model kinds")
    p.add_argument("--iters", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--reps", type=int, default=2_000)
    p.add_argument("--warmup", type=int, default=200)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for tuning")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_pipeline)
    return parser


COMMAND_DEFAULTS = {"pipeline": {"duration": 7200.0, "features": "2,4,6,8,10,15"}}
_FLAG_KEYS = ("scenario", "duration", "fs", "channel", "clamp_bound", "z_threshold",
              "model", "features", "models", "iters", "folds", "train_fraction", "seed")


def resolve_config(args):
    values = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise FileNotFoundError(f"cannot read config {args.config}: {exc}") from exc
        values.update(parse_config_text(text, args.config))
    for item in list(args.set) + [f"hp.{h}" for h in getattr(args, "hp", [])]:
        if "=" not in item:
            raise UsageError(f"expected KEY=VALUE, got {item!r}")
        key, val = (p.strip() for p in item.split("=", 1))
        _check_key(key, "--set")
        values[key] = val
    for key in _FLAG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.command == "pipeline" and getattr(args, "reps", 100) < 100:
        raise UsageError("--reps must be >= 100")
    if getattr(args, "jobs", 1) < 1:
        raise UsageError("--jobs must be >= 1")
    return build_run_config(values, COMMAND_DEFAULTS.get(args.command))


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"pulsehr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
    except (UsageError, ValidationError) as exc:
        print(f"pulsehr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"pulsehr: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"pulsehr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PulseHRError, OSError, ValueError) as exc:
        print(f"pulsehr: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
