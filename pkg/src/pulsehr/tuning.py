"""Random-search hyperparameter tuning with contiguous-block cross-validation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import models
from .errors import InsufficientData, InvalidConfig, NoConvergence
from .evaluation import mape
from .models import (DTParams, KNNParams, MLPParams, ModelKind, RFParams,
                     SVRParams)

C_RANGE = (1e-5, 10.0)
ALPHA_RANGE = (1e-5, 10.0)


@dataclass(frozen=True)
class SearchSpec:
    kind: ModelKind = ModelKind.DT
    n_iter: int = 20
    n_folds: int = 5
    seed: int = 0
    scoring: str = "mape"

    def validate(self):
        ModelKind.parse(self.kind)
        if int(self.n_iter) < 1:
            raise InvalidConfig(f"n_iter must be >= 1, got {self.n_iter}")
        if int(self.n_folds) < 2:
            raise InvalidConfig(f"n_folds must be >= 2, got {self.n_folds}")
        if self.scoring != "mape":
            raise InvalidConfig(f"unsupported scoring {self.scoring!r}")
        return self


@dataclass
class Trial:
    index: int
    hyperparams: object
    seed: int
    fold_mapes: list
    mean_mape: float
    sd_mape: float


@dataclass
class SearchReport:
    kind: ModelKind
    trials: list
    best_index: int
    model: models.ModelArtifact
    folds: list = field(default_factory=list)

    @property
    def best(self):
        return self.trials[self.best_index]

    def to_dict(self):
        return {
            "kind": self.kind.name.lower(),
            "best_index": self.best_index,
            "best_hyperparams": models.params_to_dict(self.best.hyperparams),
            "best_mean_cv_mape_pct": self.best.mean_mape,
            "model_size_bytes": models.model_size(self.model),
            "folds": [[int(a), int(b)] for a, b in self.folds],
            "trials": [
                {"index": t.index, "seed": t.seed,
                 "hyperparams": models.params_to_dict(t.hyperparams),
                 "fold_mape_pct": list(t.fold_mapes),
                 "mean_cv_mape_pct": t.mean_mape, "sd_cv_mape_pct": t.sd_mape}
                for t in self.trials
            ],
        }


def _log_uniform(rng, lo, hi):
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def sample_hyperparams(kind, rng):
    """One draw from the search space of ``kind``.

    Integer ranges are uniform, C and alpha log-uniform over [1e-5, 10],
    categorical choices uniform. Fields outside the searched set keep their
    defaults.
    """
    kind = ModelKind.parse(kind)
    if kind is ModelKind.DT:
        return DTParams(max_depth=int(rng.integers(1, 21)))
    if kind is ModelKind.RF:
        return RFParams(n_trees=int(rng.integers(1, 31)), max_depth=int(rng.integers(3, 8)))
    if kind is ModelKind.KNN:
        return KNNParams(n_neighbors=int(rng.integers(1, 31)),
                         metric=("manhattan", "euclidean")[int(rng.integers(0, 2))])
    if kind is ModelKind.SVR:
        kernel = ("rbf", "sigmoid", "polynomial")[int(rng.integers(0, 3))]
        return SVRParams(kernel=kernel, c=_log_uniform(rng, *C_RANGE))
    hidden = tuple(int(v) for v in rng.integers(2, 16, size=3))
    activation = ("relu", "tanh")[int(rng.integers(0, 2))]
    return MLPParams(hidden=hidden, activation=activation,
                     alpha=_log_uniform(rng, *ALPHA_RANGE))


def fold_bounds(n, n_folds):
    """Contiguous ``(start, stop)`` validation blocks covering ``range(n)``."""
    edges = np.linspace(0, n, n_folds + 1)
    edges = np.floor(edges + 1e-9).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def trial_seed(seed, index):
    return int(np.random.default_rng([int(seed), int(index), 1]).integers(0, 2**63))


def score_trial(train, kind, hp, folds, seed=0):
    """Per-fold MAPE of ``hp`` with each block held out in turn."""
    kind = ModelKind.parse(kind)
    n = len(train)
    scores = []
    for a, b in folds:
        fit_rows = np.concatenate([np.arange(0, a), np.arange(b, n)])
        part = train.take(fit_rows)
        val = train.take(np.arange(a, b))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoConvergence)
            m = models.fit(kind, part, hp, seed=seed)
        scores.append(mape(models.predict_batch(m, val.X), val.y))
    return scores


def random_search(train, spec):
    """Random search over ``spec.kind``'s space, refit on all of ``train``.

    Trial ``i`` draws its hyperparameters and fit seed from ``(seed, i)`` only,
    so results do not depend on evaluation order. The best trial has the
    lowest mean CV MAPE; ties go to the smaller refit model, then the earlier
    trial.
    """
    spec.validate()
    kind = ModelKind.parse(spec.kind)
    n = len(train)
    need = spec.n_folds * (train.k + 2)
    if n < need:
        raise InsufficientData(f"{n} training rows < n_folds * (k + 2) = {need}")
    folds = fold_bounds(n, spec.n_folds)
    trials = []
    for i in range(spec.n_iter):
        hp = sample_hyperparams(kind, np.random.default_rng([int(spec.seed), i]))
        if kind is ModelKind.KNN:
            shortest = n - max(b - a for a, b in folds)
            if hp.n_neighbors > shortest:
                hp = KNNParams(shortest, hp.metric)
        tseed = trial_seed(spec.seed, i)
        scores = score_trial(train, kind, hp, folds, tseed)
        sd = float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0
        trials.append(Trial(i, hp, tseed, scores, float(np.mean(scores)), sd))

    # a trial whose score is not finite (e.g. a diverged fit) can never win
    ranked = [t.mean_mape if math.isfinite(t.mean_mape) else math.inf for t in trials]
    best_score = min(ranked)
    tied = [t for t, r in zip(trials, ranked) if r == best_score]
    refits = {}
    for t in tied:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoConvergence)
            refits[t.index] = models.fit(kind, train, t.hyperparams, seed=t.seed)
    best = min(tied, key=lambda t: (models.model_size(refits[t.index]), t.index))
    return SearchReport(kind, trials, best.index, refits[best.index], folds)
