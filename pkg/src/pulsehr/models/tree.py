"""CART regression trees and bootstrap forests."""

import numpy as np

from .. import kernels
from ..errors import EmptyTrainingSet
from .artifact import ForestPayload, ModelArtifact, TrainMeta, TreePayload
from .params import DTParams, ModelKind, RFParams


def _check(train):
    if len(train) == 0:
        raise EmptyTrainingSet("cannot fit on an empty training set")


def grow_tree(X, y, max_depth):
    """Greedy variance-reduction tree as a :class:`TreePayload`.

    Splits are searched exhaustively over every feature and every midpoint
    between consecutive distinct values; ties go to the lowest feature, then
    the lowest threshold. Nodes stop at ``max_depth``, fewer than 2 rows or
    zero label variance.
    """
    return TreePayload(*kernels.build_tree(X, y, int(max_depth)))


def fit_dt(train, hp=DTParams(), seed=0):
    _check(train)
    hp.validate()
    tree = grow_tree(train.X, train.y, hp.max_depth)
    return ModelArtifact(ModelKind.DT, hp, tree, TrainMeta(train.k, len(train), int(seed)))


def fit_rf(train, hp=RFParams(), seed=0):
    """Bagged CART trees, each seeing all features at every split."""
    _check(train)
    hp.validate()
    n = len(train)
    trees = []
    for t in range(hp.n_trees):
        if hp.bootstrap:
            rows = np.random.default_rng([int(seed), t]).integers(0, n, size=n)
            X, y = train.X[rows], train.y[rows]
        else:
            X, y = train.X, train.y
        trees.append(grow_tree(X, y, hp.max_depth))
    return ModelArtifact(ModelKind.RF, hp, ForestPayload(tuple(trees)),
                         TrainMeta(train.k, n, int(seed)))
