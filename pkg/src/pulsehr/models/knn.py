"""Uniform-weight k-nearest-neighbour regression."""

from ..errors import EmptyTrainingSet, NotEnoughRows
from .artifact import KnnPayload, ModelArtifact, TrainMeta
from .params import KNNParams, ModelKind


def fit_knn(train, hp=KNNParams(), seed=0):
    """Store the training rows; prediction averages the nearest labels.

    Distance ties are resolved in training-row order.
    """
    hp.validate()
    if len(train) == 0:
        raise EmptyTrainingSet("cannot fit on an empty training set")
    if len(train) < hp.n_neighbors:
        raise NotEnoughRows(f"{len(train)} rows < n_neighbors={hp.n_neighbors}")
    return ModelArtifact(ModelKind.KNN, hp, KnnPayload(train.X, train.y),
                         TrainMeta(train.k, len(train), int(seed)))
