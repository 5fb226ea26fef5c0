"""Regressor zoo with a uniform fit / predict / serialize contract."""

from .artifact import (ForestPayload, KnnPayload, MlpPayload, ModelArtifact,
                       SvrPayload, TrainMeta, TreePayload, predict,
                       predict_batch)
from .knn import fit_knn
from .mlp import fit_mlp, loss_and_grad
from .params import (DTParams, KNNParams, MLPParams, ModelKind, RFParams,
                     SVRParams, default_params, params_from_dict,
                     params_to_dict)
from .serialize import deserialize, load, model_size, save, serialize
from .svr import fit_svr
from .tree import fit_dt, fit_rf, grow_tree

FITTERS = {
    ModelKind.DT: fit_dt,
    ModelKind.RF: fit_rf,
    ModelKind.KNN: fit_knn,
    ModelKind.SVR: fit_svr,
    ModelKind.MLP: fit_mlp,
}


def fit(kind, train, hp=None, seed=0):
    """Dispatch to the fitter for ``kind``; ``hp`` defaults to the kind's defaults."""
    kind = ModelKind.parse(kind)
    if hp is None:
        hp = default_params(kind)
    return FITTERS[kind](train, hp, seed=seed)


__all__ = [
    "DTParams", "ForestPayload", "KNNParams", "KnnPayload", "MLPParams",
    "MlpPayload", "ModelArtifact", "ModelKind", "RFParams", "SVRParams",
    "SvrPayload", "TrainMeta", "TreePayload", "default_params", "deserialize",
    "fit", "fit_dt", "fit_knn", "fit_mlp", "fit_rf", "fit_svr", "grow_tree",
    "load", "loss_and_grad", "model_size", "params_from_dict",
    "params_to_dict", "predict", "predict_batch", "save", "serialize",
]
