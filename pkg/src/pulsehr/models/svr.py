"""Epsilon-insensitive support vector regression solved by SMO."""

import warnings

import numpy as np

from .. import kernels
from ..errors import EmptyTrainingSet, NoConvergence
from .artifact import ModelArtifact, SvrPayload, TrainMeta, _svr_kernel
from .params import ModelKind, SVRParams

TOLERANCE = 1e-3
MAX_ITER = 1_000_000


def standardize_fit(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


def fit_svr(train, hp=SVRParams(), seed=0, tol=TOLERANCE, max_iter=MAX_ITER):
    """Fit on standardized features; labels stay in bpm.

    Labels are centered before solving and the offset is folded back into the
    bias, which leaves the dual solution unchanged. If the iteration cap is
    hit with a violation above ``10 * tol`` a :class:`NoConvergence` warning is
    issued and the payload is flagged ``converged=False``.
    """
    hp.validate()
    if len(train) == 0:
        raise EmptyTrainingSet("cannot fit on an empty training set")
    X = np.asarray(train.X, dtype=np.float64)
    y = np.asarray(train.y, dtype=np.float64)
    mean, scale = standardize_fit(X)
    Xs = (X - mean) / scale
    if hp.gamma_mode == "scale":
        var = float(Xs.var())
        gamma = 1.0 / (train.k * var) if var > 0 else 1.0
    else:
        gamma = 1.0 / train.k
    kid, coef0, degree = _svr_kernel(hp)
    y_mean = float(y.mean())
    coef, rho, n_iter, violation = kernels.smo_solve(
        Xs, y - y_mean, float(hp.c), float(hp.epsilon_bpm), kid, gamma, coef0, degree,
        float(tol), int(max_iter))
    converged = not (n_iter >= max_iter and violation > 10 * tol)
    if not converged:
        warnings.warn(NoConvergence(
            f"SMO stopped after {n_iter} iterations with KKT violation {violation:.3g}"),
            stacklevel=2)
    keep = coef != 0
    payload = SvrPayload(Xs[keep], coef[keep], y_mean - rho, gamma, mean, scale, converged)
    return ModelArtifact(ModelKind.SVR, hp, payload, TrainMeta(train.k, len(train), int(seed)))
