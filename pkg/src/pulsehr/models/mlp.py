"""Three-hidden-layer perceptron trained with minibatch Adam."""

import numpy as np

from .. import kernels
from ..errors import EmptyTrainingSet
from .artifact import MlpPayload, ModelArtifact, TrainMeta
from .params import MLPParams, ModelKind
from .svr import standardize_fit

VALIDATION_FRACTION = 0.1


def activation_id(name):
    return kernels.ACT_RELU if name == "relu" else kernels.ACT_TANH


def init_params(sizes, activation, rng):
    """Uniform fan-in scaled weights, zero biases, flattened per layer."""
    parts = []
    gain = 6.0 if activation == "relu" else 3.0
    for li, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        g = gain if li < len(sizes) - 2 else 3.0
        bound = np.sqrt(g / a)
        parts.append(rng.uniform(-bound, bound, size=a * b))
        parts.append(np.zeros(b))
    return np.concatenate(parts)


def loss_and_grad(theta, sizes, X, y, alpha, activation="relu"):
    """Mean squared error plus ``alpha / 2 * ||W||^2`` and its gradient."""
    return kernels.mlp_loss_grad(np.ascontiguousarray(theta, dtype=np.float64), list(sizes),
                                 np.ascontiguousarray(X, dtype=np.float64),
                                 np.ascontiguousarray(y, dtype=np.float64),
                                 float(alpha), activation_id(activation))


def fit_mlp(train, hp=MLPParams(), seed=0):
    """Fit ``k -> h1 -> h2 -> h3 -> 1`` with early stopping.

    A seeded 10% of the rows is held out; training stops once the held-out
    MSE fails to improve for ``patience`` epochs and the best weights are
    kept. Inputs are standardized inside the artifact and the output bias
    starts at the label mean.
    """
    hp.validate()
    n = len(train)
    if n == 0:
        raise EmptyTrainingSet("cannot fit on an empty training set")
    rng = np.random.default_rng(int(seed))
    X = np.asarray(train.X, dtype=np.float64)
    y = np.asarray(train.y, dtype=np.float64)
    mean, scale = standardize_fit(X)
    Xs = np.ascontiguousarray((X - mean) / scale)
    sizes = [train.k, *hp.hidden, 1]
    act = activation_id(hp.activation)

    theta = init_params(sizes, hp.activation, rng)
    theta[-1] = y.mean()

    n_val = int(np.floor(VALIDATION_FRACTION * n)) if n >= 10 else 0
    order = rng.permutation(n)
    val_idx = np.sort(order[:n_val])
    fit_idx = np.sort(order[n_val:])
    Xf, yf = Xs[fit_idx], y[fit_idx]
    Xv, yv = (Xs[val_idx], y[val_idx]) if n_val else (Xf, yf)

    m1 = np.zeros_like(theta)
    m2 = np.zeros_like(theta)
    step = 0
    best = np.inf
    best_theta = theta.copy()
    stale = 0
    for _ in range(hp.max_epochs):
        perm = rng.permutation(len(fit_idx)).astype(np.int64)
        step = kernels.mlp_epoch(theta, m1, m2, step, sizes, Xf, yf, perm,
                                 hp.batch, float(hp.alpha), float(hp.lr), act)
        err = kernels.mlp_forward(theta, sizes, Xv, act) - yv
        score = float(np.mean(err * err))
        if not np.isfinite(score):
            break
        if not np.isfinite(best) or score < best - 1e-9 * max(1.0, best):
            best = score
            best_theta[:] = theta
            stale = 0
        else:
            stale += 1
            if stale >= hp.patience:
                break
    payload = MlpPayload(tuple(sizes), best_theta, mean, scale)
    return ModelArtifact(ModelKind.MLP, hp, payload, TrainMeta(train.k, n, int(seed)))
