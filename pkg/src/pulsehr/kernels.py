"""Kernel backend selection.

The compiled extension is preferred; set ``PULSEHR_PURE_PYTHON=1`` to force
the numpy fallback.
"""

import os

if os.environ.get("PULSEHR_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        from . import _kernels_py as _impl

from . import _kernels_py as python_backend  # noqa: E402

BACKEND = _impl.BACKEND

KERNEL_RBF = _impl.KERNEL_RBF
KERNEL_SIGMOID = _impl.KERNEL_SIGMOID
KERNEL_POLY = _impl.KERNEL_POLY
ACT_RELU = _impl.ACT_RELU
ACT_TANH = _impl.ACT_TANH
METRIC_MANHATTAN = _impl.METRIC_MANHATTAN
METRIC_EUCLIDEAN = _impl.METRIC_EUCLIDEAN

moving_average = _impl.moving_average
detect_peaks = _impl.detect_peaks
windowed_hr = _impl.windowed_hr
build_tree = _impl.build_tree
TreeEvaluator = _impl.TreeEvaluator
knn_predict = _impl.knn_predict
kernel_matrix = _impl.kernel_matrix
smo_solve = _impl.smo_solve
svr_decision = _impl.svr_decision
mlp_unpack = _impl.mlp_unpack
mlp_forward = _impl.mlp_forward
mlp_loss_grad = _impl.mlp_loss_grad
mlp_epoch = _impl.mlp_epoch


def compiled_backend():
    """Return the compiled module, or None if it was not built."""
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels
