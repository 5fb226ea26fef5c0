"""Two-stage wrist-PPG heart-rate estimation.

Stage 2 turns raw PPG into a rough 1 Hz heart-rate track (peak detection,
outlier filtering, slew clamping); a small regressor then maps the last ``k``
readings of that track to a refined estimate.
"""

from . import dataset, dataset_io, evaluation, models, sigproc, synth, tuning
from .errors import PulseHRError
from .kernels import BACKEND
from .signal_model import HrSeries, PpgRecording, Scenario

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "HrSeries", "PpgRecording", "PulseHRError", "Scenario",
    "dataset", "dataset_io", "evaluation", "models", "sigproc", "synth",
    "tuning", "__version__",
]
