"""Gaussian boxes, closed-form GW/W2 distances, risk-aware losses and matching, and localization uncertainty."""

from . import gauss, geometry, harness, matching, metrics, regress, risk, uncertainty  # noqa: F401
from ._kernels import backend_name, has_compiled
from .errors import GwboxError
from .gauss import GaussGT2, GaussPred4, gt_to_gaussian, pred_to_gaussian
from .geometry import Box, ciou, diou, giou, iou
from .matching import hungarian
from .metrics import gromov_wasserstein_sq, wasserstein2_sq
from .risk import LossConfig, bayes_risk, box_loss
from .uncertainty import combined_metric, localization_uncertainty

__version__ = "0.1.0"

__all__ = [
    "Box", "iou", "giou", "diou", "ciou",
    "GaussGT2", "GaussPred4", "gt_to_gaussian", "pred_to_gaussian",
    "gromov_wasserstein_sq", "wasserstein2_sq",
    "LossConfig", "bayes_risk", "box_loss",
    "hungarian", "localization_uncertainty", "combined_metric",
    "GwboxError", "backend_name", "has_compiled",
]
