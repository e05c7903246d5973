"""Bayes risk of a prediction Gaussian and the refinements built on it.

Under an L2 box loss the Bayes risk of a prediction is the trace of its
covariance. Divided by 4 (the largest possible trace, since every variance is
at most 1) it becomes a per-query weight in (0, 1] that rescales decoder
embeddings, classification targets and matching quality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import EmptyInput, MeanMismatch, ShapeMismatch
from .gauss import GaussPred4, as_cov4, gt_to_gaussian
from .geometry import Box, giou
from .metrics import gw_sq_cov, gw_sq_diag

__all__ = [
    "RiskVector",
    "LossConfig",
    "AffineParams",
    "bayes_risk",
    "risk_vector",
    "refine_embeddings",
    "bce",
    "iou_aware_cls_loss",
    "br_cls_loss",
    "br_match_quality",
    "box_loss",
    "box_loss_terms",
]

BCE_EPS = 1e-7


@dataclass(frozen=True)
class RiskVector:
    t: tuple[float, ...]

    def __post_init__(self) -> None:
        for v in self.t:
            if not 0.0 < v <= 1.0:
                raise ValueError(f"normalized risk {v!r} outside (0, 1]")

    def __len__(self) -> int:
        return len(self.t)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.t, dtype=np.float64)


@dataclass(frozen=True)
class LossConfig:
    """Weights of the IoU, L1 and GW terms of the box loss.

    The defaults (2, 5, 1) follow the usual DETR weighting for the first two
    terms and give GW unit weight; none of them are prescribed by the method.
    """

    lambda_iou: float = 2.0
    lambda_l1: float = 5.0
    lambda_gw: float = 1.0

    def __post_init__(self) -> None:
        w = (self.lambda_iou, self.lambda_l1, self.lambda_gw)
        if any(not math.isfinite(x) or x < 0.0 for x in w):
            raise ValueError(f"loss weights must be finite and >= 0, got {w}")
        if not any(x > 0.0 for x in w):
            raise ValueError("at least one loss weight must be positive")


@dataclass(frozen=True)
class AffineParams:
    weight: np.ndarray
    bias: np.ndarray
    activation: Literal["identity", "relu"] = "identity"

    def __post_init__(self) -> None:
        if self.activation not in ("identity", "relu"):
            raise ValueError(f"unknown activation {self.activation!r}")


def bayes_risk(p: GaussPred4) -> float:
    v0, v1, v2, v3 = p.var
    return v0 + v1 + v2 + v3


def risk_vector(preds: Sequence[GaussPred4]) -> RiskVector:
    if len(preds) == 0:
        raise EmptyInput("risk_vector needs at least one prediction")
    return RiskVector(tuple(bayes_risk(p) / 4.0 for p in preds))


def refine_embeddings(z, t: RiskVector, params: AffineParams) -> np.ndarray:
    """Scale each query's embedding column by ``1 - t_i`` then apply one affine layer.

    ``z`` is (d, N): one column per query.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise ShapeMismatch(f"embeddings must be 2-D (d, N), got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("embeddings contain non-finite entries")
    d, n = z.shape
    if len(t) != n:
        raise ShapeMismatch(f"risk vector has {len(t)} entries for {n} queries")
    weight = np.asarray(params.weight, dtype=np.float64)
    bias = np.asarray(params.bias, dtype=np.float64).reshape(-1)
    if weight.ndim != 2 or weight.shape[1] != d or bias.shape[0] != weight.shape[0]:
        raise ShapeMismatch(
            f"weight {weight.shape} / bias {bias.shape} incompatible with d={d}"
        )
    scaled = z * (1.0 - t.as_array())[None, :]
    out = weight @ scaled + bias[:, None]
    if params.activation == "relu":
        out = np.maximum(out, 0.0)
    return out


def bce(p: float, target: float) -> float:
    q = min(max(p, BCE_EPS), 1.0 - BCE_EPS)
    return -(target * math.log(q) + (1.0 - target) * math.log(1.0 - q))


def _iou_target(s: float, giou_value: float) -> float:
    # implemented exactly as published: squared gap between rescaled GIoU and score
    gap = (giou_value + 1.0) / 2.0 - s
    return gap * gap


def iou_aware_cls_loss(pos, neg) -> float:
    """``pos`` holds (score, giou) for matched queries, ``neg`` the unmatched scores."""
    total = 0.0
    for s, g in pos:
        total += bce(s, _iou_target(s, g))
    for s in neg:
        total += s * s * bce(s, 0.0)
    return total


def br_cls_loss(pos, neg) -> float:
    """Risk-weighted variant: ``pos`` holds (score, giou, bayes_risk) triples.

    Each positive target is multiplied by ``exp(-risk / 4)``; negatives are
    treated exactly as in :func:`iou_aware_cls_loss`.
    """
    total = 0.0
    for s, g, risk in pos:
        w = math.exp(-risk / 4.0)
        total += bce(s, w * _iou_target(s, g))
    for s in neg:
        total += s * s * bce(s, 0.0)
    return total


def br_match_quality(s: float, u: float, risk: float) -> float:
    return s ** (1.0 + risk / 4.0) * u ** (4.0 + risk)


def box_loss_terms(gt: Box, pred: Box, pred_gauss):
    """Unweighted (iou, l1, gw) terms of :func:`box_loss`."""
    if isinstance(pred_gauss, GaussPred4):
        m = pred_gauss.mean
        p = pred.as_tuple()
        if any(abs(a - b) > 1e-12 for a, b in zip(m, p)):
            raise MeanMismatch(f"prediction mean {m} does not match box {p}")
        gw_term = gw_sq_diag(gt_to_gaussian(gt).var, pred_gauss.var)
    else:
        gw_term = gw_sq_cov(gt_to_gaussian(gt).cov, as_cov4(pred_gauss))
    iou_term = 1.0 - giou(gt, pred)
    l1_term = (
        abs(gt.cx - pred.cx) + abs(gt.cy - pred.cy) + abs(gt.w - pred.w) + abs(gt.h - pred.h)
    )
    return iou_term, l1_term, gw_term


def box_loss(gt: Box, pred: Box, pred_gauss, cfg: LossConfig = LossConfig()) -> float:
    """Box regression loss: lambda_iou (1 - GIoU) + lambda_l1 L1 + lambda_gw GW^2.

    ``pred_gauss`` is normally the :class:`GaussPred4` built from ``pred``. A
    raw 4x4 covariance is also accepted, which is how the zero-variance optimum
    (outside GaussPred4's open constraint) is evaluated.

    The GW term is blind to location (it only sees covariances); the L1 and
    IoU terms carry all of the positional signal.
    """
    iou_term, l1_term, gw_term = box_loss_terms(gt, pred, pred_gauss)
    return cfg.lambda_iou * iou_term + cfg.lambda_l1 * l1_term + cfg.lambda_gw * gw_term
