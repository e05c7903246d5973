"""Box-fitting demo for the regression loss, finite differences and a Monte-Carlo risk oracle.

The fit optimizes a single predicted box and its diagonal covariance against
one ground truth. The loss separates into a location part (GIoU and L1 terms,
which depend only on the mean) and a shape part (the GW term, which depends
only on the variances). Each part takes its own gradient step, with step size
``min(lr, f / ||grad f||^2)``. The optimum value of both parts is 0, so that
cap is the classic Polyak step; it keeps the nonsmooth L1 term from
oscillating around its kink and lets the run hit tight tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import Diverged, NonFiniteObjective
from .gauss import GaussPred4, gt_to_gaussian
from .geometry import Box, giou
from .metrics import gw_sq_diag
from .risk import LossConfig, box_loss_terms

__all__ = [
    "VAR_FLOOR",
    "FitParams",
    "FitRecord",
    "FitTrace",
    "FitResult",
    "mc_bayes_risk_oracle",
    "numeric_gradient",
    "random_init",
    "init_at",
    "fit_box",
]

VAR_FLOOR = 1e-6
GRAD_STEP = 1e-6


def _logistic(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


@dataclass(frozen=True)
class FitParams:
    """Mean logits (any reals) and variances projected onto [VAR_FLOOR, 1]."""

    mean_logits: tuple[float, float, float, float]
    var: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        if len(self.mean_logits) != 4 or len(self.var) != 4:
            raise ValueError("FitParams needs four mean logits and four variances")
        if not all(VAR_FLOOR <= v <= 1.0 for v in self.var):
            raise ValueError(f"variances must lie in [{VAR_FLOOR}, 1], got {self.var}")

    def box(self) -> Box:
        return Box(*(_logistic(q) for q in self.mean_logits))

    def gaussian(self) -> GaussPred4:
        return GaussPred4(self.box().as_tuple(), tuple(self.var))  # type: ignore[arg-type]


@dataclass(frozen=True)
class FitRecord:
    loss: float
    gw: float
    l1: float
    iou_term: float
    var: tuple[float, float, float, float]


@dataclass
class FitTrace:
    records: list[FitRecord] = field(default_factory=list)

    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records])

    def variances(self) -> np.ndarray:
        return np.array([r.var for r in self.records])

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class FitResult:
    trace: FitTrace
    box: Box
    gaussian: GaussPred4
    params: FitParams


def mc_bayes_risk_oracle(sigma, n_samples: int, seed: int = 0) -> float:
    """Monte-Carlo estimate of E[sum_i (x_i - c_i)^2] with c ~ U(0,1)^4, x ~ N(c, diag(sigma^2))."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (4,):
        raise ValueError("sigma must have four components")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.0, 1.0, size=(n_samples, 4))
    x = c + sigma * rng.standard_normal(size=(n_samples, 4))
    return float(np.mean(np.sum((x - c) ** 2, axis=1)))


def numeric_gradient(objective: Callable[[Sequence[float]], float], params, h: float = GRAD_STEP) -> list[float]:
    """Central-difference gradient, one coordinate at a time."""
    p = [float(x) for x in params]
    grad = []
    for i in range(len(p)):
        orig = p[i]
        p[i] = orig + h
        fp = objective(list(p))
        p[i] = orig - h
        fm = objective(list(p))
        p[i] = orig
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise NonFiniteObjective(f"objective is not finite near coordinate {i}")
        grad.append((fp - fm) / (2.0 * h))
    return grad


def init_at(box: Box, var) -> FitParams:
    """Parameters whose induced box is ``box`` (up to logit rounding)."""
    var = tuple(min(max(float(v), VAR_FLOOR), 1.0) for v in var)
    return FitParams(tuple(_logit(x) for x in box.as_tuple()), var)  # type: ignore[arg-type]


def random_init(seed: int) -> FitParams:
    """Standard-normal mean logits; variances are logistic of standard normals, clipped to the floor."""
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(4)
    s = rng.standard_normal(4)
    var = tuple(min(max(_logistic(float(x)), VAR_FLOOR), 1.0) for x in s)
    return FitParams(tuple(float(x) for x in q), var)  # type: ignore[arg-type]


def _capped_step(f: Callable, x: list[float], lr: float, project: Callable[[list[float]], list[float]]):
    fx = f(x)
    g = numeric_gradient(f, x)
    gg = sum(gi * gi for gi in g)
    if gg == 0.0 or fx == 0.0:
        return x
    a = min(lr, fx / gg)
    return project([xi - a * gi for xi, gi in zip(x, g)])


def fit_box(
    gt: Box,
    init: FitParams | None = None,
    cfg: LossConfig = LossConfig(),
    steps: int = 5000,
    lr: float = 0.05,
    seed: int = 0,
) -> FitResult:
    """Minimize the box loss over one predicted box and its variances.

    ``init`` defaults to :func:`random_init` with ``seed``. The trace records
    the state before each step, so ``trace.records[0]`` is the initial loss.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if not lr > 0.0:
        raise ValueError("lr must be positive")
    if init is None:
        init = random_init(seed)
    gvar = gt_to_gaussian(gt).var
    gx = gt.as_tuple()

    def location_loss(q):
        pred = Box(*(_logistic(v) for v in q))
        l1 = sum(abs(a - b) for a, b in zip(gx, pred.as_tuple()))
        return cfg.lambda_iou * (1.0 - giou(gt, pred)) + cfg.lambda_l1 * l1

    def shape_loss(s):
        # raw arrays: finite differences may dip just below the floor
        return cfg.lambda_gw * gw_sq_diag(gvar, s)

    def project(s):
        return [min(max(v, VAR_FLOOR), 1.0) for v in s]

    q = list(init.mean_logits)
    s = list(init.var)
    trace = FitTrace()

    def record():
        pred = Box(*(_logistic(v) for v in q))
        gauss = GaussPred4(pred.as_tuple(), tuple(s))  # type: ignore[arg-type]
        iou_term, l1, gw = box_loss_terms(gt, pred, gauss)
        loss = cfg.lambda_iou * iou_term + cfg.lambda_l1 * l1 + cfg.lambda_gw * gw
        if not math.isfinite(loss):
            raise Diverged(f"loss became non-finite after {len(trace)} steps")
        trace.records.append(FitRecord(loss, gw, l1, iou_term, tuple(s)))  # type: ignore[arg-type]

    for _ in range(steps):
        record()
        q = _capped_step(location_loss, q, lr, lambda v: v)
        if cfg.lambda_gw > 0.0:
            s = _capped_step(shape_loss, s, lr, project)
    record()
    params = FitParams(tuple(q), tuple(s))  # type: ignore[arg-type]
    return FitResult(trace, params.box(), params.gaussian(), params)
