"""Localization uncertainty from per-component 95% confidence intervals.

For a prediction with mean (cx, cy, w, h) and standard deviations sigma, each
component's interval ``mu +/- 1.96 sigma`` is split into k equal parts and the
midpoint of part i is taken in all four components at once, giving k
candidate boxes. The uncertainty is one minus the mean of the five largest
IoUs between the prediction and its candidates.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import KTooSmall
from .gauss import GaussPred4

__all__ = [
    "Z_95",
    "DEFAULT_K",
    "MIN_CANDIDATE_SIZE",
    "Interval",
    "UncertaintyReport",
    "confidence_intervals",
    "candidate_boxes",
    "candidate_ious",
    "localization_uncertainty",
    "localization_uncertainty_batch",
    "combined_metric",
]

Z_95 = 1.96
DEFAULT_K = 300
TOP = 5
MIN_CANDIDATE_SIZE = 1e-6


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class UncertaintyReport:
    uncertainty: float
    avg_top5_iou: float
    k: int
    combined_metric: float | None = None


def confidence_intervals(p: GaussPred4) -> tuple[Interval, Interval, Interval, Interval]:
    out = []
    for mu, var in zip(p.mean, p.var):
        s = math.sqrt(var)
        out.append(Interval(mu - Z_95 * s, mu + Z_95 * s))
    return tuple(out)  # type: ignore[return-value]


def _check_k(k: int) -> int:
    k = int(k)
    if k < TOP:
        raise KTooSmall(f"k must be at least {TOP}, got {k}")
    return k


def candidate_boxes(p: GaussPred4, k: int = DEFAULT_K) -> np.ndarray:
    """The k candidate boxes as a (k, 4) array; widths/heights floored at 1e-6."""
    k = _check_k(k)
    mu = np.asarray(p.mean, dtype=np.float64)
    sd = np.sqrt(np.asarray(p.var, dtype=np.float64))
    lo = mu - Z_95 * sd
    width = (mu + Z_95 * sd) - lo
    i = np.arange(1, k + 1, dtype=np.float64)
    frac = (2.0 * i - 1.0) / (2.0 * k)
    cand = lo[None, :] + frac[:, None] * width[None, :]
    cand[:, 2:] = np.maximum(cand[:, 2:], MIN_CANDIDATE_SIZE)
    return cand


def candidate_ious(p: GaussPred4, k: int = DEFAULT_K) -> np.ndarray:
    from .geometry import pairwise_iou

    return pairwise_iou(np.asarray(p.mean)[None, :], candidate_boxes(p, k))[0]


def localization_uncertainty_batch(means, sigmas, k: int = DEFAULT_K, threads: int = 1) -> np.ndarray:
    """Mean top-5 candidate IoU for each row of (N, 4) ``means`` / ``sigmas``.

    Rows are independent, so splitting the work over ``threads`` does not
    change any result. Uncertainty is ``1 - returned value``.
    """
    k = _check_k(k)
    means = np.ascontiguousarray(means, dtype=np.float64).reshape(-1, 4)
    sigmas = np.ascontiguousarray(sigmas, dtype=np.float64).reshape(-1, 4)
    if means.shape != sigmas.shape:
        raise ValueError(f"means {means.shape} and sigmas {sigmas.shape} differ in shape")
    n = means.shape[0]
    threads = max(1, int(threads))
    if threads == 1 or n < 2 * threads:
        return _kernels.sweep_top5(means, sigmas, k, Z_95, MIN_CANDIDATE_SIZE)
    bounds = np.linspace(0, n, threads + 1).astype(int)
    out = np.empty(n, dtype=np.float64)

    def work(a: int, b: int) -> None:
        out[a:b] = _kernels.sweep_top5(means[a:b], sigmas[a:b], k, Z_95, MIN_CANDIDATE_SIZE)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, bounds[:-1], bounds[1:]))
    return out


def localization_uncertainty(
    p: GaussPred4, k: int = DEFAULT_K, score: float | None = None, iou: float | None = None
) -> UncertaintyReport:
    """Uncertainty report for one prediction.

    When both ``score`` and ``iou`` (overlap with a reference box) are given,
    the report also carries the combined quality metric.
    """
    k = _check_k(k)
    sd = [math.sqrt(v) for v in p.var]
    avg = float(localization_uncertainty_batch([p.mean], [sd], k)[0])
    cm = combined_metric(score, iou) if score is not None and iou is not None else None
    return UncertaintyReport(1.0 - avg, avg, k, cm)


def combined_metric(s: float, u: float) -> float:
    """Joint score/overlap quality ``s * sqrt(u)``."""
    return s * math.sqrt(u)
