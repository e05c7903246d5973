"""Synthetic scenes, calibration statistics, a metric counterexample search, heatmaps and AP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

from .errors import DegenerateRanks, NoneFound
from .gauss import gt_to_gaussian
from .geometry import Box, ciou, giou, iou, pairwise_iou
from .metrics import gw_sq_diag
from .uncertainty import DEFAULT_K, combined_metric, localization_uncertainty_batch

__all__ = [
    "Detection",
    "SyntheticScene",
    "CalibrationStats",
    "CounterexamplePair",
    "HeatmapGrid",
    "gen_synthetic",
    "calibration_experiment",
    "counterexample_search",
    "nested_square_pair",
    "gw_sq_box",
    "heatmap_bins",
    "average_precision",
    "average_precision_images",
]

SIGMA_MIN = 0.005
ZERO_NOISE_SIGMA = 1e-9
MIN_SIZE = 1e-3
MIN_CALIBRATION = 30


@dataclass(frozen=True)
class Detection:
    class_id: int
    score: float
    box: Box
    sigma: tuple[float, float, float, float]
    source: int


@dataclass(frozen=True)
class SyntheticScene:
    gts: tuple[tuple[int, Box], ...]
    dets: tuple[Detection, ...]


def gen_synthetic(seed: int, n_scenes: int, dets_per_scene: int, noise_level: float) -> list[SyntheticScene]:
    """Seeded scenes of 1-3 ground truths and noisy detections of them.

    Each detection copies a random ground truth, draws four standard deviations
    uniformly from [0.005, noise_level] and adds that Gaussian noise. Centers
    are clipped to [0, 1] and sizes to [1e-3, 1]. The score is
    ``0.3 + 0.7 * IoU`` plus N(0, 0.05) noise, clipped to [0, 1]. With
    ``noise_level == 0`` the boxes are exact copies and sigma is 1e-9.
    """
    if n_scenes < 0 or dets_per_scene < 0:
        raise ValueError("counts must be non-negative")
    if noise_level < 0:
        raise ValueError("noise_level must be non-negative")
    rng = np.random.default_rng(seed)
    scenes = []
    for _ in range(n_scenes):
        n_gt = int(rng.integers(1, 4))
        gts = []
        for _ in range(n_gt):
            w, h = rng.uniform(0.05, 0.5, size=2)
            cx = rng.uniform(w / 2.0, 1.0 - w / 2.0)
            cy = rng.uniform(h / 2.0, 1.0 - h / 2.0)
            gts.append((int(rng.integers(0, 3)), Box(float(cx), float(cy), float(w), float(h))))
        dets = []
        for _ in range(dets_per_scene):
            src = int(rng.integers(0, n_gt))
            cls, g = gts[src]
            ref = g.as_array()
            if noise_level == 0:
                sigma = np.full(4, ZERO_NOISE_SIGMA)
                x = ref.copy()
            else:
                sigma = rng.uniform(min(SIGMA_MIN, noise_level), noise_level, size=4)
                x = ref + sigma * rng.standard_normal(4)
                x[:2] = np.clip(x[:2], 0.0, 1.0)
                x[2:] = np.clip(x[2:], MIN_SIZE, 1.0)
            b = Box(*(float(v) for v in x))
            score = 0.3 + 0.7 * iou(g, b) + float(rng.normal(0.0, 0.05))
            score = min(max(score, 0.0), 1.0)
            dets.append(Detection(cls, score, b, tuple(float(s) for s in sigma), src))  # type: ignore[arg-type]
        scenes.append(SyntheticScene(tuple(gts), tuple(dets)))
    return scenes


@dataclass(frozen=True)
class CalibrationStats:
    spearman_uncertainty_error: float
    spearman_combined_uncertainty: float
    uncertainty: np.ndarray
    combined: np.ndarray
    one_minus_iou: np.ndarray


def _spearman(a: np.ndarray, b: np.ndarray) -> float:
    # scipy ranks ties by their average
    return float(spearmanr(a, b).statistic)


def calibration_experiment(scenes, k: int = DEFAULT_K, threads: int = 1) -> CalibrationStats:
    """Per-detection uncertainty, combined metric and 1 - IoU, with their rank correlations.

    Detections are taken in scene order, then detection order.
    """
    dets = [(s, d) for s in scenes for d in s.dets]
    if len(dets) < MIN_CALIBRATION:
        raise DegenerateRanks(f"need at least {MIN_CALIBRATION} detections, got {len(dets)}")
    means = np.array([d.box.as_tuple() for _, d in dets])
    sigmas = np.array([d.sigma for _, d in dets])
    unc = 1.0 - localization_uncertainty_batch(means, sigmas, k, threads)
    ious = np.array([iou(s.gts[d.source][1], d.box) for s, d in dets])
    comb = np.array([combined_metric(d.score, u) for (_, d), u in zip(dets, ious)])
    err = 1.0 - ious
    for name, arr in (("uncertainty", unc), ("combined metric", comb), ("1 - IoU", err)):
        if np.all(arr == arr[0]):
            raise DegenerateRanks(f"{name} is constant; rank correlation undefined")
    return CalibrationStats(_spearman(unc, err), _spearman(comb, unc), unc, comb, err)


@dataclass(frozen=True)
class CounterexamplePair:
    gt: Box
    pred_a: Box
    pred_b: Box
    giou_gap: float
    ciou_gap: float
    gw_gap: float


def gw_sq_box(gt: Box, pred: Box, eps: float = 1e-3) -> float:
    """GW^2 with the prediction covariance fixed to Diag(w^2/4, h^2/4, eps, eps)."""
    var_p = (pred.w * pred.w / 4.0, pred.h * pred.h / 4.0, eps, eps)
    return gw_sq_diag(gt_to_gaussian(gt).var, var_p)


def nested_square_pair(gt: Box, r: float) -> tuple[Box, Box]:
    """Concentric copies of ``gt`` scaled by ``r`` and ``1 / r``.

    Both have IoU (and GIoU, DIoU, CIoU) equal to r^2 with ``gt``: one is
    contained, the other contains, centers coincide and aspect ratios match.
    """
    a = Box(gt.cx, gt.cy, gt.w * r, gt.h * r)
    b = Box(gt.cx, gt.cy, gt.w / r, gt.h / r)
    return a, b


def _check(gt: Box, a: Box, b: Box, tol: float, min_gap: float, eps: float):
    dg = abs(giou(gt, a) - giou(gt, b))
    dc = abs(ciou(gt, a) - ciou(gt, b))
    dw = abs(gw_sq_box(gt, a, eps) - gw_sq_box(gt, b, eps))
    if dg < tol and dc < tol and dw > min_gap:
        return CounterexamplePair(gt, a, b, dg, dc, dw)
    return None


def counterexample_search(
    seed: int = 0,
    tol: float = 1e-6,
    min_gap: float = 0.01,
    max_trials: int = 1000,
    use_analytic_seed: bool = True,
    eps: float = 1e-3,
) -> CounterexamplePair:
    """Find a ground truth and two predictions that GIoU and CIoU score alike but GW separates.

    Tries the nested-square pair on (0.5, 0.5, 0.4, 0.4) with r = 0.5 first,
    then random boxes and random scale factors.
    """
    if not tol > 0 or not min_gap > 0:
        raise ValueError("tol and min_gap must be positive")
    if use_analytic_seed:
        gt = Box(0.5, 0.5, 0.4, 0.4)
        found = _check(gt, *nested_square_pair(gt, 0.5), tol, min_gap, eps)
        if found is not None:
            return found
    rng = np.random.default_rng(seed)
    for _ in range(max_trials):
        w, h = rng.uniform(0.05, 0.5, size=2)
        r = float(rng.uniform(max(w, h), 0.95))
        gt = Box(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)), float(w), float(h))
        found = _check(gt, *nested_square_pair(gt, r), tol, min_gap, eps)
        if found is not None:
            return found
    raise NoneFound(f"no counterexample within {max_trials} trials")


@dataclass(frozen=True)
class HeatmapGrid:
    x_edges: np.ndarray
    y_edges: np.ndarray
    counts: np.ndarray
    dropped: int


def heatmap_bins(pairs, x_bins: int, y_bins: int, ranges=((0.0, 1.0), (0.0, 1.0))) -> HeatmapGrid:
    """2D histogram of (x, y) pairs. Bins are half-open except the last, which
    also takes its upper edge; points outside ``ranges`` are counted as dropped."""
    if x_bins < 1 or y_bins < 1:
        raise ValueError("bin counts must be at least 1")
    pts = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
    counts, xe, ye = np.histogram2d(pts[:, 0], pts[:, 1], bins=(x_bins, y_bins), range=ranges)
    counts = counts.astype(np.int64)
    return HeatmapGrid(xe, ye, counts, int(pts.shape[0] - counts.sum()))


def average_precision(dets, gts, iou_threshold: float = 0.5) -> float:
    """Single-image, single-threshold AP. ``dets`` is a list of ``(score, Box)``.

    See :func:`average_precision_images` for the matching and interpolation rules.
    """
    return average_precision_images(
        [(0, s, b) for s, b in dets], [(0, g) for g in gts], iou_threshold
    )


def average_precision_images(dets, gts, iou_threshold: float = 0.5) -> float:
    """AP over several images: ``dets`` holds ``(image_id, score, Box)``, ``gts`` ``(image_id, Box)``.

    Detections are visited in descending score (ties keep input order); each
    one takes the unmatched ground truth of its image with the highest IoU,
    counted as a hit when that IoU reaches the threshold. Precision is made
    monotone from the right and integrated over every recall change.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError("iou_threshold must be in (0, 1)")
    if len(gts) == 0 or len(dets) == 0:
        return 0.0
    by_image: dict = {}
    for img, g in gts:
        by_image.setdefault(img, []).append(g.as_tuple())
    boxes = {img: np.array(v) for img, v in by_image.items()}
    taken = {img: np.zeros(len(v), dtype=bool) for img, v in by_image.items()}
    order = sorted(range(len(dets)), key=lambda i: -dets[i][1])
    tp = np.zeros(len(order))
    for r, i in enumerate(order):
        img, _, b = dets[i]
        if img not in boxes:
            continue
        ious = pairwise_iou(np.array([b.as_tuple()]), boxes[img])[0]
        row = np.where(taken[img], -1.0, ious)
        j = int(np.argmax(row))
        if row[j] >= iou_threshold:
            taken[img][j] = True
            tp[r] = 1.0
    ctp = np.cumsum(tp)
    recall = ctp / len(gts)
    precision = ctp / np.arange(1, len(order) + 1)
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    idx = np.flatnonzero(mrec[1:] != mrec[:-1])
    return float(np.sum((mrec[idx + 1] - mrec[idx]) * mpre[idx + 1]))
