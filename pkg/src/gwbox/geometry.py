"""Axis-aligned boxes in normalized (cx, cy, w, h) form and the IoU family.

All overlap metrics share one corner/area routine so that they are bitwise
symmetric in their arguments and so that GIoU equals IoU exactly whenever one
box contains the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidBox

__all__ = [
    "Box",
    "CornerBox",
    "to_corners",
    "to_box",
    "iou",
    "giou",
    "diou",
    "ciou",
    "pairwise_iou",
]

_ASPECT_SCALE = 4.0 / (math.pi * math.pi)


@dataclass(frozen=True, slots=True)
class Box:
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "w", "h"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidBox(f"{name}={value!r} is not finite")
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise InvalidBox(f"center ({self.cx}, {self.cy}) outside [0, 1]")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise InvalidBox(f"size ({self.w}, {self.h}) outside (0, 1]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.float64)


class CornerBox(NamedTuple):
    x1: float
    y1: float
    x2: float
    y2: float


def to_corners(b: Box) -> CornerBox:
    hw = b.w / 2.0
    hh = b.h / 2.0
    return CornerBox(b.cx - hw, b.cy - hh, b.cx + hw, b.cy + hh)


def to_box(c: CornerBox) -> Box:
    """Inverse of :func:`to_corners`.

    Exact for boxes whose coordinates are dyadic (e.g. multiples of 2**-20);
    for arbitrary floats the rounding in ``cx +/- w/2`` makes the forward map
    non-injective, so the round trip is exact only to within a few ulp.
    """
    return Box((c.x1 + c.x2) / 2.0, (c.y1 + c.y2) / 2.0, c.x2 - c.x1, c.y2 - c.y1)


def _overlap(a: Box, b: Box):
    ca = to_corners(a)
    cb = to_corners(b)
    area_a = (ca.x2 - ca.x1) * (ca.y2 - ca.y1)
    area_b = (cb.x2 - cb.x1) * (cb.y2 - cb.y1)
    iw = max(0.0, min(ca.x2, cb.x2) - max(ca.x1, cb.x1))
    ih = max(0.0, min(ca.y2, cb.y2) - max(ca.y1, cb.y1))
    inter = iw * ih
    # larger + (smaller - inter): symmetric, and exact under containment
    union = max(area_a, area_b) + (min(area_a, area_b) - inter)
    return ca, cb, inter, union


def _enclosing(ca: CornerBox, cb: CornerBox) -> tuple[float, float]:
    ew = max(ca.x2, cb.x2) - min(ca.x1, cb.x1)
    eh = max(ca.y2, cb.y2) - min(ca.y1, cb.y1)
    return ew, eh


def iou(a: Box, b: Box) -> float:
    _, _, inter, union = _overlap(a, b)
    return inter / union


def giou(a: Box, b: Box) -> float:
    ca, cb, inter, union = _overlap(a, b)
    ew, eh = _enclosing(ca, cb)
    enclose = ew * eh
    return inter / union - max(enclose - union, 0.0) / enclose


def diou(a: Box, b: Box) -> float:
    ca, cb, inter, union = _overlap(a, b)
    ew, eh = _enclosing(ca, cb)
    rho2 = (a.cx - b.cx) ** 2 + (a.cy - b.cy) ** 2
    diag2 = ew * ew + eh * eh
    return inter / union - rho2 / diag2


def ciou(a: Box, b: Box) -> float:
    ca, cb, inter, union = _overlap(a, b)
    ew, eh = _enclosing(ca, cb)
    ratio = inter / union
    rho2 = (a.cx - b.cx) ** 2 + (a.cy - b.cy) ** 2
    diag2 = ew * ew + eh * eh
    v = _ASPECT_SCALE * (math.atan(a.w / a.h) - math.atan(b.w / b.h)) ** 2
    alpha = 0.0 if v == 0.0 else v / ((1.0 - ratio) + v)
    return ratio - rho2 / diag2 - alpha * v


def pairwise_iou(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """IoU matrix between (N, 4) and (M, 4) cxcywh arrays.

    Uses the same operation order as :func:`iou`, so entries match the scalar
    function bitwise.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    ax1 = a[:, 0] - a[:, 2] / 2.0
    ay1 = a[:, 1] - a[:, 3] / 2.0
    ax2 = a[:, 0] + a[:, 2] / 2.0
    ay2 = a[:, 1] + a[:, 3] / 2.0
    bx1 = b[:, 0] - b[:, 2] / 2.0
    by1 = b[:, 1] - b[:, 3] / 2.0
    bx2 = b[:, 0] + b[:, 2] / 2.0
    by2 = b[:, 1] + b[:, 3] / 2.0
    area_a = ((ax2 - ax1) * (ay2 - ay1))[:, None]
    area_b = ((bx2 - bx1) * (by2 - by1))[None, :]
    iw = np.maximum(
        0.0, np.minimum(ax2[:, None], bx2[None, :]) - np.maximum(ax1[:, None], bx1[None, :])
    )
    ih = np.maximum(
        0.0, np.minimum(ay2[:, None], by2[None, :]) - np.maximum(ay1[:, None], by1[None, :])
    )
    inter = iw * ih
    union = np.maximum(area_a, area_b) + (np.minimum(area_a, area_b) - inter)
    return inter / union
