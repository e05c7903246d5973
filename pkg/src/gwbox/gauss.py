"""Gaussian models of boxes.

A ground-truth box becomes a 2D Gaussian whose one-sigma ellipse is the box's
inscribed ellipse; a prediction becomes a 4D Gaussian over (cx, cy, w, h) with
independent components and learnable variances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveSigma, SigmaOutOfRange
from .geometry import Box

__all__ = [
    "GaussGT2",
    "GaussPred4",
    "gt_to_gaussian",
    "pred_to_gaussian",
    "embed_gt_cov",
    "as_cov4",
]


@dataclass(frozen=True)
class GaussGT2:
    mean: tuple[float, float]
    var: tuple[float, float]

    def __post_init__(self) -> None:
        if not all(v > 0.0 for v in self.var):
            raise ValueError(f"ground-truth variances must be positive, got {self.var}")

    @property
    def cov(self) -> np.ndarray:
        return np.diag(np.asarray(self.var, dtype=np.float64))


@dataclass(frozen=True)
class GaussPred4:
    mean: tuple[float, float, float, float]
    var: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        for v in self.var:
            if not v > 0.0:
                raise NonPositiveSigma(f"variance {v!r} is not positive")
            if v > 1.0:
                raise SigmaOutOfRange(f"variance {v!r} exceeds 1")

    @property
    def cov(self) -> np.ndarray:
        return np.diag(np.asarray(self.var, dtype=np.float64))

    @property
    def sigma(self) -> tuple[float, float, float, float]:
        return tuple(float(np.sqrt(v)) for v in self.var)  # type: ignore[return-value]

    @classmethod
    def from_variances(cls, mean, var) -> "GaussPred4":
        return cls(tuple(float(m) for m in mean), tuple(float(v) for v in var))


def gt_to_gaussian(b: Box) -> GaussGT2:
    return GaussGT2((b.cx, b.cy), (b.w * b.w / 4.0, b.h * b.h / 4.0))


def pred_to_gaussian(b: Box, sigma) -> GaussPred4:
    """Build the 4D prediction Gaussian from a box and four standard deviations.

    Raises NonPositiveSigma for any sigma <= 0 and SigmaOutOfRange when a
    variance would exceed 1.
    """
    sigma = tuple(float(s) for s in sigma)
    if len(sigma) != 4:
        raise ValueError(f"expected 4 standard deviations, got {len(sigma)}")
    for s in sigma:
        if not s > 0.0:
            raise NonPositiveSigma(f"standard deviation {s!r} is not positive")
    return GaussPred4(b.as_tuple(), tuple(s * s for s in sigma))  # type: ignore[arg-type]


def embed_gt_cov(g: GaussGT2) -> np.ndarray:
    """4x4 covariance with the ground-truth block top-left and zeros elsewhere.

    This is the unique prediction covariance at which the Gromov-Wasserstein
    distance to ``g`` vanishes.
    """
    out = np.zeros((4, 4), dtype=np.float64)
    out[0, 0], out[1, 1] = g.var
    return out


def as_cov4(m, *, tol: float = 1e-12) -> np.ndarray:
    """Validate a 4x4 symmetric PSD matrix (within ``tol``) and return it as float64."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.T)) > tol:
        raise ValueError("covariance is not symmetric")
    if np.linalg.eigvalsh(m).min() < -tol:
        raise ValueError("covariance is not positive semidefinite")
    return m
