"""Closed-form Wasserstein-2 and Gromov-Wasserstein distances between box Gaussians.

The Gromov-Wasserstein distance between a 2D ground-truth Gaussian and a 4D
prediction Gaussian depends only on the two covariances::

    4 (tr S_p - tr S_g)^2 + 8 ||S_p[:2, :2] - S_g||_F^2
        + 8 (||S_p||_F^2 - ||S_p[:2, :2]||_F^2)

Note for loss users: the means never enter, so a GW term alone carries no
location signal; pair it with the L1 and IoU terms (see :func:`gwbox.risk.box_loss`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPerturbation
from .gauss import GaussGT2, GaussPred4, embed_gt_cov
from .geometry import Box

__all__ = [
    "wasserstein2_sq",
    "gromov_wasserstein_sq",
    "gw_sq_cov",
    "gw_sq_diag",
    "ConvergenceProbe",
    "convergence_probe",
    "unit_direction",
]


def wasserstein2_sq(a: Box, b: Box) -> float:
    """Squared W2 between the inscribed-ellipse Gaussians of two boxes."""
    d0 = a.cx - b.cx
    d1 = a.cy - b.cy
    d2 = a.w / 2.0 - b.w / 2.0
    d3 = a.h / 2.0 - b.h / 2.0
    return d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3


def gw_sq_cov(cov_g, cov_p) -> float:
    """Closed form on raw matrices: ``cov_g`` is 2x2, ``cov_p`` is 4x4.

    No validation; sums run in row-major order with plain accumulation. The
    last term is evaluated as the sum of squared entries outside the top-left
    block, which is the same quantity as the difference of Frobenius norms but
    without cancellation.
    """
    g = np.asarray(cov_g, dtype=np.float64).tolist()
    p = np.asarray(cov_p, dtype=np.float64).tolist()
    tr_p = p[0][0] + p[1][1] + p[2][2] + p[3][3]
    tr_g = g[0][0] + g[1][1]
    block = 0.0
    outside = 0.0
    for i in range(4):
        row = p[i]
        for j in range(4):
            if i < 2 and j < 2:
                d = row[j] - g[i][j]
                block += d * d
            else:
                outside += row[j] * row[j]
    dt = tr_p - tr_g
    return 4.0 * (dt * dt) + 8.0 * block + 8.0 * outside


def gw_sq_diag(var_g, var_p) -> float:
    """Diagonal fast path; bitwise equal to :func:`gw_sq_cov` on diagonal inputs."""
    g0, g1 = var_g
    p0, p1, p2, p3 = var_p
    dt = (p0 + p1 + p2 + p3) - (g0 + g1)
    d0 = p0 - g0
    d1 = p1 - g1
    block = d0 * d0 + d1 * d1
    outside = p2 * p2 + p3 * p3
    return 4.0 * (dt * dt) + 8.0 * block + 8.0 * outside


def gromov_wasserstein_sq(g: GaussGT2, p) -> float:
    """Squared GW distance between a ground-truth and a prediction Gaussian.

    ``p`` is a :class:`GaussPred4` or a 4x4 covariance matrix (the latter is
    used for perturbation experiments with off-diagonal entries).
    """
    if isinstance(p, GaussPred4):
        return gw_sq_diag(g.var, p.var)
    return gw_sq_cov(g.cov, p)


@dataclass(frozen=True)
class ConvergenceProbe:
    direction: np.ndarray
    scales: tuple[float, ...]
    ratios: tuple[float, ...]

    def relative_change(self) -> float:
        """Relative gap between the ratios at the two smallest scales."""
        a, b = self.ratios[-2], self.ratios[-1]
        return abs(a - b) / max(abs(a), abs(b))

    def converged(self, rtol: float = 0.05) -> bool:
        return self.relative_change() < rtol


def convergence_probe(g: GaussGT2, direction, scales) -> ConvergenceProbe:
    """Evaluate GW^2(t) / t^2 along ``S_* + t * direction`` for each scale ``t``.

    ``direction`` must be symmetric with unit Frobenius norm; ``scales`` must be
    positive and strictly decreasing.
    """
    d = np.asarray(direction, dtype=np.float64)
    if d.shape != (4, 4) or np.max(np.abs(d - d.T)) > 1e-12:
        raise ValueError("direction must be a symmetric 4x4 matrix")
    if abs(math.sqrt(float(np.sum(d * d))) - 1.0) > 1e-12:
        raise ValueError("direction must have unit Frobenius norm")
    scales = tuple(float(t) for t in scales)
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    if any(t <= 0.0 for t in scales) or any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be positive and strictly decreasing")

    base = embed_gt_cov(g)
    ratios = []
    for t in scales:
        cov_p = base + t * d
        if np.any(np.diag(cov_p) < 0.0):
            raise InvalidPerturbation(f"negative variance at scale t={t}")
        ratios.append(gw_sq_cov(g.cov, cov_p) / (t * t))
    return ConvergenceProbe(d, scales, tuple(ratios))


def unit_direction(m) -> np.ndarray:
    """Symmetrize ``m`` and scale it to unit Frobenius norm."""
    m = np.asarray(m, dtype=np.float64)
    m = (m + m.T) / 2.0
    return m / np.sqrt(np.sum(m * m))
