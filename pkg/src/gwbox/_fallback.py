"""Pure-Python/numpy implementations of the kernels in ``_core.pyx``.

Same operation order as the compiled versions, so results are bitwise equal.
"""

from __future__ import annotations

import math

import numpy as np

_CHUNK = 2048


def _sweep_chunk(mu: np.ndarray, sd: np.ndarray, k: int, z: float, min_size: float) -> np.ndarray:
    lo = mu - z * sd
    width = (mu + z * sd) - lo
    i = np.arange(1, k + 1, dtype=np.float64)
    frac = (2.0 * i - 1.0) / (2.0 * k)
    cand = lo[:, None, :] + frac[None, :, None] * width[:, None, :]
    cand[..., 2:] = np.maximum(cand[..., 2:], min_size)

    ref = mu[:, None, :]
    ax1 = ref[..., 0] - ref[..., 2] / 2.0
    ay1 = ref[..., 1] - ref[..., 3] / 2.0
    ax2 = ref[..., 0] + ref[..., 2] / 2.0
    ay2 = ref[..., 1] + ref[..., 3] / 2.0
    bx1 = cand[..., 0] - cand[..., 2] / 2.0
    by1 = cand[..., 1] - cand[..., 3] / 2.0
    bx2 = cand[..., 0] + cand[..., 2] / 2.0
    by2 = cand[..., 1] + cand[..., 3] / 2.0
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    iw = np.maximum(np.minimum(ax2, bx2) - np.maximum(ax1, bx1), 0.0)
    ih = np.maximum(np.minimum(ay2, by2) - np.maximum(ay1, by1), 0.0)
    inter = iw * ih
    union = np.maximum(area_a, area_b) + (np.minimum(area_a, area_b) - inter)
    ious = inter / union

    top = -np.partition(-ious, 4, axis=1)[:, :5]
    top = -np.sort(-top, axis=1)
    return ((((top[:, 0] + top[:, 1]) + top[:, 2]) + top[:, 3]) + top[:, 4]) / 5.0


def sweep_top5(means, sigmas, k: int, z: float, min_size: float) -> np.ndarray:
    means = np.ascontiguousarray(means, dtype=np.float64).reshape(-1, 4)
    sigmas = np.ascontiguousarray(sigmas, dtype=np.float64).reshape(-1, 4)
    out = np.empty(means.shape[0], dtype=np.float64)
    # bound the (rows, k, 4) candidate tensor
    step = max(1, _CHUNK * 64 // max(k, 1))
    for start in range(0, means.shape[0], step):
        stop = start + step
        out[start:stop] = _sweep_chunk(means[start:stop], sigmas[start:stop], k, z, min_size)
    return out


def solve_square(cost):
    a = np.ascontiguousarray(cost, dtype=np.float64).tolist()
    n = len(a)
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = a[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    row_to_col = np.empty(n, dtype=np.intp)
    for j in range(1, n + 1):
        row_to_col[p[j] - 1] = j - 1
    return row_to_col, np.array(u[1:], dtype=np.float64), np.array(v[1:], dtype=np.float64)
