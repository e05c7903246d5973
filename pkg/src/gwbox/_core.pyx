# cython: language_level=3
"""Compiled hot loops.

Two kernels: the confidence-interval IoU sweep behind localization
uncertainty (O(N k)) and the square shortest-augmenting-path assignment solver
(O(n^3)). Floating-point operations are written in the same order as the
pure-Python versions in ``_fallback`` so both backends agree bitwise; the
extension is built with ``-ffp-contract=off`` to keep it that way.
"""

import numpy as np

from libc.math cimport INFINITY


cdef inline double _iou(double acx, double acy, double aw, double ah,
                        double bcx, double bcy, double bw, double bh) noexcept nogil:
    cdef double ax1 = acx - aw / 2.0
    cdef double ay1 = acy - ah / 2.0
    cdef double ax2 = acx + aw / 2.0
    cdef double ay2 = acy + ah / 2.0
    cdef double bx1 = bcx - bw / 2.0
    cdef double by1 = bcy - bh / 2.0
    cdef double bx2 = bcx + bw / 2.0
    cdef double by2 = bcy + bh / 2.0
    cdef double area_a = (ax2 - ax1) * (ay2 - ay1)
    cdef double area_b = (bx2 - bx1) * (by2 - by1)
    cdef double iw = (bx2 if bx2 < ax2 else ax2) - (bx1 if bx1 > ax1 else ax1)
    cdef double ih = (by2 if by2 < ay2 else ay2) - (by1 if by1 > ay1 else ay1)
    if iw < 0.0:
        iw = 0.0
    if ih < 0.0:
        ih = 0.0
    cdef double inter = iw * ih
    cdef double big = area_a if area_a > area_b else area_b
    cdef double small = area_b if area_a > area_b else area_a
    cdef double union = big + (small - inter)
    return inter / union


cdef double _sweep_one(const double* mu, const double* sd, Py_ssize_t k,
                       double z, double min_size) noexcept nogil:
    cdef double lo[4]
    cdef double width[4]
    cdef double c[4]
    cdef double top[5]
    cdef Py_ssize_t kept = 0
    cdef Py_ssize_t i, j, pos
    cdef double frac, v
    for j in range(4):
        lo[j] = mu[j] - z * sd[j]
        width[j] = (mu[j] + z * sd[j]) - lo[j]
    for i in range(1, k + 1):
        frac = (2.0 * i - 1.0) / (2.0 * k)
        for j in range(4):
            c[j] = lo[j] + frac * width[j]
        if c[2] < min_size:
            c[2] = min_size
        if c[3] < min_size:
            c[3] = min_size
        v = _iou(mu[0], mu[1], mu[2], mu[3], c[0], c[1], c[2], c[3])
        # stable descending insertion: ties keep the earlier candidate first
        pos = kept
        while pos > 0 and top[pos - 1] < v:
            pos -= 1
        if pos < 5:
            j = kept if kept < 5 else 4
            while j > pos:
                top[j] = top[j - 1]
                j -= 1
            top[pos] = v
            if kept < 5:
                kept += 1
    return ((((top[0] + top[1]) + top[2]) + top[3]) + top[4]) / 5.0


def sweep_top5(means, sigmas, Py_ssize_t k, double z, double min_size):
    """Mean of the five largest candidate IoUs for every row of ``means``/``sigmas``."""
    cdef const double[:, ::1] m = np.ascontiguousarray(means, dtype=np.float64)
    cdef const double[:, ::1] s = np.ascontiguousarray(sigmas, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t r
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for r in range(n):
            o[r] = _sweep_one(&m[r, 0], &s[r, 0], k, z, min_size)
    return out


def solve_square(cost):
    """Minimum-cost perfect matching of a square matrix.

    Returns ``(row_to_col, u, v)`` where ``u``/``v`` are feasible dual
    potentials: ``cost[i, j] - u[i] - v[j] >= 0`` with equality on the matching.
    """
    cdef const double[:, ::1] a = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    u_arr = np.zeros(n + 1, dtype=np.float64)
    v_arr = np.zeros(n + 1, dtype=np.float64)
    minv_arr = np.empty(n + 1, dtype=np.float64)
    p_arr = np.zeros(n + 1, dtype=np.intp)
    way_arr = np.zeros(n + 1, dtype=np.intp)
    used_arr = np.zeros(n + 1, dtype=np.uint8)
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef double[::1] minv = minv_arr
    cdef Py_ssize_t[::1] p = p_arr
    cdef Py_ssize_t[::1] way = way_arr
    cdef unsigned char[::1] used = used_arr
    cdef Py_ssize_t i, j, i0, j0, j1
    cdef double delta, cur
    with nogil:
        for i in range(1, n + 1):
            p[0] = i
            j0 = 0
            for j in range(n + 1):
                minv[j] = INFINITY
                used[j] = 0
            while True:
                used[j0] = 1
                i0 = p[j0]
                delta = INFINITY
                j1 = 0
                for j in range(1, n + 1):
                    if not used[j]:
                        cur = a[i0 - 1, j - 1] - u[i0] - v[j]
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
        row_to_col[p_arr[j] - 1] = j - 1
    return row_to_col, u_arr[1:].copy(), v_arr[1:].copy()
