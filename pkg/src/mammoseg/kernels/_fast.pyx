# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pixel kernels: CLAHE and threshold confusion counting.

Mirrors ``reference.py`` operation for operation so both backends agree;
the counting kernels are exact, the CLAHE blend performs the identical
float64 arithmetic in the identical order.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF NBINS = 256


def clahe(image, double clip_limit, int grid_h, int grid_w):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] img = np.ascontiguousarray(image, dtype=np.float64)
    cdef int h = img.shape[0]
    cdef int w = img.shape[1]
    cdef int tile_h = (h + grid_h - 1) // grid_h
    cdef int tile_w = (w + grid_w - 1) // grid_w
    cdef int pad_h = tile_h * grid_h - h
    cdef int pad_w = tile_w * grid_w - w
    if pad_h or pad_w:
        img = np.pad(img, ((0, pad_h), (0, pad_w)), mode="edge")

    cdef int hp = img.shape[0]
    cdef int wp = img.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] idx_arr = np.empty((hp, wp), dtype=np.int32)
    cdef cnp.int32_t[:, :] idx = idx_arr
    cdef cnp.float64_t[:, :] im = img
    cdef int y, x, b
    for y in range(hp):
        for x in range(wp):
            b = <int>(im[y, x] * NBINS)
            if b < 0:
                b = 0
            elif b > NBINS - 1:
                b = NBINS - 1
            idx[y, x] = b

    # per-tile clipped histograms -> cumulative mapping in (0, 1]
    cdef int tile_px = tile_h * tile_w
    cdef int clip = <int>(clip_limit * tile_px / NBINS)
    if clip < 1:
        clip = 1
    cdef cnp.ndarray[cnp.float64_t, ndim=3] luts_arr = np.empty((grid_h, grid_w, NBINS), dtype=np.float64)
    cdef cnp.float64_t[:, :, :] luts = luts_arr
    cdef cnp.int64_t[::1] hist = np.zeros(NBINS, dtype=np.int64)
    cdef int ti, tj, y0, x0, k
    cdef cnp.int64_t excess, share, rem, cum
    for ti in range(grid_h):
        for tj in range(grid_w):
            y0 = ti * tile_h
            x0 = tj * tile_w
            hist[:] = 0
            for y in range(y0, y0 + tile_h):
                for x in range(x0, x0 + tile_w):
                    hist[idx[y, x]] += 1
            excess = 0
            for k in range(NBINS):
                if hist[k] > clip:
                    excess += hist[k] - clip
                    hist[k] = clip
            share = excess // NBINS
            rem = excess % NBINS
            cum = 0
            for k in range(NBINS):
                hist[k] += share
                if k < rem:
                    hist[k] += 1
                cum += hist[k]
                luts[ti, tj, k] = <double>cum / tile_px

    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((hp, wp), dtype=np.float64)
    cdef cnp.float64_t[:, :] out = out_arr
    cdef double ty, tx, fy, fx, l00, l01, l10, l11
    cdef int i0, j0, i0c, i1c, j0c, j1c
    for y in range(hp):
        ty = (y + 0.5) / tile_h - 0.5
        i0 = <int>ty
        if ty < 0 and ty != i0:
            i0 -= 1
        fy = ty - i0
        i0c = i0
        if i0c < 0:
            i0c = 0
        elif i0c > grid_h - 1:
            i0c = grid_h - 1
        i1c = i0 + 1
        if i1c < 0:
            i1c = 0
        elif i1c > grid_h - 1:
            i1c = grid_h - 1
        for x in range(wp):
            tx = (x + 0.5) / tile_w - 0.5
            j0 = <int>tx
            if tx < 0 and tx != j0:
                j0 -= 1
            fx = tx - j0
            j0c = j0
            if j0c < 0:
                j0c = 0
            elif j0c > grid_w - 1:
                j0c = grid_w - 1
            j1c = j0 + 1
            if j1c < 0:
                j1c = 0
            elif j1c > grid_w - 1:
                j1c = grid_w - 1
            b = idx[y, x]
            l00 = luts[i0c, j0c, b]
            l01 = luts[i0c, j1c, b]
            l10 = luts[i1c, j0c, b]
            l11 = luts[i1c, j1c, b]
            out[y, x] = (
                (1.0 - fy) * (1.0 - fx) * l00
                + (1.0 - fy) * fx * l01
                + fy * (1.0 - fx) * l10
                + fy * fx * l11
            )
    if pad_h or pad_w:
        return out_arr[:h, :w].copy()
    return out_arr


def confusion_counts(prob, gt, double threshold):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(prob, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] g = (np.ascontiguousarray(gt).ravel() != 0).astype(np.uint8)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i
    cdef cnp.int64_t tp = 0, fp = 0, fn = 0
    cdef int pred
    for i in range(n):
        pred = p[i] >= threshold
        if g[i]:
            if pred:
                tp += 1
            else:
                fn += 1
        elif pred:
            fp += 1
    return int(tp), int(fp), int(fn), int(n - tp - fp - fn)


def sweep_counts(prob, gt, thresholds):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.ascontiguousarray(thresholds, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(prob, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] g = (np.ascontiguousarray(gt).ravel() != 0).astype(np.uint8)
    cdef Py_ssize_t m = t.shape[0]
    cdef Py_ssize_t n = p.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] c1 = np.zeros(m + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] c0 = np.zeros(m + 1, dtype=np.int64)
    cdef Py_ssize_t i, j, lo, hi, mid
    cdef double v
    cdef cnp.int64_t n1 = 0, n0 = 0
    for i in range(n):
        v = p[i]
        # j = number of thresholds <= v  (bisect right)
        lo = 0
        hi = m
        while lo < hi:
            mid = (lo + hi) >> 1
            if t[mid] <= v:
                lo = mid + 1
            else:
                hi = mid
        j = lo
        if g[i]:
            c1[j] += 1
            n1 += 1
        else:
            c0[j] += 1
            n0 += 1
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((m, 4), dtype=np.int64)
    cdef cnp.int64_t suf1 = 0, suf0 = 0
    cdef Py_ssize_t k
    for k in range(m - 1, -1, -1):
        suf1 += c1[k + 1]
        suf0 += c0[k + 1]
        out[k, 0] = suf1
        out[k, 1] = suf0
        out[k, 2] = n1 - suf1
        out[k, 3] = n0 - suf0
    return out
