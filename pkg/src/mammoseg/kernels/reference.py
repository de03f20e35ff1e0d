"""Pure-NumPy reference implementations of the pixel kernels.

These are the fallback backend used when the compiled extension is not
available.  The compiled backend in ``_fast.pyx`` mirrors the arithmetic
here operation for operation, so both produce identical results (exact
for the integer counting kernels, bitwise for CLAHE in practice).
"""

import numpy as np

NBINS = 256


def _tile_luts(idx, grid_h, grid_w, tile_h, tile_w, clip_limit):
    """Per-tile clipped-histogram equalization lookup tables.

    idx: (grid_h*tile_h, grid_w*tile_w) int32 bin indices (padded image).
    Returns float64 luts of shape (grid_h, grid_w, NBINS) with values in (0, 1].
    """
    tile_px = tile_h * tile_w
    clip = max(1, int(clip_limit * tile_px / NBINS))
    luts = np.empty((grid_h, grid_w, NBINS), dtype=np.float64)
    for ti in range(grid_h):
        for tj in range(grid_w):
            tile = idx[ti * tile_h:(ti + 1) * tile_h, tj * tile_w:(tj + 1) * tile_w]
            hist = np.bincount(tile.ravel(), minlength=NBINS).astype(np.int64)
            excess = int(np.maximum(hist - clip, 0).sum())
            hist = np.minimum(hist, clip)
            hist += excess // NBINS
            hist[: excess % NBINS] += 1
            luts[ti, tj] = np.cumsum(hist, dtype=np.float64) / tile_px
    return luts


def clahe(image, clip_limit, grid_h, grid_w):
    """Contrast-limited adaptive histogram equalization on a [0,1] image.

    Per-tile histograms are clipped at ``clip_limit`` times the uniform bin
    count, the excess is redistributed evenly, and each pixel is remapped
    by bilinear interpolation between the four surrounding tile mappings.
    Output values stay in [0, 1] and each tile mapping is monotone.
    """
    img = np.ascontiguousarray(image, dtype=np.float64)
    h, w = img.shape
    tile_h = -(-h // grid_h)  # ceil division
    tile_w = -(-w // grid_w)
    pad_h = tile_h * grid_h - h
    pad_w = tile_w * grid_w - w
    if pad_h or pad_w:
        img = np.pad(img, ((0, pad_h), (0, pad_w)), mode="edge")

    idx = (img * NBINS).astype(np.int32)
    np.clip(idx, 0, NBINS - 1, out=idx)
    luts = _tile_luts(idx, grid_h, grid_w, tile_h, tile_w, clip_limit)

    hp, wp = img.shape
    ty = (np.arange(hp, dtype=np.float64) + 0.5) / tile_h - 0.5
    tx = (np.arange(wp, dtype=np.float64) + 0.5) / tile_w - 0.5
    i0 = np.floor(ty).astype(np.int64)
    j0 = np.floor(tx).astype(np.int64)
    fy = ty - i0
    fx = tx - j0
    i0c = np.clip(i0, 0, grid_h - 1)
    i1c = np.clip(i0 + 1, 0, grid_h - 1)
    j0c = np.clip(j0, 0, grid_w - 1)
    j1c = np.clip(j0 + 1, 0, grid_w - 1)

    flat = luts.reshape(grid_h * grid_w, NBINS)
    ii0 = i0c[:, None]
    ii1 = i1c[:, None]
    jj0 = j0c[None, :]
    jj1 = j1c[None, :]
    l00 = flat[ii0 * grid_w + jj0, idx]
    l01 = flat[ii0 * grid_w + jj1, idx]
    l10 = flat[ii1 * grid_w + jj0, idx]
    l11 = flat[ii1 * grid_w + jj1, idx]

    wy = fy[:, None]
    wx = fx[None, :]
    out = (
        (1.0 - wy) * (1.0 - wx) * l00
        + (1.0 - wy) * wx * l01
        + wy * (1.0 - wx) * l10
        + wy * wx * l11
    )
    return out[:h, :w]


def confusion_counts(prob, gt, threshold):
    """Pixel confusion counts of (prob >= threshold) against a binary mask.

    Returns (tp, fp, fn, tn) as Python ints.
    """
    pred = prob >= threshold
    g = gt != 0
    tp = int(np.count_nonzero(pred & g))
    fp = int(np.count_nonzero(pred & ~g))
    fn = int(np.count_nonzero(~pred & g))
    tn = pred.size - tp - fp - fn
    return tp, fp, fn, tn


def sweep_counts(prob, gt, thresholds):
    """Confusion counts of one probability map at many thresholds.

    ``thresholds`` must be strictly increasing.  A pixel predicts positive at
    threshold t iff prob >= t, so positives are nested downward in t; the
    kernel exploits this with a single bucketing pass instead of m scans.
    Returns an (m, 4) int64 array of rows (tp, fp, fn, tn).
    """
    t = np.asarray(thresholds, dtype=np.float64)
    m = t.shape[0]
    p = np.asarray(prob, dtype=np.float64).ravel()
    g = np.asarray(gt).ravel() != 0
    # bucket j = number of thresholds <= p; positive at t_k iff j >= k+1
    j = np.searchsorted(t, p, side="right")
    c1 = np.bincount(j[g], minlength=m + 1).astype(np.int64)
    c0 = np.bincount(j[~g], minlength=m + 1).astype(np.int64)
    n1 = int(c1.sum())
    n0 = int(c0.sum())
    suf1 = np.cumsum(c1[::-1])[::-1]
    suf0 = np.cumsum(c0[::-1])[::-1]
    out = np.empty((m, 4), dtype=np.int64)
    for k in range(m):
        tp = suf1[k + 1]
        fp = suf0[k + 1]
        out[k, 0] = tp
        out[k, 1] = fp
        out[k, 2] = n1 - tp
        out[k, 3] = n0 - fp
    return out
