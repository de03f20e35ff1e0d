"""Pixel-kernel backend selection.

The compiled Cython extension is preferred; the pure NumPy reference is
used when the extension is missing or when MAMMOSEG_PURE_PYTHON=1 is set.
Both backends implement the same three kernels with identical semantics:

    clahe(image, clip_limit, grid_h, grid_w)
    confusion_counts(prob, gt, threshold)
    sweep_counts(prob, gt, thresholds)
"""

import os

from . import reference

if os.environ.get("MAMMOSEG_PURE_PYTHON", "") == "1":
    _impl = reference
    BACKEND = "numpy"
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = reference
        BACKEND = "numpy"

clahe = _impl.clahe
confusion_counts = _impl.confusion_counts
sweep_counts = _impl.sweep_counts

__all__ = ["clahe", "confusion_counts", "sweep_counts", "BACKEND", "reference"]
