"""Deterministic resizing/standardization and stochastic training augmentation.

Pipeline order for training batches: augment (CLAHE on the [0,1] image,
flips/rotation on image+mask) -> resize -> per-image standardization.
Validation and test batches only resize and standardize.
"""

import zlib
from dataclasses import dataclass
from typing import Optional

import cv2
import numpy as np

from . import kernels
from .data import Sample


@dataclass
class AugmentPolicy:
    clahe_probability: float = 0.5
    clahe_clip_limit: float = 2.0
    clahe_tile_grid: tuple = (8, 8)
    hflip_probability: float = 0.5
    vflip_probability: float = 0.5
    rotation_max_degrees: float = 15.0
    seed: Optional[int] = None  # stream seed override; pipelines default to the train seed

    def validate(self):
        for name in ("clahe_probability", "hflip_probability", "vflip_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {p}")
        if self.clahe_clip_limit <= 0:
            raise ValueError("clahe_clip_limit must be positive")
        if self.rotation_max_degrees < 0:
            raise ValueError("rotation_max_degrees must be non-negative")

    def is_identity(self):
        return (
            self.clahe_probability == 0.0
            and self.hflip_probability == 0.0
            and self.vflip_probability == 0.0
            and self.rotation_max_degrees == 0.0
        )


IDENTITY_POLICY = AugmentPolicy(
    clahe_probability=0.0,
    hflip_probability=0.0,
    vflip_probability=0.0,
    rotation_max_degrees=0.0,
)


def standardize(image):
    """Per-image zero-mean unit-variance; constant images map to zeros."""
    img = image.astype(np.float32)
    mean = float(img.mean())
    std = float(img.std())
    if std < 1e-7:
        return np.zeros_like(img)
    return (img - mean) / std


def resize_and_normalize(sample, side):
    """Resize to side x side (bilinear image / nearest mask) and standardize."""
    if side < 32:
        raise ValueError(f"side must be >= 32, got {side}")
    image = cv2.resize(sample.image.astype(np.float32), (side, side), interpolation=cv2.INTER_LINEAR)
    mask = cv2.resize(sample.mask, (side, side), interpolation=cv2.INTER_NEAREST)
    return Sample(id=sample.id, image=standardize(image), mask=mask.astype(np.uint8))


def apply_clahe(image, clip_limit=2.0, tile_grid=(8, 8)):
    """Contrast-limited adaptive histogram equalization on a [0,1] image."""
    if clip_limit <= 0:
        raise ValueError("clip_limit must be positive")
    gh, gw = int(tile_grid[0]), int(tile_grid[1])
    if gh < 1 or gw < 1:
        raise ValueError("tile_grid dimensions must be positive")
    out = kernels.clahe(np.asarray(image, dtype=np.float64), float(clip_limit), gh, gw)
    return out.astype(image.dtype if np.issubdtype(np.asarray(image).dtype, np.floating) else np.float64)


def _rotate(arr, angle_degrees, interpolation):
    h, w = arr.shape
    matrix = cv2.getRotationMatrix2D((w / 2.0 - 0.5, h / 2.0 - 0.5), angle_degrees, 1.0)
    return cv2.warpAffine(
        arr, matrix, (w, h),
        flags=interpolation,
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=0,
    )


def augment(sample, policy, rng):
    """Stochastic training transform.

    CLAHE is photometric and touches the image only; flips and rotation are
    applied identically to image and mask (nearest-neighbor resampling keeps
    the mask binary, exposed corners fill with background).  Draw order is
    fixed: CLAHE gate, hflip gate, vflip gate, rotation angle.
    """
    policy.validate()
    image = sample.image
    mask = sample.mask
    if rng.random() < policy.clahe_probability:
        image = apply_clahe(image, policy.clahe_clip_limit, policy.clahe_tile_grid)
    if rng.random() < policy.hflip_probability:
        image = image[:, ::-1]
        mask = mask[:, ::-1]
    if rng.random() < policy.vflip_probability:
        image = image[::-1, :]
        mask = mask[::-1, :]
    if policy.rotation_max_degrees > 0:
        angle = rng.uniform(-policy.rotation_max_degrees, policy.rotation_max_degrees)
        image = _rotate(np.ascontiguousarray(image, dtype=np.float32), angle, cv2.INTER_LINEAR)
        mask = _rotate(np.ascontiguousarray(mask), angle, cv2.INTER_NEAREST)
    return Sample(
        id=sample.id,
        image=np.ascontiguousarray(image, dtype=np.float32),
        mask=np.ascontiguousarray(mask, dtype=np.uint8),
    )


def sample_rng(seed, sample_id, epoch=0):
    """Per-sample random stream so augmentation is order-independent."""
    tag = zlib.crc32(sample_id.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, epoch, tag]))
