"""Corpus ingestion, k-fold partitioning, and phantom corpus synthesis.

A corpus directory holds ``images/`` and ``masks/`` with matching
filenames.  Images may be 8- or 16-bit PNG/TIFF; intensities are rescaled
to [0, 1] by the maximum representable value of the stored bit depth.
An image without a mask file is a normal case and gets an all-zero mask.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

IMAGE_EXTENSIONS = (".png", ".tif", ".tiff")
CORPUS_ROLES = ("train", "external-test")


class CorpusError(Exception):
    """Fatal ingestion failure (missing directory, duplicate ids)."""


class SampleError(CorpusError):
    """Per-sample ingestion failure; carries the offending sample id."""

    def __init__(self, sample_id, message):
        super().__init__(f"sample '{sample_id}': {message}")
        self.sample_id = sample_id


@dataclass
class Sample:
    """One grayscale image with its binary lesion mask."""

    id: str
    image: np.ndarray  # float32 (H, W)
    mask: np.ndarray   # uint8 (H, W), values {0, 1}


@dataclass
class Corpus:
    name: str
    samples: list
    role: str = "train"

    def __len__(self):
        return len(self.samples)

    def ids(self):
        return [s.id for s in self.samples]


@dataclass
class FoldAssignment:
    """Deterministic sample-id -> fold-index map for k-fold CV."""

    k: int
    assignment: dict = field(default_factory=dict)

    def fold_ids(self, fold):
        return sorted(i for i, f in self.assignment.items() if f == fold)

    def val_ids(self, fold):
        return self.fold_ids(fold)

    def train_ids(self, fold):
        return sorted(i for i, f in self.assignment.items() if f != fold)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "fold"])
            for sid in sorted(self.assignment):
                writer.writerow([sid, self.assignment[sid]])

    @classmethod
    def from_csv(cls, path):
        assignment = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                assignment[row["id"]] = int(row["fold"])
        k = max(assignment.values()) + 1 if assignment else 0
        return cls(k=k, assignment=assignment)


def _load_gray(path, sample_id):
    try:
        with Image.open(path) as im:
            if im.mode in ("RGB", "RGBA", "P", "LA"):
                im = im.convert("L")
            arr = np.asarray(im)
    except OSError as exc:
        raise SampleError(sample_id, f"unreadable file {path}: {exc}") from exc
    if arr.ndim != 2:
        raise SampleError(sample_id, f"expected 2-D grayscale data in {path}, got shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr, 255.0
    if arr.dtype == np.uint16:
        return arr, 65535.0
    if arr.dtype == np.int32:
        # PIL mode "I": 16-bit sources commonly land here
        if arr.min() < 0 or arr.max() > 65535:
            raise SampleError(sample_id, f"integer data in {path} outside 16-bit range")
        return arr.astype(np.uint16), 65535.0
    raise SampleError(sample_id, f"unsupported pixel type {arr.dtype} in {path}")


def load_corpus(root_path, role="train"):
    """Load a corpus from ``root/images`` and ``root/masks``.

    Samples are sorted lexicographically by id (the image filename stem).
    """
    if role not in CORPUS_ROLES:
        raise ValueError(f"role must be one of {CORPUS_ROLES}, got {role!r}")
    root = Path(root_path)
    images_dir = root / "images"
    masks_dir = root / "masks"
    if not images_dir.is_dir():
        raise CorpusError(f"missing images directory: {images_dir}")

    image_files = sorted(
        (p for p in images_dir.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS),
        key=lambda p: p.stem,
    )
    if not image_files:
        raise CorpusError(f"no image files under {images_dir}")

    mask_files = {}
    if masks_dir.is_dir():
        for p in masks_dir.iterdir():
            if p.suffix.lower() in IMAGE_EXTENSIONS:
                mask_files.setdefault(p.stem, p)

    samples = []
    seen = set()
    for img_path in image_files:
        sid = img_path.stem
        if sid in seen:
            raise CorpusError(f"duplicate sample id '{sid}' under {images_dir}")
        seen.add(sid)
        raw, max_value = _load_gray(img_path, sid)
        image = (raw.astype(np.float32) / np.float32(max_value)).astype(np.float32)
        mask_path = mask_files.get(sid)
        if mask_path is None:
            mask = np.zeros(image.shape, dtype=np.uint8)
        else:
            raw_mask, _ = _load_gray(mask_path, sid)
            if raw_mask.shape != image.shape:
                raise SampleError(
                    sid, f"mask shape {raw_mask.shape} does not match image shape {image.shape}"
                )
            mask = (raw_mask > 0).astype(np.uint8)
        samples.append(Sample(id=sid, image=image, mask=mask))
    return Corpus(name=root.name, samples=samples, role=role)


def split_kfold(corpus, k, seed):
    """Random balanced partition of corpus ids into k folds.

    Deterministic in (corpus ids, k, seed); fold sizes differ by at most 1.
    """
    n = len(corpus)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds corpus size {n}")
    ids = sorted(corpus.ids())
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
    assignment = {}
    pos = 0
    for fold, size in enumerate(sizes):
        for j in order[pos:pos + size]:
            assignment[ids[j]] = fold
        pos += size
    return FoldAssignment(k=k, assignment=assignment)


def _ellipse_support(side, cy, cx, ry, rx, theta):
    y, x = np.mgrid[0:side, 0:side].astype(np.float64)
    yr = (y - cy) * np.cos(theta) - (x - cx) * np.sin(theta)
    xr = (y - cy) * np.sin(theta) + (x - cx) * np.cos(theta)
    r2 = (yr / ry) ** 2 + (xr / rx) ** 2
    return r2 <= 1.0, r2


def generate_phantom_corpus(
    n,
    side,
    seed,
    normal_fraction=0.3,
    lesion_contrast=0.35,
    max_lesions=3,
    name="phantom",
    role="train",
):
    """Synthesize a corpus of breast-like phantoms with blob lesions.

    Each image holds a bright half-elliptical tissue region on a dark
    background; lesions are brighter rotated-ellipse blobs whose support is
    exactly the mask foreground.  ``normal_fraction`` of the samples
    (rounded to a count) carry no lesions.  Total lesion area per image is
    capped below 10% of the pixels.  Bitwise deterministic in the seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if side < 64:
        raise ValueError("side must be >= 64")
    rng = np.random.default_rng(seed)
    n_normal = int(round(normal_fraction * n))
    normal_idx = set(rng.choice(n, size=n_normal, replace=False).tolist())

    samples = []
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    for i in range(n):
        # breast: half-ellipse anchored on the left edge
        cy = side * rng.uniform(0.42, 0.58)
        ry = side * rng.uniform(0.38, 0.48)
        rx = side * rng.uniform(0.55, 0.80)
        r2 = ((yy - cy) / ry) ** 2 + (xx / rx) ** 2
        breast = r2 <= 1.0
        image = rng.normal(0.04, 0.01, size=(side, side))
        tissue = 0.30 + 0.25 * np.clip(1.0 - r2, 0.0, 1.0)
        image[breast] = tissue[breast] + rng.normal(0.0, 0.03, size=int(breast.sum()))

        mask = np.zeros((side, side), dtype=np.uint8)
        if i not in normal_idx:
            n_lesions = int(rng.integers(1, max_lesions + 1))
            area_budget = 0.09 * side * side
            for _ in range(n_lesions):
                placed = False
                for _attempt in range(20):
                    ly = rng.uniform(0.15 * side, 0.85 * side)
                    lx = rng.uniform(0.05 * side, 0.70 * side)
                    if ((ly - cy) / ry) ** 2 + (lx / rx) ** 2 < 0.75:
                        placed = True
                        break
                if not placed:
                    continue
                lry = side * rng.uniform(0.10, 0.16)
                lrx = side * rng.uniform(0.10, 0.16)
                theta = rng.uniform(0.0, np.pi)
                support, lr2 = _ellipse_support(side, ly, lx, lry, lrx, theta)
                if mask.sum() + support.sum() > area_budget:
                    continue
                bump = lesion_contrast * np.sqrt(np.clip(1.0 - lr2, 0.0, 1.0))
                image[support] += bump[support]
                mask[support] = 1
        image = np.clip(image, 0.0, 1.0).astype(np.float32)
        samples.append(Sample(id=f"{name}_{i:04d}", image=image, mask=mask))
    return Corpus(name=name, samples=samples, role=role)


def write_corpus(corpus, root_path):
    """Write a corpus to disk in the ``images/`` + ``masks/`` layout.

    Images are stored as 16-bit PNG, masks as 8-bit {0, 255} PNG.  Normal
    samples (all-zero masks) get no mask file, mirroring how unannotated
    cases appear in real corpora.
    """
    root = Path(root_path)
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)
    for s in corpus.samples:
        arr = np.clip(np.rint(s.image.astype(np.float64) * 65535.0), 0, 65535).astype(np.uint16)
        Image.fromarray(arr, mode="I;16").save(root / "images" / f"{s.id}.png")
        if s.mask.any():
            Image.fromarray((s.mask * 255).astype(np.uint8), mode="L").save(
                root / "masks" / f"{s.id}.png"
            )
    return root
