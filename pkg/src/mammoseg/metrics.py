"""Thresholding and Dice/IoU/Recall from pixel confusion counts.

Scores are per image (macro averaging).  Degenerate cases are explicit:
when a score's denominator is empty the configured empty policy decides
between 1.0, 0.0, and exclusion from aggregation.
"""

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

EMPTY_POLICIES = ("one", "zero", "exclude")


@dataclass
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn


@dataclass
class MetricPolicies:
    """Empty-denominator policy per metric.

    Defaults: both-empty masks count as perfect agreement for Dice/IoU,
    while Recall is undefined on an empty ground truth and excluded.
    """

    dice: str = "one"
    iou: str = "one"
    recall: str = "exclude"

    def validate(self):
        for name in ("dice", "iou", "recall"):
            if getattr(self, name) not in EMPTY_POLICIES:
                raise ValueError(f"{name} policy must be one of {EMPTY_POLICIES}")


@dataclass
class MetricRecord:
    sample_id: str
    threshold: float
    counts: ConfusionCounts
    dice: Optional[float]
    iou: Optional[float]
    recall: Optional[float]


@dataclass
class AggregateStat:
    mean: Optional[float]
    std: Optional[float]
    n_included: int


def binarize(prob_map, threshold):
    """prob >= threshold convention (fixed for bit-exact reproducibility)."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0,1), got {threshold}")
    return (np.asarray(prob_map) >= threshold).astype(np.uint8)


def confusion(pred_mask, gt_mask):
    pred = np.asarray(pred_mask)
    gt = np.asarray(gt_mask)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs gt {gt.shape}")
    p = pred != 0
    g = gt != 0
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = int(p.size - tp - fp - fn)
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def _empty_value(policy):
    if policy == "one":
        return 1.0
    if policy == "zero":
        return 0.0
    if policy == "exclude":
        return None
    raise ValueError(f"unknown empty policy {policy!r}")


def dice_score(counts, empty_policy="one"):
    denom = 2 * counts.tp + counts.fp + counts.fn
    if counts.tp + counts.fp + counts.fn == 0:
        return _empty_value(empty_policy)
    return 2.0 * counts.tp / denom


def iou_score(counts, empty_policy="one"):
    denom = counts.tp + counts.fp + counts.fn
    if denom == 0:
        return _empty_value(empty_policy)
    return counts.tp / denom


def recall_score(counts, empty_policy="exclude"):
    denom = counts.tp + counts.fn
    if denom == 0:
        return _empty_value(empty_policy)
    return counts.tp / denom


def record_from_counts(sample_id, threshold, counts, policies=None):
    if policies is None:
        policies = MetricPolicies()
    policies.validate()
    return MetricRecord(
        sample_id=sample_id,
        threshold=threshold,
        counts=counts,
        dice=dice_score(counts, policies.dice),
        iou=iou_score(counts, policies.iou),
        recall=recall_score(counts, policies.recall),
    )


def _agg(values):
    vals = [v for v in values if v is not None]
    n = len(vals)
    if n == 0:
        return AggregateStat(mean=None, std=None, n_included=0)
    mean = sum(vals) / n
    if n == 1:
        return AggregateStat(mean=mean, std=0.0, n_included=1)
    var = sum((v - mean) ** 2 for v in vals) / (n - 1)
    return AggregateStat(mean=mean, std=math.sqrt(var), n_included=n)


def aggregate(records):
    """Mean and sample standard deviation per metric over defined values."""
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    return {
        "dice": _agg(r.dice for r in records),
        "iou": _agg(r.iou for r in records),
        "recall": _agg(r.recall for r in records),
    }


def _fmt(value):
    return "" if value is None else f"{value:.6f}"


def write_records_csv(records, path, config_hash=None):
    with open(path, "w", newline="") as fh:
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "threshold", "tp", "fp", "fn", "tn", "dice", "iou", "recall"])
        for r in records:
            c = r.counts
            writer.writerow(
                [r.sample_id, f"{r.threshold:g}", c.tp, c.fp, c.fn, c.tn,
                 _fmt(r.dice), _fmt(r.iou), _fmt(r.recall)]
            )
