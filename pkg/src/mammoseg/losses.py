"""Training objective: binary cross-entropy plus soft Dice loss.

The soft Dice term uses the squared-denominator form
1 - (2*sum(p*g) + eps) / (sum(p^2) + sum(g^2) + eps) and is computed
batch-globally (sums run over every pixel of the batch).  With eps > 0 the
empty-prediction/empty-target case is exactly 0.
"""

from dataclasses import dataclass

import torch

PROB_CLAMP = 1e-7


@dataclass
class LossConfig:
    epsilon: float = 1.0
    bce_weight: float = 1.0
    dice_weight: float = 1.0

    def validate(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def _check_shapes(pred, target):
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {tuple(pred.shape)} vs target {tuple(target.shape)}")


def bce_loss(pred_probs, target, reduction="mean"):
    """Binary cross-entropy on probabilities clamped to [1e-7, 1 - 1e-7]."""
    _check_shapes(pred_probs, target)
    if reduction not in ("mean", "sum"):
        raise ValueError(f"reduction must be 'mean' or 'sum', got {reduction!r}")
    p = pred_probs.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
    g = target.to(p.dtype)
    elem = -(g * torch.log(p) + (1.0 - g) * torch.log(1.0 - p))
    return elem.mean() if reduction == "mean" else elem.sum()


def dice_loss(pred_probs, target, epsilon=1.0):
    """Soft Dice loss, differentiable in the predictions everywhere."""
    _check_shapes(pred_probs, target)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    p = pred_probs
    g = target.to(p.dtype)
    num = 2.0 * (p * g).sum() + epsilon
    den = (p * p).sum() + (g * g).sum() + epsilon
    return 1.0 - num / den


def combined_loss(pred_logits, target, config=None):
    """BCE + Dice on sigmoid(logits), weighted per config (defaults 1 and 1)."""
    if config is None:
        config = LossConfig()
    config.validate()
    _check_shapes(pred_logits, target)
    probs = torch.sigmoid(pred_logits)
    return config.bce_weight * bce_loss(probs, target) + config.dice_weight * dice_loss(
        probs, target, config.epsilon
    )
