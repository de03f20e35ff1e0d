"""Parameter and FLOP accounting.

Convention: FLOPs = 2 x multiply-accumulates for conv/linear layers, plus
bias adds and elementwise work (batchnorm, activations, pooling, bilinear
interpolation, residual adds, attention gating).  Counts come from forward
hooks on a dummy pass, so they reflect the exact execution at the stated
input shape.
"""

from dataclasses import dataclass

import torch
import torch.nn as nn
import torchvision.models.resnet as tv_resnet
import torchvision.models.mobilenetv2 as tv_mbv2

from .blocks import SCSE, InvertedResidual
from .fastscnn import FastSCNN, FeatureFusion, PyramidPooling


@dataclass
class ComplexityReport:
    params_total: int
    flops_total: int
    input_shape: tuple  # (channels, height, width)


def count_params(model):
    """Total trainable parameter count."""
    return sum(p.numel() for p in model.parameters() if p.requires_grad)


def _conv_flops(module, inputs, output):
    out_elems = output.numel()
    per_position = module.in_channels // module.groups
    kh, kw = module.kernel_size
    macs = out_elems * per_position * kh * kw
    flops = 2 * macs
    if module.bias is not None:
        flops += out_elems
    return flops


def _linear_flops(module, inputs, output):
    positions = output.numel() // module.out_features
    flops = 2 * positions * module.in_features * module.out_features
    if module.bias is not None:
        flops += output.numel()
    return flops


def _bn_flops(module, inputs, output):
    return 2 * output.numel()  # scale and shift

def _act_flops(module, inputs, output):
    return output.numel()

def _maxpool_flops(module, inputs, output):
    k = module.kernel_size
    k2 = k * k if isinstance(k, int) else k[0] * k[1]
    return (k2 - 1) * output.numel()

def _adaptive_pool_flops(module, inputs, output):
    return inputs[0].numel() + output.numel()  # window sums plus divisions

def _upsample_flops(module, inputs, output):
    return 0 if module.mode == "nearest" else 7 * output.numel()

def _zero_flops(module, inputs, output):
    return 0


# per-call FLOPs for leaf layer types
_LEAF_RULES = {
    nn.Conv2d: _conv_flops,
    nn.Linear: _linear_flops,
    nn.BatchNorm2d: _bn_flops,
    nn.ReLU: _act_flops,
    nn.ReLU6: _act_flops,
    nn.Sigmoid: _act_flops,
    nn.MaxPool2d: _maxpool_flops,
    nn.AdaptiveAvgPool2d: _adaptive_pool_flops,
    nn.Upsample: _upsample_flops,
    nn.Identity: _zero_flops,
    nn.Dropout: _zero_flops,
}

# functional work inside composite blocks that hooks on leaves cannot see
def _inverted_residual_extra(module, inputs, output):
    return output.numel() if module.use_residual else 0

def _basicblock_extra(module, inputs, output):
    return output.numel()  # the residual add

def _tv_inverted_residual_extra(module, inputs, output):
    return output.numel() if module.use_res_connect else 0

def _scse_extra(module, inputs, output):
    return 3 * output.numel()  # two gate multiplies plus the add

def _ffm_extra(module, inputs, output):
    upsampled = inputs[1].shape[1] * output.shape[-2] * output.shape[-1]
    return output.numel() + 7 * upsampled  # branch add + context bilinear upsample

def _ppm_extra(module, inputs, output):
    branch_ch = output.shape[1] // 4
    spatial = output.shape[-2] * output.shape[-1]
    return 7 * len(module.pool_sizes) * branch_ch * spatial  # bilinear upsamples

def _fastscnn_extra(module, inputs, output):
    return 7 * output.numel()  # final bilinear upsample of the logits


_EXTRA_RULES = {
    InvertedResidual: _inverted_residual_extra,
    tv_resnet.BasicBlock: _basicblock_extra,
    tv_mbv2.InvertedResidual: _tv_inverted_residual_extra,
    SCSE: _scse_extra,
    FeatureFusion: _ffm_extra,
    PyramidPooling: _ppm_extra,
    FastSCNN: _fastscnn_extra,
}


def estimate_flops(model, input_shape):
    """FLOPs of one forward pass at ``input_shape`` = (channels, h, w).

    Raises if the model contains a parametric leaf layer with no counting
    rule (silent undercounting is worse than failing).
    """
    c, h, w = input_shape
    totals = {"flops": 0}
    handles = []

    def make_hook(rule):
        def hook(module, inputs, output):
            totals["flops"] += int(rule(module, inputs, output))
        return hook

    def lookup(rules, module):
        for base in type(module).__mro__:  # match subclasses like SegmentationHead
            if base in rules:
                return rules[base]
        return None

    for module in model.modules():
        rule = lookup(_LEAF_RULES, module) or lookup(_EXTRA_RULES, module)
        if rule is not None:
            handles.append(module.register_forward_hook(make_hook(rule)))
            continue
        if not list(module.children()) and any(p.requires_grad for p in module.parameters()):
            raise ValueError(f"no FLOP rule for parametric layer {type(module).__name__}")

    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            model(torch.zeros(1, c, h, w))
    finally:
        for handle in handles:
            handle.remove()
        if was_training:
            model.train()
    return ComplexityReport(
        params_total=count_params(model),
        flops_total=totals["flops"],
        input_shape=tuple(input_shape),
    )
