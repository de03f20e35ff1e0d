"""Feature-pyramid encoders returning maps at strides 2, 4, 8, 16, 32.

ResNet and MobileNetV2 wrap torchvision; EfficientNet-Lite0 is built here
(no torchvision equivalent).  All encoders take single-channel input by
default; an ImageNet warm start is attempted when requested and falls back
to random init with a warning if the weights cannot be fetched.
"""

import warnings

import torch
import torch.nn as nn
import torchvision.models as tvm

from .blocks import ConvBNReLU, InvertedResidual


class PretrainedWeightsUnavailableWarning(UserWarning):
    """ImageNet weights could not be loaded; encoder keeps random init."""


def adapt_first_layer(pretrained_weights, target_channels):
    """Adapt a 3-channel input conv kernel to ``target_channels``.

    For a single channel the three input slices are summed, which makes the
    adapted layer respond to a grayscale image exactly as the original layer
    responds to that image replicated across RGB.
    """
    if target_channels < 1:
        raise ValueError("target_channels must be >= 1")
    w = pretrained_weights
    if w.shape[1] != 3:
        raise ValueError(f"expected a 3-input-channel kernel, got shape {tuple(w.shape)}")
    if target_channels == 3:
        return w.clone()
    if target_channels == 1:
        return w.sum(dim=1, keepdim=True)
    mean = w.mean(dim=1, keepdim=True)
    return mean.repeat(1, target_channels, 1, 1) * (3.0 / target_channels)


def _replace_input_conv(conv, in_channels):
    if conv.in_channels == in_channels:
        return conv
    new = nn.Conv2d(
        in_channels,
        conv.out_channels,
        kernel_size=conv.kernel_size,
        stride=conv.stride,
        padding=conv.padding,
        bias=conv.bias is not None,
    )
    with torch.no_grad():
        new.weight.copy_(adapt_first_layer(conv.weight, in_channels))
        if conv.bias is not None:
            new.bias.copy_(conv.bias)
    return new


def _tv_backbone(factory, weights, name, pretrained):
    if pretrained:
        try:
            return factory(weights=weights)
        except Exception as exc:  # no network access to the weight host
            warnings.warn(
                f"could not load ImageNet weights for {name} ({exc}); using random init",
                PretrainedWeightsUnavailableWarning,
                stacklevel=3,
            )
    return factory(weights=None)


class ResNetEncoder(nn.Module):
    """torchvision resnet18/resnet34 as a 5-stage feature extractor."""

    def __init__(self, depth=34, in_channels=1, pretrained=False):
        super().__init__()
        if depth == 34:
            base = _tv_backbone(tvm.resnet34, tvm.ResNet34_Weights.IMAGENET1K_V1, "resnet34", pretrained)
        elif depth == 18:
            base = _tv_backbone(tvm.resnet18, tvm.ResNet18_Weights.IMAGENET1K_V1, "resnet18", pretrained)
        else:
            raise ValueError(f"unsupported resnet depth {depth}")
        base.conv1 = _replace_input_conv(base.conv1, in_channels)
        self.stem = nn.Sequential(base.conv1, base.bn1, base.relu)
        self.maxpool = base.maxpool
        self.layer1 = base.layer1
        self.layer2 = base.layer2
        self.layer3 = base.layer3
        self.layer4 = base.layer4
        self.channels = (64, 64, 128, 256, 512)

    def forward(self, x):
        f1 = self.stem(x)
        f2 = self.layer1(self.maxpool(f1))
        f3 = self.layer2(f2)
        f4 = self.layer3(f3)
        f5 = self.layer4(f4)
        return [f1, f2, f3, f4, f5]


class MobileNetV2Encoder(nn.Module):
    """torchvision mobilenet_v2 features split at the stride boundaries."""

    def __init__(self, in_channels=1, pretrained=False):
        super().__init__()
        base = _tv_backbone(
            tvm.mobilenet_v2, tvm.MobileNet_V2_Weights.IMAGENET1K_V1, "mobilenet_v2", pretrained
        )
        features = base.features
        features[0][0] = _replace_input_conv(features[0][0], in_channels)
        self.stage1 = features[0:2]    # stride 2, 16 ch
        self.stage2 = features[2:4]    # stride 4, 24 ch
        self.stage3 = features[4:7]    # stride 8, 32 ch
        self.stage4 = features[7:14]   # stride 16, 96 ch
        self.stage5 = features[14:19]  # stride 32, 1280 ch
        self.channels = (16, 24, 32, 96, 1280)

    def forward(self, x):
        f1 = self.stage1(x)
        f2 = self.stage2(f1)
        f3 = self.stage3(f2)
        f4 = self.stage4(f3)
        f5 = self.stage5(f4)
        return [f1, f2, f3, f4, f5]


# EfficientNet-Lite0 block settings: expansion, channels, repeats, stride, kernel
_LITE0_SETTINGS = (
    (1, 16, 1, 1, 3),
    (6, 24, 2, 2, 3),
    (6, 40, 2, 2, 5),
    (6, 80, 3, 2, 3),
    (6, 112, 3, 1, 5),
    (6, 192, 4, 2, 5),
    (6, 320, 1, 1, 3),
)


class EfficientNetLiteEncoder(nn.Module):
    """EfficientNet-Lite0 feature extractor.

    The Lite family removes squeeze-excitation and swaps SiLU for ReLU6,
    with the 32-channel stem kept unscaled.  No public ImageNet weights are
    redistributable here, so a pretrained request falls back to random init.
    """

    def __init__(self, in_channels=1, pretrained=False):
        super().__init__()
        if pretrained:
            warnings.warn(
                "no ImageNet weights available for efficientnet_lite0; using random init",
                PretrainedWeightsUnavailableWarning,
                stacklevel=2,
            )
        self.stem = ConvBNReLU(in_channels, 32, 3, stride=2, relu6=True)
        stages = []
        ch = 32
        for t, c, n, s, k in _LITE0_SETTINGS:
            blocks = []
            for i in range(n):
                blocks.append(InvertedResidual(ch, c, s if i == 0 else 1, t, kernel_size=k))
                ch = c
            stages.append(nn.Sequential(*blocks))
        self.stages = nn.ModuleList(stages)
        self.channels = (16, 24, 40, 112, 320)

    def forward(self, x):
        x = self.stem(x)
        taps = []
        for i, stage in enumerate(self.stages):
            x = stage(x)
            if i in (0, 1, 2, 4, 6):
                taps.append(x)
        return taps
