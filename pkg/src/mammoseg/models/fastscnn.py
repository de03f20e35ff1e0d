"""Fast-SCNN: two-branch real-time segmentation network.

Keeps the published layout -- a learning-to-downsample head, a global
feature extractor built from MobileNetV2 bottlenecks with pyramid pooling,
a feature fusion module, and a lightweight classifier -- with channel
widths sized for the single-channel benchmark configuration.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

from .blocks import ConvBNReLU, DSConv, InvertedResidual, check_input_divisibility


class LearningToDownsample(nn.Module):
    def __init__(self, in_channels, channels=(40, 60, 64)):
        super().__init__()
        c1, c2, c3 = channels
        self.conv = ConvBNReLU(in_channels, c1, 3, stride=2)
        self.ds1 = DSConv(c1, c2, stride=2)
        self.ds2 = DSConv(c2, c3, stride=2)
        self.out_channels = c3

    def forward(self, x):
        return self.ds2(self.ds1(self.conv(x)))


class PyramidPooling(nn.Module):
    """Pool at several scales, project, upsample, concatenate, fuse."""

    def __init__(self, channels, pool_sizes=(1, 2, 3, 6)):
        super().__init__()
        branch_ch = channels // 4
        self.pool_sizes = pool_sizes
        self.branches = nn.ModuleList(
            nn.Sequential(nn.AdaptiveAvgPool2d(size), ConvBNReLU(channels, branch_ch, 1))
            for size in pool_sizes
        )
        self.fuse = ConvBNReLU(channels + branch_ch * len(pool_sizes), channels, 1)

    def forward(self, x):
        size = x.shape[-2:]
        feats = [x]
        for branch in self.branches:
            feats.append(F.interpolate(branch(x), size=size, mode="bilinear", align_corners=False))
        return self.fuse(torch.cat(feats, dim=1))


class GlobalFeatureExtractor(nn.Module):
    def __init__(self, in_channels, block_channels=(96, 128, 160), repeats=(3, 3, 3), expansion=6):
        super().__init__()
        c1, c2, c3 = block_channels
        self.stage1 = self._stage(in_channels, c1, repeats[0], stride=2, t=expansion)
        self.stage2 = self._stage(c1, c2, repeats[1], stride=2, t=expansion)
        self.stage3 = self._stage(c2, c3, repeats[2], stride=1, t=expansion)
        self.ppm = PyramidPooling(c3)
        self.out_channels = c3

    @staticmethod
    def _stage(in_ch, out_ch, n, stride, t):
        blocks = [InvertedResidual(in_ch, out_ch, stride, t)]
        blocks.extend(InvertedResidual(out_ch, out_ch, 1, t) for _ in range(n - 1))
        return nn.Sequential(*blocks)

    def forward(self, x):
        return self.ppm(self.stage3(self.stage2(self.stage1(x))))


class FeatureFusion(nn.Module):
    """Fuse the 1/8 detail branch with the upsampled 1/32 context branch."""

    def __init__(self, detail_channels, context_channels, out_channels):
        super().__init__()
        self.detail_proj = nn.Sequential(
            nn.Conv2d(detail_channels, out_channels, 1, bias=False),
            nn.BatchNorm2d(out_channels),
        )
        self.context_dw = ConvBNReLU(context_channels, context_channels, 3, groups=context_channels)
        self.context_proj = nn.Sequential(
            nn.Conv2d(context_channels, out_channels, 1, bias=False),
            nn.BatchNorm2d(out_channels),
        )
        self.relu = nn.ReLU(inplace=True)

    def forward(self, detail, context):
        context = F.interpolate(context, size=detail.shape[-2:], mode="bilinear", align_corners=False)
        context = self.context_proj(self.context_dw(context))
        return self.relu(self.detail_proj(detail) + context)


class Classifier(nn.Module):
    def __init__(self, channels, num_classes=1):
        super().__init__()
        self.ds = DSConv(channels, channels)
        self.conv = nn.Conv2d(channels, num_classes, 1)

    def forward(self, x):
        return self.conv(self.ds(x))


class FastSCNN(nn.Module):
    downsample_factor = 32

    def __init__(self, in_channels=1, num_classes=1,
                 ltd_channels=(40, 60, 64), gfe_channels=(96, 128, 160),
                 gfe_repeats=(3, 3, 3), fusion_channels=160):
        super().__init__()
        self.ltd = LearningToDownsample(in_channels, ltd_channels)
        self.gfe = GlobalFeatureExtractor(self.ltd.out_channels, gfe_channels, gfe_repeats)
        self.ffm = FeatureFusion(self.ltd.out_channels, self.gfe.out_channels, fusion_channels)
        self.classifier = Classifier(fusion_channels, num_classes)

    def forward(self, x):
        check_input_divisibility(x, self.downsample_factor)
        detail = self.ltd(x)
        context = self.gfe(detail)
        fused = self.ffm(detail, context)
        logits = self.classifier(fused)
        return F.interpolate(logits, size=x.shape[-2:], mode="bilinear", align_corners=False)
