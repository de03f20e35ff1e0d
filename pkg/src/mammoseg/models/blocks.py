"""Shared building blocks: conv stacks, inverted residuals, SCSE attention,
and the U-Net style decoder used by the encoder-backed models."""

import torch
import torch.nn as nn


class ConvBNReLU(nn.Sequential):
    def __init__(self, in_ch, out_ch, kernel_size=3, stride=1, groups=1, relu6=False):
        padding = kernel_size // 2
        super().__init__(
            nn.Conv2d(in_ch, out_ch, kernel_size, stride, padding, groups=groups, bias=False),
            nn.BatchNorm2d(out_ch),
            nn.ReLU6(inplace=True) if relu6 else nn.ReLU(inplace=True),
        )


class DSConv(nn.Sequential):
    """Depthwise separable conv: depthwise k x k followed by pointwise 1 x 1."""

    def __init__(self, in_ch, out_ch, stride=1, kernel_size=3, relu6=False):
        super().__init__(
            ConvBNReLU(in_ch, in_ch, kernel_size, stride, groups=in_ch, relu6=relu6),
            ConvBNReLU(in_ch, out_ch, 1, 1, relu6=relu6),
        )


class InvertedResidual(nn.Module):
    """MobileNetV2 bottleneck (no squeeze-excitation, ReLU6 activations)."""

    def __init__(self, in_ch, out_ch, stride, expand_ratio, kernel_size=3):
        super().__init__()
        hidden = in_ch * expand_ratio
        self.use_residual = stride == 1 and in_ch == out_ch
        layers = []
        if expand_ratio != 1:
            layers.append(ConvBNReLU(in_ch, hidden, 1, relu6=True))
        layers.extend([
            ConvBNReLU(hidden, hidden, kernel_size, stride, groups=hidden, relu6=True),
            nn.Conv2d(hidden, out_ch, 1, bias=False),
            nn.BatchNorm2d(out_ch),
        ])
        self.conv = nn.Sequential(*layers)

    def forward(self, x):
        out = self.conv(x)
        if self.use_residual:
            out = out + x
        return out


class SCSE(nn.Module):
    """Concurrent spatial and channel squeeze-and-excitation."""

    def __init__(self, channels, reduction=16):
        super().__init__()
        reduced = max(1, channels // reduction)
        self.channel_gate = nn.Sequential(
            nn.AdaptiveAvgPool2d(1),
            nn.Conv2d(channels, reduced, 1),
            nn.ReLU(inplace=True),
            nn.Conv2d(reduced, channels, 1),
            nn.Sigmoid(),
        )
        self.spatial_gate = nn.Sequential(nn.Conv2d(channels, 1, 1), nn.Sigmoid())

    def forward(self, x):
        return x * self.channel_gate(x) + x * self.spatial_gate(x)


class DecoderBlock(nn.Module):
    """Upsample x2, concatenate the skip, refine with two 3x3 convs.

    With attention="scse" an SCSE gate is applied to the concatenated input
    and to the block output (this dual placement is what reproduces the
    published parameter deltas of the attention variants).
    """

    def __init__(self, in_ch, skip_ch, out_ch, attention=None):
        super().__init__()
        self.upsample = nn.Upsample(scale_factor=2, mode="nearest")
        total = in_ch + skip_ch
        self.attention1 = SCSE(total) if attention == "scse" else nn.Identity()
        self.conv1 = ConvBNReLU(total, out_ch)
        self.conv2 = ConvBNReLU(out_ch, out_ch)
        self.attention2 = SCSE(out_ch) if attention == "scse" else nn.Identity()

    def forward(self, x, skip=None):
        x = self.upsample(x)
        if skip is not None:
            x = torch.cat([x, skip], dim=1)
        x = self.attention1(x)
        x = self.conv2(self.conv1(x))
        return self.attention2(x)


class UnetDecoder(nn.Module):
    """Five-stage decoder over encoder features at strides 2..32.

    Skips are consumed deepest-first; the final stage upsamples to full
    resolution without a skip.
    """

    def __init__(self, encoder_channels, decoder_channels, attention=None):
        super().__init__()
        if len(encoder_channels) != 5 or len(decoder_channels) != 5:
            raise ValueError("expected 5 encoder and 5 decoder channel entries")
        skips = list(encoder_channels[:-1][::-1]) + [0]  # deepest skip first, none last
        ins = [encoder_channels[-1]] + list(decoder_channels[:-1])
        self.blocks = nn.ModuleList(
            DecoderBlock(i, s, o, attention=attention)
            for i, s, o in zip(ins, skips, decoder_channels)
        )

    def forward(self, features):
        f1, f2, f3, f4, f5 = features
        skips = [f4, f3, f2, f1, None]
        x = f5
        for block, skip in zip(self.blocks, skips):
            x = block(x, skip)
        return x


class SegmentationHead(nn.Conv2d):
    def __init__(self, in_ch, out_ch=1, kernel_size=3):
        super().__init__(in_ch, out_ch, kernel_size, padding=kernel_size // 2)


class EncoderDecoderNet(nn.Module):
    """Encoder + U-Net decoder + head; checks input divisibility."""

    def __init__(self, encoder, decoder, head, downsample_factor=32):
        super().__init__()
        self.encoder = encoder
        self.decoder = decoder
        self.head = head
        self.downsample_factor = downsample_factor

    def forward(self, x):
        check_input_divisibility(x, self.downsample_factor)
        return self.head(self.decoder(self.encoder(x)))


def check_input_divisibility(x, factor):
    h, w = x.shape[-2], x.shape[-1]
    if h % factor or w % factor:
        raise ValueError(
            f"input spatial size {h}x{w} must be a multiple of {factor} "
            f"(total downsampling factor of this architecture)"
        )
