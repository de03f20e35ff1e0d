"""The seven benchmark architectures, constructed from a ModelSpec.

All models map a batch of single-channel images to single-channel logit
maps at the input resolution.  Encoder-backed models share the U-Net style
decoder; Fast-SCNN keeps its own two-branch design.
"""

from dataclasses import dataclass

from .blocks import EncoderDecoderNet, SegmentationHead, UnetDecoder
from .encoders import EfficientNetLiteEncoder, MobileNetV2Encoder, ResNetEncoder
from .fastscnn import FastSCNN

MODEL_NAMES = (
    "unet_resnet34",
    "mobilenetv2",
    "mobilenetv2_scse",
    "enet_resnet18",
    "fastscnn",
    "efficientnet_lite",
    "efficientnet_lite_scse",
)


@dataclass
class ModelSpec:
    name: str
    in_channels: int = 1
    pretrained: bool = True

    def validate(self):
        if self.name not in MODEL_NAMES:
            raise ValueError(
                f"unknown model name {self.name!r}; valid names: {', '.join(MODEL_NAMES)}"
            )
        if self.in_channels < 1:
            raise ValueError("in_channels must be >= 1")

    def to_dict(self):
        return {"name": self.name, "in_channels": self.in_channels, "pretrained": self.pretrained}

    @classmethod
    def from_dict(cls, d):
        return cls(name=d["name"], in_channels=d.get("in_channels", 1),
                   pretrained=d.get("pretrained", True))


def _unet(encoder, decoder_channels, attention=None):
    decoder = UnetDecoder(encoder.channels, decoder_channels, attention=attention)
    head = SegmentationHead(decoder_channels[-1])
    return EncoderDecoderNet(encoder, decoder, head)


def _build_unet_resnet34(spec):
    enc = ResNetEncoder(34, spec.in_channels, spec.pretrained)
    return _unet(enc, (256, 128, 64, 32, 16))


def _build_mobilenetv2(spec, attention=None):
    enc = MobileNetV2Encoder(spec.in_channels, spec.pretrained)
    return _unet(enc, (256, 128, 64, 32, 16), attention=attention)


def _build_enet_resnet18(spec):
    enc = ResNetEncoder(18, spec.in_channels, spec.pretrained)
    return _unet(enc, (160, 80, 48, 24, 12))


def _build_efficientnet_lite(spec, attention=None):
    enc = EfficientNetLiteEncoder(spec.in_channels, spec.pretrained)
    return _unet(enc, (256, 128, 64, 32, 16), attention=attention)


def _build_fastscnn(spec):
    return FastSCNN(in_channels=spec.in_channels)


_BUILDERS = {
    "unet_resnet34": _build_unet_resnet34,
    "mobilenetv2": lambda s: _build_mobilenetv2(s),
    "mobilenetv2_scse": lambda s: _build_mobilenetv2(s, attention="scse"),
    "enet_resnet18": _build_enet_resnet18,
    "fastscnn": _build_fastscnn,
    "efficientnet_lite": lambda s: _build_efficientnet_lite(s),
    "efficientnet_lite_scse": lambda s: _build_efficientnet_lite(s, attention="scse"),
}


def build_model(spec):
    """Construct the network for a spec; raises on unknown names."""
    spec.validate()
    return _BUILDERS[spec.name](spec)
