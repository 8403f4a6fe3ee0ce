"""Model hyperparameter presets for the two cascade levels."""

from dataclasses import dataclass, field, asdict

from lyralign.audio import N_MELS

VOCAB_SIZE = 76


@dataclass(frozen=True)
class ModelConfig:
    level: str = "sentence"             # "sentence" or "word"
    c_encoder: int = 256
    c_in: int = 8
    cbhg_layers: int = 2
    unet_channels: tuple = (32, 64, 128, 256)
    vocab_size: int = VOCAB_SIZE
    conv_bank_k: int = 8
    highway_layers: int = 4

    def __post_init__(self):
        if self.level not in ("sentence", "word"):
            raise ValueError(f"unknown level {self.level!r}")
        channels = tuple(self.unet_channels)
        object.__setattr__(self, "unet_channels", channels)
        if not channels or channels[0] != 32:
            raise ValueError("unet_channels must start at 32")
        if any(b != 2 * a for a, b in zip(channels, channels[1:])):
            raise ValueError("unet_channels must double at each depth")
        if self.c_encoder < 1 or self.c_in < 1:
            raise ValueError("c_encoder and c_in must be positive")

    @property
    def stack_factor(self):
        return 4 if self.level == "sentence" else 1

    @property
    def n_mels_effective(self):
        return N_MELS * self.stack_factor

    @property
    def unet_depth(self):
        return len(self.unet_channels)

    def to_dict(self):
        d = asdict(self)
        d["unet_channels"] = list(self.unet_channels)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["unet_channels"] = tuple(d["unet_channels"])
        return cls(**d)


def sentence_config(**overrides):
    """Stock sentence-level preset: 2x 256-dim CBHG, UNet 32-64-128-256."""
    base = dict(level="sentence", c_encoder=256, unet_channels=(32, 64, 128, 256))
    base.update(overrides)
    return ModelConfig(**base)


def word_config(**overrides):
    """Stock word-level preset: 2x 512-dim CBHG, UNet 32-64-128."""
    base = dict(level="word", c_encoder=512, unet_channels=(32, 64, 128))
    base.update(overrides)
    return ModelConfig(**base)


def toy_config(level="word", **overrides):
    """Small preset for tests and desk-scale experiments."""
    base = dict(level=level, c_encoder=16, c_in=2, cbhg_layers=1,
                unet_channels=(32, 64), conv_bank_k=4, highway_layers=2)
    base.update(overrides)
    return ModelConfig(**base)
