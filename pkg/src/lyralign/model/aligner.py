"""The trainable aligner: encoders, cross-correlation fusion, UNet decode.

One `AlignerModel` bundles a text encoder, an audio encoder, and the
alignment predictor for a single cascade level. Inference helpers in this
module take/return numpy and run under no_grad; training drives the torch
module directly.
"""

import io
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import torch
from torch import nn

from lyralign.audio import MelFeatures, frame_to_seconds
from lyralign.errors import (
    EmptyEnsemble,
    ShapeMismatch,
    StackFactorMismatch,
    TokenOutOfRange,
)
from lyralign.model.cbhg import SequenceEncoder
from lyralign.model.config import ModelConfig
from lyralign.model.unet import AlignmentUNet

WEIGHTS_FORMAT_VERSION = 1


@dataclass
class CrossCorrelationMatrix:
    """Fusion tensor [C_in x L x T]: per-slice inner products over C_encoder."""

    values: np.ndarray
    level: str = "word"

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 3:
            raise ShapeMismatch("cross-correlation matrix must be [C_in x L x T]")


class AlignmentMatrix:
    """Predictor output: [L x T] logits and their per-row softmax."""

    def __init__(self, logits):
        self.logits = np.asarray(logits, dtype=np.float64)
        if self.logits.ndim != 2:
            raise ShapeMismatch("alignment matrix must be [L x T]")
        self._probs = None

    @property
    def shape(self):
        return self.logits.shape

    @property
    def probs(self):
        if self._probs is None:
            shifted = self.logits - self.logits.max(axis=1, keepdims=True)
            e = np.exp(shifted)
            self._probs = e / e.sum(axis=1, keepdims=True)
        return self._probs


class RowOnset(NamedTuple):
    row: int
    frame: int
    onset_sec: float
    confidence: float


class AlignerModel(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.text_encoder = SequenceEncoder(
            config.vocab_size, config.c_encoder, config.c_in,
            n_layers=config.cbhg_layers, bank_k=config.conv_bank_k,
            highway_layers=config.highway_layers, embedding=True,
        )
        self.audio_encoder = SequenceEncoder(
            config.n_mels_effective, config.c_encoder, config.c_in,
            n_layers=config.cbhg_layers, bank_k=config.conv_bank_k,
            highway_layers=config.highway_layers, embedding=False,
        )
        self.predictor = AlignmentUNet(config.c_in, config.unet_channels)
        self.register_buffer("feat_mean", torch.zeros(config.n_mels_effective))
        self.register_buffer("feat_std", torch.ones(config.n_mels_effective))

    def normalize_audio(self, frames):
        return (frames - self.feat_mean) / self.feat_std

    def forward(self, token_ids, audio_frames):
        """token_ids: [B, L] long; audio_frames: [B, T, F]. Returns [B, L, T] logits."""
        text = self.text_encoder(token_ids)                       # [B, c_in, C, L]
        audio = self.audio_encoder(self.normalize_audio(audio_frames))  # [B, c_in, C, T]
        fused = torch.einsum("bckl,bckt->bclt", text, audio)
        return self.predictor(fused)

    def set_normalization(self, mean, std):
        self.feat_mean.copy_(torch.as_tensor(mean, dtype=self.feat_mean.dtype))
        self.feat_std.copy_(torch.as_tensor(std, dtype=self.feat_std.dtype))


def _token_tensor(tokens, config):
    ids = np.asarray(getattr(tokens, "tokens", tokens), dtype=np.int64)
    if ids.ndim != 1:
        raise ShapeMismatch("token ids must be 1-D")
    if ids.size and (ids.min() < 0 or ids.max() >= config.vocab_size):
        raise TokenOutOfRange(f"token ids must lie in [0, {config.vocab_size})")
    return torch.from_numpy(ids)


def _audio_tensor(features: MelFeatures, config):
    if features.stack_factor != config.stack_factor:
        raise StackFactorMismatch(
            f"{config.level}-level model expects stack_factor {config.stack_factor}, "
            f"got {features.stack_factor}"
        )
    return torch.from_numpy(np.ascontiguousarray(features.frames, dtype=np.float32))


def encode_text(tokens, model: AlignerModel):
    """Inference-mode text features [C_in x C_encoder x L]."""
    ids = _token_tensor(tokens, model.config)
    model.eval()
    with torch.no_grad():
        out = model.text_encoder(ids.unsqueeze(0))
    return out.squeeze(0).numpy()


def encode_audio(features: MelFeatures, model: AlignerModel):
    """Inference-mode audio features [C_in x C_encoder x T]."""
    frames = _audio_tensor(features, model.config).to(model.feat_mean.dtype)
    model.eval()
    with torch.no_grad():
        out = model.audio_encoder(model.normalize_audio(frames).unsqueeze(0))
    return out.squeeze(0).numpy()


def cross_correlate(text_feats, audio_feats, level="word"):
    """M[c, l, t] = sum_k text[c, k, l] * audio[c, k, t]."""
    text_feats = np.asarray(text_feats)
    audio_feats = np.asarray(audio_feats)
    if text_feats.ndim != 3 or audio_feats.ndim != 3:
        raise ShapeMismatch("encoder features must be [C_in x C_encoder x length]")
    if text_feats.shape[:2] != audio_feats.shape[:2]:
        raise ShapeMismatch(
            f"C_in/C_encoder mismatch: {text_feats.shape[:2]} vs {audio_feats.shape[:2]}"
        )
    values = np.einsum("ckl,ckt->clt", text_feats, audio_feats)
    return CrossCorrelationMatrix(values=values, level=level)


def predict_alignment(m: CrossCorrelationMatrix, model: AlignerModel):
    """Run the UNet on a fusion tensor; returns the [L x T] AlignmentMatrix."""
    if m.values.shape[0] != model.config.c_in:
        raise ShapeMismatch(
            f"matrix C_in {m.values.shape[0]} != model C_in {model.config.c_in}"
        )
    model.eval()
    x = torch.as_tensor(np.ascontiguousarray(m.values), dtype=model.feat_mean.dtype)
    with torch.no_grad():
        logits = model.predictor(x.unsqueeze(0)).squeeze(0)
    return AlignmentMatrix(logits.numpy())


def align_features(tokens, features, model: AlignerModel):
    """Full inference pass: tokens + features -> AlignmentMatrix."""
    ids = _token_tensor(tokens, model.config)
    frames = _audio_tensor(features, model.config).to(model.feat_mean.dtype)
    model.eval()
    with torch.no_grad():
        logits = model(ids.unsqueeze(0), frames.unsqueeze(0)).squeeze(0)
    return AlignmentMatrix(logits.numpy())


def decode_onsets(a: AlignmentMatrix, supervised_rows, features: MelFeatures):
    """Argmax along time per supervised row; ties break to the lowest frame.

    Confidence is the row's max softmax probability. No monotonicity is
    imposed across rows.
    """
    probs = a.probs
    out = []
    for row in supervised_rows:
        if not 0 <= row < probs.shape[0]:
            raise ShapeMismatch(f"supervised row {row} outside [0, {probs.shape[0]})")
        frame = int(np.argmax(probs[row]))
        out.append(RowOnset(
            row=int(row),
            frame=frame,
            onset_sec=frame_to_seconds(frame, features),
            confidence=float(probs[row, frame]),
        ))
    return out


def ensemble_logits(alignment_matrices):
    """Element-wise mean of member logits; probs recomputed from the mean."""
    members = list(alignment_matrices)
    if not members:
        raise EmptyEnsemble("ensemble needs at least one member")
    shape = members[0].shape
    if any(m.shape != shape for m in members):
        raise ShapeMismatch("ensemble members must share the same [L x T] shape")
    mean = np.mean([m.logits for m in members], axis=0)
    return AlignmentMatrix(mean)


def save_model(path, model: AlignerModel, extra_meta=None):
    """Versioned single-file container: config JSON + named parameter arrays."""
    meta = {
        "format_version": WEIGHTS_FORMAT_VERSION,
        "config": model.config.to_dict(),
    }
    if extra_meta:
        meta.update(extra_meta)
    arrays = {
        f"param/{name}": tensor.detach().cpu().numpy()
        for name, tensor in model.state_dict().items()
    }
    buffer = io.BytesIO()
    np.savez_compressed(buffer, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)
    with open(path, "wb") as fh:
        fh.write(buffer.getvalue())


def load_model(path):
    """Load a weights container, validating parameter shapes against the config."""
    with np.load(path) as archive:
        meta = json.loads(archive["__meta__"].tobytes().decode())
        if meta.get("format_version") != WEIGHTS_FORMAT_VERSION:
            raise ShapeMismatch(f"unsupported weights format {meta.get('format_version')}")
        config = ModelConfig.from_dict(meta["config"])
        model = AlignerModel(config)
        state = model.state_dict()
        loaded = {}
        for name, tensor in state.items():
            key = f"param/{name}"
            if key not in archive:
                raise ShapeMismatch(f"weights file missing parameter {name}")
            arr = archive[key]
            if tuple(arr.shape) != tuple(tensor.shape):
                raise ShapeMismatch(
                    f"parameter {name}: file shape {arr.shape} != model shape {tuple(tensor.shape)}"
                )
            loaded[name] = torch.from_numpy(arr.copy())
        model.load_state_dict(loaded)
    model.eval()
    return model, meta
