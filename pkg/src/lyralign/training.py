"""Supervised training with masked cross-entropy along the time axis."""

import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import torch

from lyralign.audio import MelFeatures
from lyralign.errors import DataLevelMismatch, DivergedLoss, NoSupervisedRows
from lyralign.model import AlignerModel, AlignmentMatrix, align_features, decode_onsets
from lyralign.model.config import ModelConfig
from lyralign.text.tokenize import TokenSequence


@dataclass
class TrainTarget:
    """Per-token supervision: one target frame per supervised token row."""

    target_frames: list            # (token_index, frame_index) pairs
    T: int

    def __post_init__(self):
        seen = set()
        for token_index, frame in self.target_frames:
            if not 0 <= frame < self.T:
                raise ValueError(f"target frame {frame} outside [0, {self.T})")
            if token_index in seen:
                raise ValueError(f"duplicate supervised token index {token_index}")
            seen.add(token_index)

    @property
    def mask(self):
        return {token_index for token_index, _ in self.target_frames}


class TrainItem(NamedTuple):
    tokens: TokenSequence
    features: MelFeatures
    target: Optional[TrainTarget]
    song_id: str = ""


@dataclass
class TrainSpec:
    level: str
    batch_size: int
    learning_rate: float
    weight_decay: float
    max_steps: int
    augmentations: list = field(default_factory=list)
    seed: int = 0


def sentence_train_spec(**overrides):
    base = dict(level="sentence", batch_size=24, learning_rate=5e-4,
                weight_decay=1e-3, max_steps=10000)
    base.update(overrides)
    return TrainSpec(**base)


def word_train_spec(**overrides):
    base = dict(level="word", batch_size=64, learning_rate=5e-4,
                weight_decay=1e-7, max_steps=10000)
    base.update(overrides)
    return TrainSpec(**base)


def alignment_loss(alignment, target: TrainTarget):
    """Mean over supervised rows of -log softmax_T(logits[row])[target frame].

    Accepts an AlignmentMatrix (numpy) or a raw [L x T] torch logits tensor;
    unsupervised rows contribute nothing.
    """
    if isinstance(alignment, AlignmentMatrix):
        logits = torch.from_numpy(np.asarray(alignment.logits, dtype=np.float64))
    else:
        logits = alignment
    if not target.target_frames:
        raise NoSupervisedRows("target supervises no rows")
    if logits.shape[1] != target.T:
        raise ValueError(f"logits T={logits.shape[1]} != target T={target.T}")
    rows = torch.tensor([r for r, _ in target.target_frames], dtype=torch.long)
    frames = torch.tensor([f for _, f in target.target_frames], dtype=torch.long)
    if rows.numel() and int(rows.max()) >= logits.shape[0]:
        raise ValueError("supervised token index outside the logits rows")
    loss = torch.nn.functional.cross_entropy(logits[rows], frames)
    if isinstance(alignment, AlignmentMatrix):
        return float(loss)
    return loss


def _check_levels(spec: TrainSpec, config: ModelConfig, items):
    if spec.level != config.level:
        raise DataLevelMismatch(f"spec level {spec.level!r} != config level {config.level!r}")
    for item in items:
        if item.features.stack_factor != config.stack_factor:
            raise DataLevelMismatch(
                f"item {item.song_id!r} has stack_factor {item.features.stack_factor}, "
                f"{config.level}-level training expects {config.stack_factor}"
            )
        if item.target is None:
            raise DataLevelMismatch(f"item {item.song_id!r} carries no training target")


def estimate_normalization(items, max_items=64):
    """Per-bin mean/std over (a sample of) the corpus features."""
    sample = [np.asarray(it.features.frames, dtype=np.float64) for it in items[:max_items]]
    frames = np.concatenate(sample, axis=0)
    mean = frames.mean(axis=0)
    std = frames.std(axis=0)
    std[std < 1e-6] = 1.0
    return mean, std


def _feature_noise_sigma(spec: TrainSpec):
    for entry in spec.augmentations:
        name, params = (entry[0], entry[1]) if isinstance(entry, (tuple, list)) else (entry, {})
        if name == "feature_noise":
            return float(params.get("sigma", 0.1))
    return 0.0


def train(spec: TrainSpec, corpus, config: ModelConfig, model=None,
          optimizer_state=None, start_step=0, log_callback=None):
    """Train a model on TrainItems; returns (model, step-indexed loss log).

    Batches are realized by gradient accumulation over `batch_size`
    single-song passes, which keeps arbitrary (L, T) shapes exact instead
    of padding them. Fixed seed -> reproducible loss log on one platform.
    """
    items = list(corpus)
    if not items:
        raise ValueError("corpus is empty")
    _check_levels(spec, config, items)

    torch.manual_seed(spec.seed)
    if model is None:
        model = AlignerModel(config)
        mean, std = estimate_normalization(items)
        model.set_normalization(mean, std)
    optimizer = torch.optim.AdamW(model.parameters(), lr=spec.learning_rate,
                                  weight_decay=spec.weight_decay)
    if optimizer_state is not None:
        optimizer.load_state_dict(optimizer_state)

    rng = np.random.default_rng(spec.seed)
    noise_sigma = _feature_noise_sigma(spec)
    order = []
    log = []
    model.train()
    for step in range(start_step, start_step + spec.max_steps):
        t0 = time.perf_counter()
        optimizer.zero_grad()
        step_loss = 0.0
        for _ in range(spec.batch_size):
            if not order:
                order = list(rng.permutation(len(items)))
            item = items[order.pop()]
            ids = torch.tensor(item.tokens.tokens, dtype=torch.long).unsqueeze(0)
            frames = torch.from_numpy(np.ascontiguousarray(item.features.frames, dtype=np.float32))
            if noise_sigma > 0.0:
                frames = frames + noise_sigma * torch.from_numpy(
                    rng.standard_normal(frames.shape).astype(np.float32))
            logits = model(ids, frames.unsqueeze(0)).squeeze(0)
            loss = alignment_loss(logits, item.target) / spec.batch_size
            loss.backward()
            step_loss += loss.detach().item()
        if not np.isfinite(step_loss):
            raise DivergedLoss(f"loss became {step_loss} at step {step}")
        optimizer.step()
        entry = {
            "step": step,
            "loss": step_loss,
            "lr": spec.learning_rate,
            "wall_ms": (time.perf_counter() - t0) * 1000.0,
        }
        log.append(entry)
        if log_callback is not None:
            log_callback(entry, model, optimizer)
    model.eval()
    return model, log


def supervised_rows_for_level(tokens: TokenSequence, level):
    return list(tokens.sentence_starts if level == "sentence" else tokens.word_starts)


def pseudo_label(model: AlignerModel, unlabeled, confidence_floor):
    """Label items with the model's decoded onsets; keep confident songs.

    Each emitted item is train()-compatible. An empty result is valid.
    """
    if not 0.0 <= confidence_floor <= 1.0:
        raise ValueError("confidence_floor must lie in [0, 1]")
    labeled = []
    for item in unlabeled:
        matrix = align_features(item.tokens, item.features, model)
        rows = supervised_rows_for_level(item.tokens, model.config.level)
        decoded = decode_onsets(matrix, rows, item.features)
        if not decoded:
            continue
        confidence = float(np.mean([d.confidence for d in decoded]))
        if confidence < confidence_floor:
            continue
        target = TrainTarget(
            target_frames=[(d.row, d.frame) for d in decoded],
            T=item.features.n_frames,
        )
        labeled.append(TrainItem(item.tokens, item.features, target, item.song_id))
    return labeled
