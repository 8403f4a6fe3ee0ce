from lyralign.model.config import ModelConfig, sentence_config, toy_config, word_config
from lyralign.model.aligner import (
    AlignerModel,
    AlignmentMatrix,
    CrossCorrelationMatrix,
    RowOnset,
    align_features,
    cross_correlate,
    decode_onsets,
    encode_audio,
    encode_text,
    ensemble_logits,
    load_model,
    predict_alignment,
    save_model,
)

__all__ = [
    "ModelConfig",
    "sentence_config",
    "word_config",
    "toy_config",
    "AlignerModel",
    "AlignmentMatrix",
    "CrossCorrelationMatrix",
    "RowOnset",
    "align_features",
    "cross_correlate",
    "decode_onsets",
    "encode_audio",
    "encode_text",
    "ensemble_logits",
    "predict_alignment",
    "save_model",
    "load_model",
]
