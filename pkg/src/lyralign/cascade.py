"""Two-stage inference: sentence-level segmentation, word-level refinement.

The sentence model sees the whole song (4x-stacked features) and supervises
line-initial token rows; its onsets slice the song into padded segments,
and the word model then places each word inside its own segment. No
monotonicity is imposed unless the caller opts into post-smoothing.
"""

import json
from dataclasses import dataclass

import numpy as np

from lyralign.audio import MelFeatures, seconds_to_frame, stack_frames
from lyralign.model import AlignerModel, align_features, decode_onsets

DEFAULT_PAD_PRE = 0.5
DEFAULT_PAD_POST = 0.5


@dataclass
class Unit:
    text: str
    onset_sec: float
    confidence: float
    segment_id: int = 0


@dataclass
class AlignmentResult:
    level: str
    units: list
    song_confidence: float = 0.0
    matrix_ref: str = None

    def onsets(self):
        return [u.onset_sec for u in self.units]


def align_sentences(features, tokens, model: AlignerModel):
    """Whole-song sentence onsets; one unit per lyric line."""
    if features.stack_factor == 1:
        features = stack_frames(features, model.config.stack_factor)
    matrix = align_features(tokens, features, model)
    decoded = decode_onsets(matrix, tokens.sentence_starts, features)
    units = [
        Unit(text=tokens.sentence_text(s), onset_sec=d.onset_sec,
             confidence=d.confidence, segment_id=s)
        for s, d in enumerate(decoded)
    ]
    confidence = float(np.mean([u.confidence for u in units])) if units else 0.0
    result = AlignmentResult(level="sentence", units=units, song_confidence=confidence)
    return result, matrix


def slice_segments(sentence_result, song_duration, pad_pre=DEFAULT_PAD_PRE, pad_post=DEFAULT_PAD_POST):
    """Padded per-sentence spans clamped to [0, song_duration].

    Segment i runs from onset_i - pad_pre to onset_{i+1} + pad_post; the
    last segment ends at song_duration. Non-monotone onsets widen the
    segment instead of reordering it.
    """
    onsets = sentence_result.onsets()
    segments = []
    for i, onset in enumerate(onsets):
        start = max(0.0, onset - pad_pre)
        if i + 1 < len(onsets):
            end = max(onset, onsets[i + 1]) + pad_post
        else:
            end = song_duration
        segments.append((i, min(start, song_duration), min(end, song_duration)))
    return segments


def align_words(segment_features, segment_tokens, model: AlignerModel, segment_offset=0.0,
                segment_id=0):
    """Word onsets within one sliced segment, shifted by the segment offset."""
    matrix = align_features(segment_tokens, segment_features, model)
    decoded = decode_onsets(matrix, segment_tokens.word_starts, segment_features)
    units = [
        Unit(text=segment_tokens.source_words[i], onset_sec=segment_offset + d.onset_sec,
             confidence=d.confidence, segment_id=segment_id)
        for i, d in enumerate(decoded)
    ]
    confidence = float(np.mean([u.confidence for u in units])) if units else 0.0
    return AlignmentResult(level="word", units=units, song_confidence=confidence), matrix


def _line_token_sequence(tokens, sentence_index):
    from lyralign.text.tokenize import TokenSequence

    start, end = tokens.sentence_token_ranges()[sentence_index]
    word_idx = tokens.word_indices_in_sentence(sentence_index)
    return TokenSequence(
        tokens=tokens.tokens[start:end],
        word_starts=[tokens.word_starts[i] - start for i in word_idx],
        sentence_starts=[0],
        source_words=[tokens.source_words[i] for i in word_idx],
        language_tag=tokens.language_tag,
        silence_id=tokens.silence_id,
    )


def align_pipeline(features_word, tokens, sentence_model, word_model,
                   pad_pre=DEFAULT_PAD_PRE, pad_post=DEFAULT_PAD_POST,
                   monotonic=False, matrix_sink=None):
    """Full cascade over word-level (stack 1) features.

    Returns (sentence_result, word_result). `matrix_sink(name, matrix)` is
    called with the sentence matrix and each segment matrix when given.
    """
    sentence_result, sentence_matrix = align_sentences(features_word, tokens, sentence_model)
    if matrix_sink is not None:
        matrix_sink("sentence", sentence_matrix)
    duration = features_word.duration_sec
    segments = slice_segments(sentence_result, duration, pad_pre, pad_post)

    word_units = []
    for segment_id, start_sec, end_sec in segments:
        start_frame = max(0, seconds_to_frame(start_sec, features_word))
        end_frame = min(features_word.n_frames,
                        int(np.ceil(end_sec / features_word.seconds_per_frame)))
        if end_frame <= start_frame:
            end_frame = min(features_word.n_frames, start_frame + 1)
        segment_features = MelFeatures(
            frames=features_word.frames[start_frame:end_frame],
            sample_rate=features_word.sample_rate,
            hop=features_word.hop,
            stack_factor=1,
        )
        line_tokens = _line_token_sequence(tokens, segment_id)
        if not line_tokens.word_starts:
            continue
        offset = start_frame * features_word.seconds_per_frame
        segment_result, segment_matrix = align_words(
            segment_features, line_tokens, word_model, offset, segment_id)
        if matrix_sink is not None:
            matrix_sink(f"segment{segment_id}", segment_matrix)
        word_units.extend(segment_result.units)

    if monotonic:
        word_units = _smooth_monotonic(word_units)

    confidence = float(np.mean([u.confidence for u in word_units])) if word_units else 0.0
    word_result = AlignmentResult(level="word", units=word_units, song_confidence=confidence)
    return sentence_result, word_result


def _smooth_monotonic(units):
    """Within each segment, reassign onsets in sorted order (word order kept)."""
    out = list(units)
    by_segment = {}
    for index, unit in enumerate(out):
        by_segment.setdefault(unit.segment_id, []).append(index)
    for indices in by_segment.values():
        onsets = sorted(out[i].onset_sec for i in indices)
        for i, onset in zip(indices, onsets):
            out[i] = Unit(text=out[i].text, onset_sec=onset,
                          confidence=out[i].confidence, segment_id=out[i].segment_id)
    return out


def align_song(features_word, tokens, sentence_model, word_model, song_id="song",
               model_versions=None, **kwargs):
    """Cascade + canonical output dict (the toolkit's primary artifact)."""
    sentence_result, word_result = align_pipeline(
        features_word, tokens, sentence_model, word_model, **kwargs)
    return canonical_dict(song_id, sentence_result, word_result, model_versions)


def canonical_dict(song_id, sentence_result, word_result, model_versions=None):
    return {
        "song_id": song_id,
        "sentences": [
            {"text": u.text, "onset_sec": round(u.onset_sec, 6), "confidence": round(u.confidence, 6)}
            for u in sentence_result.units
        ],
        "words": [
            {"text": u.text, "onset_sec": round(u.onset_sec, 6), "confidence": round(u.confidence, 6),
             "segment_id": u.segment_id}
            for u in word_result.units
        ],
        "song_confidence": round(word_result.song_confidence, 6),
        "model_versions": model_versions or {},
    }


def dumps_canonical(payload):
    """Stable serialization: byte-identical for identical inputs."""
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def _lrc_stamp(seconds, bracket="[]"):
    minutes = int(seconds // 60)
    rest = seconds - 60 * minutes
    return f"{bracket[0]}{minutes:02d}:{rest:05.2f}{bracket[1]}"


def to_lrc(canonical, enhanced=False):
    """LRC export: one [mm:ss.xx] line per sentence, optional <mm:ss.xx> words."""
    lines = []
    words_by_segment = {}
    for w in canonical.get("words", []):
        words_by_segment.setdefault(w["segment_id"], []).append(w)
    for segment_id, sentence in enumerate(canonical["sentences"]):
        stamp = _lrc_stamp(sentence["onset_sec"])
        if enhanced and words_by_segment.get(segment_id):
            body = " ".join(
                f"{_lrc_stamp(w['onset_sec'], '<>')}{w['text']}"
                for w in words_by_segment[segment_id]
            )
        else:
            body = sentence["text"]
        lines.append(f"{stamp}{body}")
    return "\n".join(lines) + "\n"
