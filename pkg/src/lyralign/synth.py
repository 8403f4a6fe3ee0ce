"""Synthetic corpus generator: desk-scale songs with exact known onsets.

Each vocabulary token gets a fixed random spectral template; a song is a
sequence of template emissions (3-10 word-level frames each) with silence
gaps between lines and additive Gaussian noise. Targets record the exact
construction-time onset frames, which makes end-to-end accuracy measurable
without any real data.
"""

from dataclasses import dataclass

import numpy as np

from lyralign.audio import N_MELS, MelFeatures, stack_frames
from lyralign.text.tokenize import TokenSequence
from lyralign.text.vocabulary import default_vocabulary
from lyralign.training import TrainItem, TrainTarget

# Word-level frame pads used when cropping per-line training items; chosen
# to mirror the cascade's 0.5 s segment pads (0.5 / 0.032 ~ 15).
CROP_PAD_FRAMES = 15


@dataclass
class SynthSong:
    song_id: str
    tokens: TokenSequence
    features_word: MelFeatures
    token_onset_frames: list        # per token, word-level frames
    word_onsets_sec: list
    sentence_onsets_sec: list
    duration_sec: float

    @property
    def features_sentence(self):
        return stack_frames(self.features_word, 4)

    def word_target(self):
        return TrainTarget(
            target_frames=[
                (start, self.token_onset_frames[start]) for start in self.tokens.word_starts
            ],
            T=self.features_word.n_frames,
        )

    def sentence_target(self):
        stacked = self.features_sentence
        return TrainTarget(
            target_frames=[
                (start, min(self.token_onset_frames[start] // 4, stacked.n_frames - 1))
                for start in self.tokens.sentence_starts
            ],
            T=stacked.n_frames,
        )

    def sentence_item(self):
        return TrainItem(self.tokens, self.features_sentence, self.sentence_target(), self.song_id)

    def word_items(self):
        """One item per line, cropped like the inference-time segments."""
        items = []
        ranges = self.tokens.sentence_token_ranges()
        n_frames = self.features_word.n_frames
        for line_index, (tok_start, tok_end) in enumerate(ranges):
            first = self.token_onset_frames[tok_start]
            if line_index + 1 < len(ranges):
                next_first = self.token_onset_frames[ranges[line_index + 1][0]]
            else:
                next_first = n_frames
            crop_start = max(0, first - CROP_PAD_FRAMES)
            crop_end = min(n_frames, next_first + CROP_PAD_FRAMES)
            ids = self.tokens.tokens[tok_start:tok_end]
            word_starts = [w - tok_start for w in self.tokens.word_starts
                           if tok_start <= w < tok_end]
            words = [self.tokens.source_words[i]
                     for i in self.tokens.word_indices_in_sentence(line_index)]
            line_tokens = TokenSequence(
                tokens=ids, word_starts=word_starts, sentence_starts=[0],
                source_words=words, language_tag=self.tokens.language_tag,
                silence_id=self.tokens.silence_id,
            )
            target = TrainTarget(
                target_frames=[
                    (w, min(self.token_onset_frames[w + tok_start] - crop_start,
                            crop_end - crop_start - 1))
                    for w in word_starts
                ],
                T=crop_end - crop_start,
            )
            features = MelFeatures(
                frames=self.features_word.frames[crop_start:crop_end],
                sample_rate=self.features_word.sample_rate,
                hop=self.features_word.hop,
                stack_factor=1,
            )
            items.append(TrainItem(line_tokens, features, target,
                                   f"{self.song_id}/line{line_index}"))
        return items


class SynthCorpus:
    def __init__(self, songs, seed):
        self.songs = list(songs)
        self.seed = seed

    def __len__(self):
        return len(self.songs)

    def __iter__(self):
        return iter(self.songs)

    def sentence_items(self):
        return [song.sentence_item() for song in self.songs]

    def word_items(self):
        items = []
        for song in self.songs:
            items.extend(song.word_items())
        return items


def token_templates(seed, n_tokens=76, scale=2.0):
    """Fixed per-token spectral templates for one corpus seed."""
    rng = np.random.default_rng(seed ^ 0x5EED)
    templates = rng.standard_normal((n_tokens, N_MELS)) * scale
    return templates


def synth_corpus(n_songs, seed, vocab=None, noise_sigma=0.3,
                 lines_range=(2, 4), words_per_line=(2, 5), tokens_per_word=(2, 4),
                 frames_per_token=(3, 10), gap_frames=(8, 24), edge_frames=(4, 12)):
    """Generate `n_songs` synthetic songs; identical seeds give identical bytes."""
    if n_songs < 1:
        raise ValueError("n_songs must be >= 1")
    if vocab is None:
        vocab = default_vocabulary()
    templates = token_templates(seed)
    silence_template = np.full(N_MELS, -4.0)
    master = np.random.default_rng(seed)
    songs = []
    for index in range(n_songs):
        rng = np.random.default_rng(master.integers(0, 2**63 - 1))
        ids = []
        word_starts = []
        sentence_starts = []
        source_words = []
        emissions = []   # (token_id or None for silence-audio, n_frames, token_position or None)

        def emit_silence(n):
            emissions.append((None, int(n)))

        emit_silence(rng.integers(edge_frames[0], edge_frames[1] + 1))
        n_lines = int(rng.integers(lines_range[0], lines_range[1] + 1))
        for line in range(n_lines):
            if line > 0:
                ids.append(vocab.silence_id)
                emit_silence(rng.integers(gap_frames[0], gap_frames[1] + 1))
            sentence_starts.append(len(ids))
            n_words = int(rng.integers(words_per_line[0], words_per_line[1] + 1))
            for _ in range(n_words):
                word_starts.append(len(ids))
                n_tokens = int(rng.integers(tokens_per_word[0], tokens_per_word[1] + 1))
                word_ids = [int(t) for t in rng.integers(1, len(vocab), size=n_tokens)]
                source_words.append("".join(vocab.symbol_of(t) for t in word_ids))
                for t in word_ids:
                    ids.append(t)
                    emissions.append((t, int(rng.integers(frames_per_token[0],
                                                          frames_per_token[1] + 1))))
        emit_silence(rng.integers(edge_frames[0], edge_frames[1] + 1))

        # render frames and record per-token onsets; the single inter-line
        # silence token is anchored at the start of its silence gap
        frames = []
        for token_id, n in emissions:
            template = silence_template if token_id is None else templates[token_id]
            block = np.tile(template, (n, 1)) + noise_sigma * rng.standard_normal((n, N_MELS))
            frames.append(block)
        all_frames = np.concatenate(frames, axis=0).astype(np.float32)
        onsets_full = _full_onsets(ids, vocab.silence_id, emissions)

        tokens = TokenSequence(
            tokens=ids, word_starts=word_starts, sentence_starts=sentence_starts,
            source_words=source_words, language_tag="synthetic",
            silence_id=vocab.silence_id,
        )
        features = MelFeatures(frames=all_frames, stack_factor=1)
        spf = features.seconds_per_frame
        song = SynthSong(
            song_id=f"synth-{seed}-{index:04d}",
            tokens=tokens,
            features_word=features,
            token_onset_frames=onsets_full,
            word_onsets_sec=[onsets_full[w] * spf for w in word_starts],
            sentence_onsets_sec=[onsets_full[s] * spf for s in sentence_starts],
            duration_sec=features.duration_sec,
        )
        songs.append(song)
    return SynthCorpus(songs, seed)


def _full_onsets(ids, silence_id, emissions):
    """Frame onset for every token id, including inter-line silence tokens.

    Emissions align 1:1 with ids after the leading silence block; the
    trailing silence block has no token.
    """
    onsets = []
    frame = emissions[0][1]
    for pos in range(len(ids)):
        onsets.append(frame)
        frame += emissions[pos + 1][1]
    return onsets
