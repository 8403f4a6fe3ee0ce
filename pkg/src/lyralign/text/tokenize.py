"""Lyrics -> IPA token sequences with word/sentence boundary bookkeeping."""

import re
from dataclasses import dataclass

from lyralign.errors import EmptyLyrics
from lyralign.text.g2p import get_backend
from lyralign.text.vocabulary import default_vocabulary

_PUNCT = re.compile(r"[^\w]+", re.UNICODE)


@dataclass
class TokenSequence:
    """Vocabulary ids plus the word/sentence structure that produced them.

    word_starts[i] is the index of the first token of word i;
    sentence_starts[s] is the index of the first token of sentence (line) s
    and is always also a word start. Inter-line silence tokens belong to no
    word.
    """

    tokens: list
    word_starts: list
    sentence_starts: list
    source_words: list
    language_tag: str = ""
    silence_id: int = 0

    def __post_init__(self):
        n = len(self.tokens)
        for name, starts in (("word_starts", self.word_starts), ("sentence_starts", self.sentence_starts)):
            if any(not 0 <= s < n for s in starts):
                raise ValueError(f"{name} out of range for {n} tokens")
            if any(b <= a for a, b in zip(starts, starts[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if len(self.source_words) != len(self.word_starts):
            raise ValueError("source_words and word_starts must have equal length")
        word_set = set(self.word_starts)
        if any(s not in word_set for s in self.sentence_starts):
            raise ValueError("every sentence start must also be a word start")

    def __len__(self):
        return len(self.tokens)

    @property
    def n_sentences(self):
        return len(self.sentence_starts)

    @property
    def n_words(self):
        return len(self.word_starts)

    def sentence_token_ranges(self):
        """Per-sentence (start, end) token ranges, trailing silence trimmed."""
        ranges = []
        bounds = list(self.sentence_starts) + [len(self.tokens)]
        for start, nxt in zip(bounds, bounds[1:]):
            end = nxt
            while end > start and self.tokens[end - 1] == self.silence_id:
                end -= 1
            ranges.append((start, end))
        return ranges

    def word_indices_in_sentence(self, sentence):
        start, end = self.sentence_token_ranges()[sentence]
        return [i for i, ws in enumerate(self.word_starts) if start <= ws < end]

    def sentence_text(self, sentence):
        return " ".join(self.source_words[i] for i in self.word_indices_in_sentence(sentence))


def _clean_word(word):
    return _PUNCT.sub("", word).lower()


def lyrics_to_ipa(raw_lyrics, language, g2p=None, vocab=None,
                  allow_char_fallback=True, lead_silence=False, trail_silence=False):
    """Convert newline-segmented lyrics into an in-vocabulary TokenSequence.

    One silence token separates consecutive lines; none are inserted
    between words within a line. Punctuation is stripped before g2p;
    digits pass through the backend.

    Raises EmptyLyrics when no line yields tokens, UnknownLanguage when no
    backend exists and the character fallback is disabled, and NoMapping
    when the backend emits a symbol missing from vocabulary and fallback
    table alike.
    """
    if vocab is None:
        vocab = default_vocabulary()
    if g2p is None:
        g2p = get_backend(language, allow_char_fallback=allow_char_fallback)

    tokens = []
    word_starts = []
    sentence_starts = []
    source_words = []

    for line in raw_lyrics.split("\n"):
        line_words = []
        for raw_word in line.split():
            cleaned = _clean_word(raw_word)
            if not cleaned:
                continue
            symbols = g2p.phonemize_word(cleaned)
            if not symbols:
                continue
            line_words.append((raw_word, [vocab.map_oov(s) for s in symbols]))
        if not line_words:
            continue
        if sentence_starts or lead_silence:
            tokens.append(vocab.silence_id)
        sentence_starts.append(len(tokens))
        for raw_word, ids in line_words:
            word_starts.append(len(tokens))
            source_words.append(raw_word)
            tokens.extend(ids)

    if not tokens:
        raise EmptyLyrics("lyrics contain no alignable line")
    if trail_silence:
        tokens.append(vocab.silence_id)

    return TokenSequence(
        tokens=tokens,
        word_starts=word_starts,
        sentence_starts=sentence_starts,
        source_words=source_words,
        language_tag=language,
        silence_id=vocab.silence_id,
    )
