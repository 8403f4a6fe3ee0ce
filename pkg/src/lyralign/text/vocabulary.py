"""Fixed 76-token IPA vocabulary (75 symbols + silence) with OOV fallback."""

import functools
from importlib import resources
from pathlib import Path

from lyralign.errors import NoMapping

SILENCE = "<sil>"


class Vocabulary:
    """Bijective symbol<->id table plus a nearest-pronunciation fallback map.

    The fallback map sends out-of-vocabulary IPA symbols to in-vocabulary
    ones; in-vocabulary symbols always map to themselves, so `map_oov`
    is idempotent over its whole domain.
    """

    def __init__(self, entries, fallback_map=None):
        self.entries = list(entries)
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("vocabulary entries must be unique")
        if SILENCE not in self.entries:
            raise ValueError(f"vocabulary must contain the {SILENCE} entry")
        self.silence_id = self.entries.index(SILENCE)
        self._ids = {s: i for i, s in enumerate(self.entries)}
        self.fallback_map = dict(fallback_map or {})
        for oov, target in self.fallback_map.items():
            if target not in self._ids:
                raise ValueError(f"fallback target {target!r} (for {oov!r}) not in vocabulary")

    def __len__(self):
        return len(self.entries)

    def __contains__(self, symbol):
        return symbol in self._ids

    @property
    def symbols(self):
        """The 75 IPA symbols, excluding the silence entry."""
        return [s for s in self.entries if s != SILENCE]

    def id_of(self, symbol):
        return self._ids[symbol]

    def symbol_of(self, token_id):
        return self.entries[token_id]

    def map_oov(self, symbol):
        """Return the in-vocabulary id for `symbol`, applying the fallback map.

        Raises NoMapping when the symbol is in neither table; that is the
        signal that the fallback table needs a new entry.
        """
        if symbol in self._ids:
            return self._ids[symbol]
        target = self.fallback_map.get(symbol)
        if target is None:
            raise NoMapping(f"IPA symbol {symbol!r} has no vocabulary entry or fallback")
        return self._ids[target]


def map_oov_symbol(symbol, vocab):
    """Functional form of Vocabulary.map_oov."""
    return vocab.map_oov(symbol)


def load_vocabulary(vocab_path, fallback_path=None):
    """Load a vocabulary file (one symbol per line, line index = id)."""
    entries = Path(vocab_path).read_text(encoding="utf-8").splitlines()
    entries = [line for line in entries if line]
    fallback = {}
    if fallback_path is not None:
        fallback = _parse_fallback(Path(fallback_path).read_text(encoding="utf-8"))
    return Vocabulary(entries, fallback)


def _parse_fallback(text):
    table = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"fallback table line needs two columns: {raw!r}")
        table[parts[0]] = parts[1]
    return table


@functools.lru_cache(maxsize=1)
def default_vocabulary():
    """The checked-in v1 vocabulary shared by every stock model."""
    data = resources.files("lyralign.text") / "data"
    return load_vocabulary(data / "vocab.txt", data / "fallback.tsv")
