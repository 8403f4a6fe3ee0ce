"""Grapheme-to-phoneme backends and their registry.

The toolkit does not implement g2p research itself; it ships small
deterministic backends good enough for fixtures and desk-scale runs:

* `LexiconEnglishG2P` -- checked-in General-American lexicon, spelling out
  unknown words letter by letter.
* `KoreanJamoG2P` -- Hangul syllable decomposition with a jamo->IPA table.
* `CharacterFallbackG2P` -- letter-by-letter transliteration usable for any
  Latin-script language when no dedicated backend is registered.

All bundled backends are stateless after construction and therefore
reentrant; adapters wrapping stateful third-party libraries must document
whether they need one instance per worker.
"""

from importlib import resources

from lyralign.errors import UnknownLanguage

# Letter-by-letter table shared by the English OOV path and the character
# fallback backend. Values are symbol lists (x -> k s).
LETTER_IPA = {
    "a": ["æ"], "b": ["b"], "c": ["k"], "d": ["d"], "e": ["ɛ"], "f": ["f"],
    "g": ["g"], "h": ["h"], "i": ["ɪ"], "j": ["ʤ"], "k": ["k"], "l": ["l"],
    "m": ["m"], "n": ["n"], "o": ["ɒ"], "p": ["p"], "q": ["k"], "r": ["r"],
    "s": ["s"], "t": ["t"], "u": ["ʌ"], "v": ["v"], "w": ["w"], "x": ["k", "s"],
    "y": ["j"], "z": ["z"],
}

DIGIT_IPA = {
    "0": ["z", "ɪə", "r", "oʊ"],
    "1": ["w", "ʌ", "n"],
    "2": ["t", "u"],
    "3": ["θ", "r", "i"],
    "4": ["f", "ɔ", "r"],
    "5": ["f", "aɪ", "v"],
    "6": ["s", "ɪ", "k", "s"],
    "7": ["s", "ɛ", "v", "ə", "n"],
    "8": ["eɪ", "t"],
    "9": ["n", "aɪ", "n"],
}


class G2PBackend:
    """Protocol: map one word to a list of IPA symbol strings."""

    name = "base"
    reentrant = True

    def phonemize_word(self, word):
        raise NotImplementedError


def _spell_out(word):
    symbols = []
    for ch in word.lower():
        if ch in LETTER_IPA:
            symbols.extend(LETTER_IPA[ch])
        elif ch in DIGIT_IPA:
            symbols.extend(DIGIT_IPA[ch])
    return symbols


class CharacterFallbackG2P(G2PBackend):
    """Letter/digit transliteration for languages without a backend."""

    name = "char-fallback"

    def phonemize_word(self, word):
        return _spell_out(word)


class LexiconEnglishG2P(G2PBackend):
    """English g2p backed by the checked-in lexicon file.

    Words missing from the lexicon are spelled out with LETTER_IPA, which
    keeps the output total at the cost of accuracy; extend the lexicon
    rather than relying on that path.
    """

    name = "en-lexicon"

    def __init__(self, lexicon_path=None):
        if lexicon_path is None:
            lexicon_path = resources.files("lyralign.text") / "data" / "english_lexicon.txt"
        self.lexicon = {}
        for raw in lexicon_path.read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            word, *symbols = line.split()
            self.lexicon[word] = symbols

    def phonemize_word(self, word):
        entry = self.lexicon.get(word.lower())
        if entry is not None:
            return list(entry)
        return _spell_out(word)


# Hangul syllables decompose arithmetically: code = 0xAC00
#   + 588*initial + 28*medial + final.
_KO_INITIALS = [
    ["k"], ["k͈"], ["n"], ["t"], ["t͈"], ["ɾ"], ["m"], ["p"], ["p͈"], ["s"],
    ["s͈"], [], ["ʨ"], ["ʨ͈"], ["ʨʰ"], ["kʰ"], ["tʰ"], ["pʰ"], ["h"],
]
_KO_MEDIALS = [
    ["a"], ["ɛ"], ["j", "a"], ["j", "ɛ"], ["ʌ"], ["e"], ["j", "ʌ"], ["j", "e"],
    ["o"], ["w", "a"], ["w", "ɛ"], ["ø"], ["j", "o"], ["u"], ["w", "ʌ"],
    ["w", "e"], ["y"], ["j", "u"], ["ɯ"], ["ɰ", "i"], ["i"],
]
_KO_FINALS = [
    [], ["k̚"], ["k̚"], ["k̚"], ["n"], ["n"], ["n"], ["t̚"], ["ɭ"], ["k̚"],
    ["m"], ["ɭ"], ["ɭ"], ["ɭ"], ["p̚"], ["ɭ"], ["m"], ["p̚"], ["p̚"], ["t̚"],
    ["t̚"], ["ŋ"], ["t̚"], ["t̚"], ["k̚"], ["t̚"], ["p̚"], ["t̚"],
]


class KoreanJamoG2P(G2PBackend):
    """Syllable-level Hangul-to-IPA transliteration.

    This is a plain jamo mapping, not full Korean phonology (no liaison or
    assimilation rules); it is deterministic and covers every Hangul
    syllable, which is what the fixtures need.
    """

    name = "ko-jamo"

    def phonemize_word(self, word):
        symbols = []
        for ch in word:
            code = ord(ch) - 0xAC00
            if 0 <= code < 11172:
                initial, rem = divmod(code, 588)
                medial, final = divmod(rem, 28)
                symbols.extend(_KO_INITIALS[initial])
                symbols.extend(_KO_MEDIALS[medial])
                symbols.extend(_KO_FINALS[final])
            else:
                symbols.extend(_spell_out(ch))
        return symbols


_REGISTRY = {}


def register_backend(language, backend):
    _REGISTRY[language.lower()] = backend


def get_backend(language, allow_char_fallback=True):
    """Resolve the backend for a language tag (primary subtag only)."""
    tag = language.lower().split("-")[0]
    backend = _REGISTRY.get(tag)
    if backend is not None:
        return backend
    if allow_char_fallback:
        return CharacterFallbackG2P()
    raise UnknownLanguage(f"no g2p backend registered for {language!r} and character fallback disabled")


register_backend("en", LexiconEnglishG2P())
register_backend("ko", KoreanJamoG2P())
