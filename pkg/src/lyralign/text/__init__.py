from lyralign.text.vocabulary import Vocabulary, default_vocabulary, map_oov_symbol
from lyralign.text.g2p import (
    CharacterFallbackG2P,
    G2PBackend,
    KoreanJamoG2P,
    LexiconEnglishG2P,
    get_backend,
    register_backend,
)
from lyralign.text.tokenize import TokenSequence, lyrics_to_ipa

__all__ = [
    "Vocabulary",
    "default_vocabulary",
    "map_oov_symbol",
    "G2PBackend",
    "LexiconEnglishG2P",
    "KoreanJamoG2P",
    "CharacterFallbackG2P",
    "register_backend",
    "get_backend",
    "TokenSequence",
    "lyrics_to_ipa",
]
