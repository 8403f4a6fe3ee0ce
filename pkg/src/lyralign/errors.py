"""Exception hierarchy shared by all lyralign modules."""


class LyralignError(Exception):
    """Base class for all toolkit errors."""


# --- text pipeline ---

class EmptyLyrics(LyralignError):
    """Lyrics contain no non-blank line."""


class UnknownLanguage(LyralignError):
    """No g2p backend registered for the language and fallback disabled."""


class NoMapping(LyralignError):
    """IPA symbol absent from both the vocabulary and the fallback table."""


# --- audio pipeline ---

class EmptyAudio(LyralignError):
    """Waveform has no samples."""


class CorruptAudio(LyralignError):
    """Audio file could not be decoded."""


class AlreadyStacked(LyralignError):
    """Frame stacking applied to features that are already stacked."""


# --- model ---

class TokenOutOfRange(LyralignError):
    """Token id is not a valid vocabulary index."""


class StackFactorMismatch(LyralignError):
    """Feature stack factor does not match the model level."""


class ShapeMismatch(LyralignError):
    """Tensor shapes are incompatible for the requested operation."""


class EmptyEnsemble(LyralignError):
    """Ensemble averaging requested over zero members."""


class InputTooShort(LyralignError):
    """Sequence too short for the predictor's pooling depth."""


# --- training ---

class NoSupervisedRows(LyralignError):
    """Training target supervises no rows."""


class DataLevelMismatch(LyralignError):
    """Corpus level (sentence/word) differs from the training spec level."""


class DivergedLoss(LyralignError):
    """Training loss became NaN/Inf."""


# --- metrics ---

class EmptySong(LyralignError):
    """Metric requested over zero words."""


class NonpositiveDuration(LyralignError):
    """Song duration must be > 0."""


class EmptyInput(LyralignError):
    """Operation requested over an empty collection."""


# --- datasets / inspection ---

class ParseError(LyralignError):
    """Malformed manifest or labels file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateId(LyralignError):
    """Manifest contains two records with the same id."""


class UnknownSong(LyralignError):
    """Song id not present in the store."""


class UnknownUnit(LyralignError):
    """Unit reference does not resolve to a sentence or word."""


class IllegalTransition(LyralignError):
    """Song status transition violates the review state machine."""
