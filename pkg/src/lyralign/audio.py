"""Separated-vocal waveforms -> log-mel features, frame stacking, caching.

Fixed analysis parameters: 16 kHz sample rate, 1024-sample Hann window,
512-sample hop, 80 mel bins (HTK mel scale), natural log of (mel magnitude
+ 1e-5). The STFT uses centered frames with reflect padding; frame count
for N samples is floor(N / hop) + 1.
"""

import struct
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from lyralign.errors import AlreadyStacked, CorruptAudio, EmptyAudio

SAMPLE_RATE = 16000
WINDOW = 1024
HOP = 512
N_MELS = 80
LOG_FLOOR = 1e-5

_CACHE_MAGIC = b"LYRF"
_CACHE_VERSION = 1


@dataclass
class MelFeatures:
    """[T x F] log-mel frames plus the metadata needed to map frames to time."""

    frames: np.ndarray
    sample_rate: int = SAMPLE_RATE
    hop: int = HOP
    stack_factor: int = 1

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 2:
            raise ValueError("frames must be a 2-D [T x F] array")
        if self.frames.shape[1] != N_MELS * self.stack_factor:
            raise ValueError(
                f"F={self.frames.shape[1]} inconsistent with stack_factor {self.stack_factor} "
                f"(expected {N_MELS * self.stack_factor})"
            )
        if not np.all(np.isfinite(self.frames)):
            raise ValueError("frames contain non-finite values")

    @property
    def n_frames(self):
        return self.frames.shape[0]

    @property
    def n_bins(self):
        return self.frames.shape[1]

    @property
    def seconds_per_frame(self):
        return self.hop * self.stack_factor / self.sample_rate

    @property
    def duration_sec(self):
        return self.n_frames * self.seconds_per_frame


def frame_to_seconds(frame_index, features):
    """Left edge of `frame_index` in seconds."""
    if frame_index < 0:
        raise ValueError("frame_index must be >= 0")
    return frame_index * features.seconds_per_frame


def seconds_to_frame(seconds, features):
    """Frame whose span contains `seconds` (floor)."""
    return int(seconds / features.seconds_per_frame)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_center_frequencies(n_mels=N_MELS, sample_rate=SAMPLE_RATE, fmin=0.0, fmax=None):
    """Center frequencies (Hz) of the triangular mel filters."""
    if fmax is None:
        fmax = sample_rate / 2
    mels = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    return mel_to_hz(mels)[1:-1]


def mel_filterbank(n_mels=N_MELS, n_fft=WINDOW, sample_rate=SAMPLE_RATE, fmin=0.0, fmax=None):
    """[n_mels x (n_fft//2+1)] triangular filterbank on the HTK mel scale."""
    if fmax is None:
        fmax = sample_rate / 2
    mel_points = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    fft_freqs = np.linspace(0.0, sample_rate / 2, n_fft // 2 + 1)
    fb = np.zeros((n_mels, len(fft_freqs)))
    for m in range(n_mels):
        lower, center, upper = mel_points[m], mel_points[m + 1], mel_points[m + 2]
        up = (fft_freqs - lower) / (center - lower)
        down = (upper - fft_freqs) / (upper - center)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    return fb.astype(np.float64)


def load_audio(path):
    """Read WAV (FLAC via optional soundfile) as mono float64 + sample rate.

    Stereo is downmixed by averaging channels.
    """
    path = str(path)
    if path.lower().endswith(".flac"):
        try:
            import soundfile
        except ImportError as exc:
            raise CorruptAudio("FLAC input requires the optional 'soundfile' package") from exc
        try:
            data, sr = soundfile.read(path, dtype="float64", always_2d=True)
        except Exception as exc:
            raise CorruptAudio(f"could not decode {path}: {exc}") from exc
        return data.mean(axis=1), sr
    try:
        sr, data = wavfile.read(path)
    except Exception as exc:
        raise CorruptAudio(f"could not decode {path}: {exc}") from exc
    data = np.asarray(data)
    if data.dtype.kind == "i":
        data = data.astype(np.float64) / float(np.iinfo(data.dtype).max)
    elif data.dtype.kind == "u":
        info = np.iinfo(data.dtype)
        data = (data.astype(np.float64) - (info.max + 1) / 2) / ((info.max + 1) / 2)
    else:
        data = data.astype(np.float64)
    if data.ndim == 2:
        data = data.mean(axis=1)
    return data, sr


def save_wav(path, waveform, sample_rate=SAMPLE_RATE):
    wavfile.write(str(path), sample_rate, np.asarray(waveform, dtype=np.float32))


def resample(waveform, sr_in, sr_out=SAMPLE_RATE):
    if sr_in == sr_out:
        return np.asarray(waveform, dtype=np.float64)
    from math import gcd

    g = gcd(int(sr_in), int(sr_out))
    return resample_poly(np.asarray(waveform, dtype=np.float64), sr_out // g, sr_in // g)


def wav_to_mel(waveform, sample_rate=SAMPLE_RATE):
    """Log-mel features (stack_factor 1) at the fixed analysis parameters."""
    waveform = np.asarray(waveform, dtype=np.float64)
    if waveform.ndim == 2:
        waveform = waveform.mean(axis=1)
    if waveform.size == 0:
        raise EmptyAudio("waveform has no samples")
    if not np.all(np.isfinite(waveform)):
        raise CorruptAudio("waveform contains non-finite samples")
    if sample_rate != SAMPLE_RATE:
        waveform = resample(waveform, sample_rate, SAMPLE_RATE)

    pad = WINDOW // 2
    if waveform.size > 1:
        padded = np.pad(waveform, pad, mode="reflect")
    else:
        padded = np.pad(waveform, pad, mode="edge")
    n_frames = waveform.size // HOP + 1
    window = np.hanning(WINDOW)
    idx = np.arange(WINDOW)[None, :] + HOP * np.arange(n_frames)[:, None]
    # guard the final frame against running off the padded buffer
    if idx[-1, -1] >= padded.size:
        padded = np.pad(padded, (0, idx[-1, -1] - padded.size + 1), mode="edge")
    spectrum = np.abs(np.fft.rfft(padded[idx] * window, axis=1))
    mel = spectrum @ mel_filterbank().T
    frames = np.log(mel + LOG_FLOOR)
    return MelFeatures(frames=frames.astype(np.float32), sample_rate=SAMPLE_RATE, hop=HOP, stack_factor=1)


def stack_frames(features, factor=4):
    """Concatenate `factor` consecutive frames along frequency (pure reshape).

    T is right-padded to a multiple of `factor` by repeating the final
    frame, so the last stacked frame may contain repeats.
    """
    if features.stack_factor != 1:
        raise AlreadyStacked(f"features already stacked by {features.stack_factor}")
    frames = features.frames
    t = frames.shape[0]
    remainder = t % factor
    if remainder:
        pad = np.repeat(frames[-1:], factor - remainder, axis=0)
        frames = np.concatenate([frames, pad], axis=0)
    stacked = frames.reshape(-1, factor * frames.shape[1])
    return MelFeatures(frames=stacked, sample_rate=features.sample_rate, hop=features.hop, stack_factor=factor)


def unstack_frames(features):
    """Inverse reshape of stack_frames (padding frames are not removed)."""
    if features.stack_factor == 1:
        raise AlreadyStacked("features are not stacked")
    factor = features.stack_factor
    frames = features.frames.reshape(-1, features.frames.shape[1] // factor)
    return MelFeatures(frames=frames, sample_rate=features.sample_rate, hop=features.hop, stack_factor=1)


def save_features(path, features):
    """Write the single-file binary cache: magic, version, header, float32 rows."""
    frames = np.ascontiguousarray(features.frames, dtype=np.float32)
    header = struct.pack(
        "<4sIIIIIII",
        _CACHE_MAGIC,
        _CACHE_VERSION,
        features.sample_rate,
        features.hop,
        N_MELS,
        features.stack_factor,
        frames.shape[0],
        frames.shape[1],
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(frames.tobytes())


def load_features(path):
    with open(path, "rb") as fh:
        header = fh.read(struct.calcsize("<4sIIIIIII"))
        magic, version, sr, hop, n_mels, stack, t, f = struct.unpack("<4sIIIIIII", header)
        if magic != _CACHE_MAGIC:
            raise CorruptAudio(f"{path}: not a feature cache file")
        if version != _CACHE_VERSION:
            raise CorruptAudio(f"{path}: unsupported cache version {version}")
        if n_mels != N_MELS:
            raise CorruptAudio(f"{path}: unexpected mel count {n_mels}")
        frames = np.frombuffer(fh.read(4 * t * f), dtype=np.float32).reshape(t, f)
    return MelFeatures(frames=frames.copy(), sample_rate=sr, hop=hop, stack_factor=stack)
