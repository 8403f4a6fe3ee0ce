"""Waveform augmentations applied before mel extraction.

All transforms are time-preserving: they change sample values but never
move events in time, so alignment targets stay valid untouched. Each takes
(waveform, sample_rate, rng, **params) and returns a same-length waveform.
"""

import numpy as np
from scipy import signal


def add_gaussian_noise(waveform, sample_rate, rng, min_amplitude=0.001, max_amplitude=0.015):
    amp = rng.uniform(min_amplitude, max_amplitude)
    return waveform + amp * rng.standard_normal(waveform.shape)


def polarity_inversion(waveform, sample_rate, rng):
    return -waveform


def gain(waveform, sample_rate, rng, min_db=-12.0, max_db=12.0):
    db = rng.uniform(min_db, max_db)
    return waveform * (10.0 ** (db / 20.0))


def band_pass_filter(waveform, sample_rate, rng, min_center_hz=200.0, max_center_hz=4000.0,
                     bandwidth_fraction=1.0, order=4):
    center = rng.uniform(min_center_hz, max_center_hz)
    half = 0.5 * bandwidth_fraction * center
    low = max(center - half, 10.0)
    high = min(center + half, sample_rate / 2 - 10.0)
    sos = signal.butter(order, [low, high], btype="bandpass", fs=sample_rate, output="sos")
    # zero-phase filtering keeps onsets where they are
    return signal.sosfiltfilt(sos, waveform)


def pitch_shift(waveform, sample_rate, rng, min_semitones=-2.0, max_semitones=2.0,
                n_fft=1024, hop=256):
    """Frame-wise spectral shift: pitch moves, the frame grid does not."""
    semitones = rng.uniform(min_semitones, max_semitones)
    factor = 2.0 ** (semitones / 12.0)
    _, _, stft = signal.stft(waveform, fs=sample_rate, nperseg=n_fft, noverlap=n_fft - hop)
    n_bins = stft.shape[0]
    source_bins = np.arange(n_bins) / factor
    lower = np.floor(source_bins).astype(int)
    frac = source_bins - lower
    valid = lower < n_bins - 1
    shifted = np.zeros_like(stft)
    shifted[valid] = (stft[lower[valid]] * (1 - frac[valid, None])
                      + stft[lower[valid] + 1] * frac[valid, None])
    _, out = signal.istft(shifted, fs=sample_rate, nperseg=n_fft, noverlap=n_fft - hop)
    if out.size >= waveform.size:
        return out[: waveform.size]
    return np.pad(out, (0, waveform.size - out.size))


TRANSFORMS = {
    "add_gaussian_noise": add_gaussian_noise,
    "pitch_shift": pitch_shift,
    "polarity_inversion": polarity_inversion,
    "band_pass_filter": band_pass_filter,
    "gain": gain,
}


def apply_chain(waveform, sample_rate, chain, rng):
    """Apply an ordered list of ("name", params) transforms."""
    out = np.asarray(waveform, dtype=np.float64)
    for entry in chain:
        name, params = (entry[0], dict(entry[1])) if isinstance(entry, (tuple, list)) else (entry, {})
        if name == "feature_noise":
            continue  # feature-space transform, handled by the trainer
        if name not in TRANSFORMS:
            raise KeyError(f"unknown augmentation {name!r}")
        out = TRANSFORMS[name](out, sample_rate, rng, **params)
    return out
