"""WAV decoding and resampling to the 16 kHz model rate."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

TARGET_RATE = 16000

_WIDTH_DTYPES = {2: np.int16, 4: np.int32}


def load_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Decode a PCM WAV file to mono float64 in [-1, 1]."""
    try:
        with wave.open(str(path), "rb") as wav:
            n_channels = wav.getnchannels()
            width = wav.getsampwidth()
            rate = wav.getframerate()
            frames = wav.readframes(wav.getnframes())
    except (wave.Error, EOFError) as exc:
        raise ValueError(f"{path}: not a decodable WAV file ({exc})") from exc
    if width not in _WIDTH_DTYPES:
        raise ValueError(f"{path}: unsupported sample width {width} bytes")
    dtype = _WIDTH_DTYPES[width]
    samples = np.frombuffer(frames, dtype=dtype).astype(np.float64)
    samples /= float(np.iinfo(dtype).max)
    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1)
    return samples, rate


def resample_to_16k(samples: np.ndarray, rate: int) -> np.ndarray:
    if rate == TARGET_RATE:
        return np.asarray(samples, dtype=np.float64)
    if rate < 1:
        raise ValueError(f"bad sample rate {rate}")
    g = np.gcd(TARGET_RATE, rate)
    return resample_poly(np.asarray(samples, dtype=np.float64), TARGET_RATE // g, rate // g)
