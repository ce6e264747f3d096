"""Log-Mel spectrograms on the speech model's frame grid.

Framing is fixed to 25 ms windows every 20 ms at 16 kHz (400/320
samples), which produces exactly the same frame count as the speech
encoder's convolutional front end, so one alignment file serves both
streams. Only the filter count is configurable.
"""

from __future__ import annotations

import numpy as np

SAMPLE_RATE = 16000
WIN_LENGTH = 400
HOP_LENGTH = 320
N_FFT = 512
LOG_FLOOR = 1e-10


def frame_count(n_samples: int) -> int:
    if n_samples < WIN_LENGTH:
        return 0
    return (n_samples - WIN_LENGTH) // HOP_LENGTH + 1


def mel_filterbank(n_mels: int, n_fft: int = N_FFT, rate: int = SAMPLE_RATE) -> np.ndarray:
    """Triangular filters on the HTK mel scale, [n_mels, n_fft//2 + 1]."""
    hz_to_mel = lambda hz: 2595.0 * np.log10(1.0 + hz / 700.0)  # noqa: E731
    mel_to_hz = lambda mel: 700.0 * (10.0 ** (mel / 2595.0) - 1.0)  # noqa: E731
    mel_points = np.linspace(hz_to_mel(0.0), hz_to_mel(rate / 2), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    bins = np.floor((n_fft + 1) * hz_points / rate).astype(int)
    bank = np.zeros((n_mels, n_fft // 2 + 1))
    for m in range(1, n_mels + 1):
        left, center, right = bins[m - 1], bins[m], bins[m + 1]
        for k in range(left, center):
            if center > left:
                bank[m - 1, k] = (k - left) / (center - left)
        for k in range(center, right):
            if right > center:
                bank[m - 1, k] = (right - k) / (right - center)
    return bank


def log_mel_spectrogram(samples: np.ndarray, n_mels: int = 80) -> np.ndarray:
    """[n_frames, n_mels] log-compressed Mel energies; empty if too short."""
    samples = np.asarray(samples, dtype=np.float64)
    n_frames = frame_count(samples.size)
    if n_frames == 0:
        return np.zeros((0, n_mels))
    window = np.hanning(WIN_LENGTH)
    idx = np.arange(WIN_LENGTH)[None, :] + HOP_LENGTH * np.arange(n_frames)[:, None]
    frames = samples[idx] * window[None, :]
    spectrum = np.abs(np.fft.rfft(frames, n=N_FFT, axis=1)) ** 2
    bank = mel_filterbank(n_mels)
    return np.log(np.maximum(spectrum @ bank.T, LOG_FLOOR))
