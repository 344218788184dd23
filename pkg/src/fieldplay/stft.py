"""Short-time Fourier analysis and weighted overlap-add resynthesis.

Frames are left-aligned (frame k starts at sample k*hop, no centering) and
the tail is zero-padded, so frame count = ceil((n - window) / hop) + 1.  The
window is a periodic Hann; with hop <= window/2 the squared window overlap-adds
to a constant, which makes `istft(stft(x))` an exact reconstruction.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.signal import get_window

from fieldplay.accel import gather_windowed, overlap_add
from fieldplay.scene import AudioClip


class ColaError(ValueError):
    """Window/hop combination does not overlap-add to a constant."""


def hann_window(window_len: int) -> np.ndarray:
    """Periodic Hann window (the variant whose overlaps sum exactly)."""
    return get_window("hann", window_len, fftbins=True)


@dataclass(frozen=True)
class Spectrogram:
    """Complex STFT frames, shape (num_frames, fft_len // 2 + 1)."""

    frames: np.ndarray
    window_len: int
    hop: int
    fft_len: int
    sample_rate: int
    num_samples: Union[int, None] = None  # original clip length, for exact inversion

    def __post_init__(self):
        if self.fft_len < self.window_len:
            raise ValueError(f"fft_len ({self.fft_len}) must be >= window_len "
                             f"({self.window_len})")
        if self.hop > self.window_len:
            raise ValueError(f"hop ({self.hop}) must be <= window_len "
                             f"({self.window_len})")
        expected_bins = self.fft_len // 2 + 1
        if self.frames.ndim != 2 or self.frames.shape[1] != expected_bins:
            raise ValueError(f"frames must be (num_frames, {expected_bins}), got "
                             f"{self.frames.shape}")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_bins(self) -> int:
        return self.frames.shape[1]

    def frame_center_times(self) -> np.ndarray:
        starts = np.arange(self.num_frames) * self.hop
        return (starts + self.window_len / 2) / self.sample_rate


def _validate_params(window_len, hop, fft_len):
    if hop <= 0 or window_len <= 0:
        raise ValueError("window_len and hop must be positive")
    if window_len % hop:
        raise ValueError(f"hop ({hop}) must divide window_len ({window_len})")
    if fft_len < window_len:
        raise ValueError(f"fft_len ({fft_len}) must be >= window_len ({window_len})")


def num_frames_for(num_samples: int, window_len: int, hop: int) -> int:
    return max(1, math.ceil((num_samples - window_len) / hop) + 1)


def stft(clip: AudioClip, window_len: int = 1024, hop: int = 256,
         fft_len: Union[int, None] = None) -> Spectrogram:
    """Windowed FFT frames of a mono clip (periodic Hann analysis window)."""
    x = clip.mono()
    if fft_len is None:
        fft_len = window_len
    _validate_params(window_len, hop, fft_len)
    window = hann_window(window_len)
    starts = np.arange(num_frames_for(len(x), window_len, hop)) * hop
    buf = gather_windowed(x, starts, window, fft_len)
    return Spectrogram(frames=np.fft.rfft(buf, axis=1), window_len=window_len,
                       hop=hop, fft_len=fft_len, sample_rate=clip.sample_rate,
                       num_samples=len(x))


def istft(spec: Spectrogram) -> AudioClip:
    """Weighted overlap-add inverse: synthesis-windowed frames over sum(w^2).

    Exact (to rounding) wherever the window envelope is nonzero; requires a
    COLA-compliant hop (hop divides the window and is at most half of it).
    """
    if spec.window_len % spec.hop or spec.hop > spec.window_len // 2:
        raise ColaError(f"hop {spec.hop} with window {spec.window_len} does not "
                        f"satisfy constant overlap-add")
    window = hann_window(spec.window_len)
    frames_t = np.fft.irfft(spec.frames, n=spec.fft_len, axis=1)
    frames_t = frames_t[:, :spec.window_len] * window  # synthesis window

    starts = np.arange(spec.num_frames, dtype=np.int64) * spec.hop
    out_len = (spec.num_frames - 1) * spec.hop + spec.window_len
    acc = overlap_add(np.zeros(out_len), np.ascontiguousarray(frames_t), starts)
    envelope = overlap_add(np.zeros(out_len),
                           np.tile(window * window, (spec.num_frames, 1)), starts)
    nonzero = envelope > 1e-12
    acc[nonzero] /= envelope[nonzero]
    if spec.num_samples is not None:
        acc = acc[:spec.num_samples]
    return AudioClip(acc, spec.sample_rate)
