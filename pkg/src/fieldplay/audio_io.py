"""RIFF WAV reading/writing and sample-rate conversion.

Reads PCM 16/24-bit and 32-bit float WAV at any rate; everything is
normalized to float64 in [-1, 1] on load and resampled (polyphase
windowed-sinc) to the session rate where one is given.  Stereo renders are
written back as 32-bit float WAV.
"""

import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from fieldplay.scene import AudioClip, SceneFileError

_NORMALIZERS = {
    np.dtype(np.int16): 1.0 / 2 ** 15,
    np.dtype(np.int32): 1.0 / 2 ** 31,  # scipy widens 24-bit PCM into int32
    np.dtype(np.float32): 1.0,
    np.dtype(np.float64): 1.0,
}


def resample(x: np.ndarray, rate_in: int, rate_out: int) -> np.ndarray:
    """Windowed-sinc (polyphase Kaiser) resampling along axis 0."""
    if rate_in == rate_out:
        return np.asarray(x, dtype=np.float64)
    ratio = Fraction(rate_out, rate_in)
    return resample_poly(np.asarray(x, dtype=np.float64),
                         ratio.numerator, ratio.denominator, axis=0)


def read_wav(path, session_rate: int | None = None) -> AudioClip:
    """Load a WAV file, normalized to [-1, 1] float, optionally resampled."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"WAV file not found: {path}")
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise SceneFileError(f"cannot read WAV file {path}: {exc}") from exc
    scale = _NORMALIZERS.get(data.dtype)
    if scale is None:
        raise SceneFileError(f"{path}: unsupported WAV sample format {data.dtype}")
    samples = data.astype(np.float64) * scale
    if samples.ndim == 1:
        samples = samples[:, np.newaxis]
    if samples.shape[1] > 2:
        raise SceneFileError(f"{path}: expected mono or stereo, got "
                             f"{samples.shape[1]} channels")
    if session_rate is not None and session_rate != rate:
        samples = resample(samples, rate, session_rate)
        rate = session_rate
    return AudioClip(samples, rate)


def read_wav_mono(path, session_rate: int | None = None) -> AudioClip:
    """Like read_wav but guarantees one channel, downmixing with a warning."""
    clip = read_wav(path, session_rate)
    if clip.channels == 2:
        warnings.warn(f"{Path(path).name}: downmixing stereo recording to mono",
                      stacklevel=2)
        clip = AudioClip(clip.data.mean(axis=1), clip.sample_rate)
    return clip


def write_wav(path, clip: AudioClip) -> None:
    """Write a clip as 32-bit float WAV."""
    wavfile.write(Path(path), clip.sample_rate, clip.data.astype(np.float32))
