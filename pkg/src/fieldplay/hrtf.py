"""Azimuth-indexed head-related impulse responses and their interpolation.

The grid convention is: azimuth in degrees in [0, 360), measured clockwise
from straight ahead (0 = front, 90 = hard right, 270 = hard left).  Lookups
between grid points interpolate sample-wise between the two nearest
azimuths, wrapping across 360 -> 0.  A set loaded from disk is resampled to
the session rate with a windowed-sinc resampler.

On-disk layout (SADIE-style sets are converted to this, the data itself is
not shipped): a directory containing an ``index`` YAML document mapping
azimuth degrees to a [left.wav, right.wav] pair, plus those WAV files.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from fieldplay.audio_io import read_wav, resample
from fieldplay.scene import SceneFileError, SceneSchemaError


@dataclass(frozen=True)
class HrirSet:
    """Impulse-response pairs keyed by azimuth degrees in [0, 360)."""

    sample_rate: int
    entries: dict  # azimuth -> (left, right) float64 arrays, equal length

    def __post_init__(self):
        if len(self.entries) < 2:
            raise ValueError("an HRIR set needs at least 2 distinct azimuths")
        lengths = set()
        for az, (left, right) in self.entries.items():
            if not 0.0 <= az < 360.0:
                raise ValueError(f"azimuth {az} outside [0, 360)")
            lengths.add(len(left))
            lengths.add(len(right))
        if len(lengths) != 1:
            raise ValueError("all impulse responses must have equal length")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def ir_length(self) -> int:
        left, _ = next(iter(self.entries.values()))
        return len(left)

    @property
    def azimuths(self) -> np.ndarray:
        return np.array(sorted(self.entries))

    def resampled(self, session_rate: int) -> "HrirSet":
        if session_rate == self.sample_rate:
            return self
        entries = {
            az: (resample(left, self.sample_rate, session_rate),
                 resample(right, self.sample_rate, session_rate))
            for az, (left, right) in self.entries.items()
        }
        return HrirSet(session_rate, entries)


def _neighbors(azimuths: np.ndarray, azimuth: float):
    """Bracketing grid azimuths and the interpolation weight, with wraparound."""
    az = float(azimuth) % 360.0
    idx = np.searchsorted(azimuths, az)
    lo = azimuths[idx - 1] if idx > 0 else azimuths[-1]
    hi = azimuths[idx] if idx < len(azimuths) else azimuths[0]
    if az == lo:
        return lo, hi, 0.0
    span = (hi - lo) % 360.0
    if span == 0.0:
        return lo, hi, 0.0
    u = ((az - lo) % 360.0) / span
    return lo, hi, u


def hrtf_for_azimuth(hrirs: HrirSet, azimuth: float):
    """Impulse-response pair for an azimuth: exact on grid points, sample-wise
    linear interpolation between the two nearest grid azimuths otherwise."""
    azimuths = hrirs.azimuths
    lo, hi, u = _neighbors(azimuths, azimuth)
    left_lo, right_lo = hrirs.entries[lo]
    if u == 0.0:
        return left_lo.copy(), right_lo.copy()
    left_hi, right_hi = hrirs.entries[hi]
    return ((1.0 - u) * left_lo + u * left_hi,
            (1.0 - u) * right_lo + u * right_hi)


def load_hrir_dir(path, session_rate: int | None = None) -> HrirSet:
    """Load an HRIR directory (``index`` document + WAV pairs)."""
    root = Path(path)
    index_path = root / "index"
    if not index_path.exists():
        index_path = root / "index.yaml"
    if not index_path.exists():
        raise FileNotFoundError(f"HRIR directory {root} has no index file")
    try:
        index = yaml.safe_load(index_path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise SceneFileError(f"cannot parse HRIR index {index_path}: {exc}") from exc
    if not isinstance(index, dict):
        raise SceneSchemaError(f"HRIR index {index_path} must map azimuth degrees "
                               f"to [left, right] WAV names")

    entries = {}
    rate = None
    for az_key, pair in index.items():
        try:
            az = float(az_key) % 360.0
        except (TypeError, ValueError):
            raise SceneSchemaError(f"HRIR index: bad azimuth key {az_key!r}") from None
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise SceneSchemaError(f"HRIR index: azimuth {az_key} must map to "
                                   f"[left.wav, right.wav]")
        left_clip = read_wav(root / pair[0])
        right_clip = read_wav(root / pair[1])
        if left_clip.sample_rate != right_clip.sample_rate:
            raise SceneSchemaError(f"HRIR pair for azimuth {az_key} mixes sample rates")
        if rate is None:
            rate = left_clip.sample_rate
        elif rate != left_clip.sample_rate:
            raise SceneSchemaError("HRIR WAV files disagree on sample rate")
        entries[az] = (left_clip.mono(), right_clip.mono())

    hrirs = HrirSet(rate, entries)
    if session_rate is not None:
        hrirs = hrirs.resampled(session_rate)
    return hrirs


class HrtfTable:
    """Grid HRIR spectra precomputed at a render FFT length.

    Interpolating grid impulse responses sample-wise and transforming is
    linear, so interpolating the precomputed spectra with the same weights
    yields the identical transfer function at a fraction of the cost.
    """

    def __init__(self, hrirs: HrirSet, fft_len: int):
        if fft_len < hrirs.ir_length:
            raise ValueError("fft_len shorter than the impulse responses")
        self.azimuths = hrirs.azimuths
        self.ir_length = hrirs.ir_length
        self.fft_len = fft_len
        grid_l = np.stack([hrirs.entries[a][0] for a in self.azimuths])
        grid_r = np.stack([hrirs.entries[a][1] for a in self.azimuths])
        self.spectra_l = np.fft.rfft(grid_l, n=fft_len, axis=1)
        self.spectra_r = np.fft.rfft(grid_r, n=fft_len, axis=1)

    def lookup(self, azimuths_deg: np.ndarray):
        """Transfer-function pair per azimuth; shape (len(azimuths), bins)."""
        az = np.asarray(azimuths_deg, dtype=np.float64) % 360.0
        idx = np.searchsorted(self.azimuths, az)
        lo_idx = np.where(idx > 0, idx - 1, len(self.azimuths) - 1)
        hi_idx = np.where(idx < len(self.azimuths), idx, 0)
        lo = self.azimuths[lo_idx]
        hi = self.azimuths[hi_idx % len(self.azimuths)]
        span = (hi - lo) % 360.0
        with np.errstate(invalid="ignore"):
            u = np.where(span == 0.0, 0.0, ((az - lo) % 360.0) / np.where(span == 0, 1, span))
        u = np.where(az == lo, 0.0, u)[:, np.newaxis]
        h_l = (1.0 - u) * self.spectra_l[lo_idx] + u * self.spectra_l[hi_idx % len(self.azimuths)]
        h_r = (1.0 - u) * self.spectra_r[lo_idx] + u * self.spectra_r[hi_idx % len(self.azimuths)]
        return h_l, h_r
