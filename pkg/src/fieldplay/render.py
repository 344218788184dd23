"""Binaural rendering of a mono mic recording for a moving listener.

Per STFT frame the renderer resolves the listener/source geometry at the
frame's center time, scales the frame spectrum by the distance gain, applies
the interpolated left/right ear transfer functions, and overlap-adds the two
channels back to the time domain.

Framing detail: analysis frames are pre-padded by (window - hop) samples so
every input sample receives full window coverage; the Hann overlap then sums
to the exact constant window/(2*hop) across the whole clip, which makes a
unit-impulse HRIR reproduce the input bit-for-bit (no fade-in at the edges).
The FFT length is the next power of two >= window + ir_len - 1 so the
per-frame product is a linear, not circular, convolution.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from fieldplay.accel import gather_windowed, overlap_add
from fieldplay.geometry import (
    DegenerateGeometryError,
    distance_gain,
    signed_azimuth,
)
from fieldplay.hrtf import HrirSet, HrtfTable
from fieldplay.scene import (
    AudioClip,
    ListenerPose,
    Trajectory,
    pose_at,
)
from fieldplay.stft import hann_window


@dataclass(frozen=True)
class RenderParams:
    window_len: int = 1024
    hop: int = 256
    gain_cap: float = 4.0

    def __post_init__(self):
        # hop must divide the window with >= 2x overlap for the Hann frames
        # to overlap-add to an exact constant
        if self.window_len % self.hop or self.hop > self.window_len // 2:
            raise ValueError(f"hop ({self.hop}) must divide window_len "
                             f"({self.window_len}) with at least 2x overlap")
        if self.gain_cap < 1.0:
            raise ValueError(f"gain_cap must be >= 1, got {self.gain_cap}")


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


class BlockRenderer:
    """Incremental renderer: emits finalized stereo blocks in order.

    The same instance drives both the offline render (one block spanning the
    whole clip) and the streaming service (chunk-sized blocks), so the two
    paths are arithmetically identical sample for sample.
    """

    def __init__(self, recording: AudioClip, source_traj: Trajectory,
                 hrirs: HrirSet, params: RenderParams = RenderParams()):
        if hrirs.sample_rate != recording.sample_rate:
            raise ValueError(
                f"HRIR sample rate {hrirs.sample_rate} != recording rate "
                f"{recording.sample_rate}; resample the set on load")
        self.x = recording.mono()
        self.sample_rate = recording.sample_rate
        self.source_traj = source_traj
        self.params = params

        w, hop = params.window_len, params.hop
        self.window = hann_window(w)
        self.fft_len = _next_pow2(w + hrirs.ir_length - 1)
        self.table = HrtfTable(hrirs, self.fft_len)
        self.frame_out_len = w + hrirs.ir_length - 1
        self.pad = w - hop
        # Hann at hop dividing window overlap-adds to exactly this constant
        self.ola_gain = w / (2.0 * hop)

        n = len(self.x)
        self.num_frames = (n - 1 + self.pad) // hop + 1
        self.total_samples = n
        self.emitted = 0
        self._next_frame = 0
        # rolling accumulators for [emitted, emitted + len(buffer))
        self._buf_len = 0
        self._buf_l = np.zeros(0)
        self._buf_r = np.zeros(0)
        self._last_azimuth = 0.0

    @property
    def exhausted(self) -> bool:
        return self.emitted >= self.total_samples

    def _frame_start(self, k: int) -> int:
        return k * self.params.hop - self.pad

    def _resolve_poses(self, frame_indices, listener_at: Callable[[float], ListenerPose]):
        w = self.params.window_len
        azimuths = np.empty(len(frame_indices))
        gains = np.empty(len(frame_indices))
        for i, k in enumerate(frame_indices):
            t_k = (self._frame_start(k) + w / 2) / self.sample_rate
            listener = listener_at(t_k)
            source = pose_at(self.source_traj, t_k)
            try:
                self._last_azimuth = signed_azimuth(listener, source)
            except DegenerateGeometryError:
                pass  # hold the last well-defined direction through the singularity
            azimuths[i] = self._last_azimuth
            gains[i] = distance_gain(listener, source, self.params.gain_cap)
        return azimuths, gains

    def _ensure_buffer(self, block_len: int):
        need = block_len + self.frame_out_len + self.params.hop
        if self._buf_len < need:
            grown_l = np.zeros(need)
            grown_r = np.zeros(need)
            grown_l[:self._buf_len] = self._buf_l
            grown_r[:self._buf_len] = self._buf_r
            self._buf_l, self._buf_r = grown_l, grown_r
            self._buf_len = need

    def emit(self, block_len: int,
             listener_at: Callable[[float], ListenerPose]) -> np.ndarray:
        """Render and return the next finalized block, shape (<=block_len, 2).

        All frames starting before the block's end are processed with the
        listener poses supplied by ``listener_at``; a short final block is
        returned at the end of the recording.
        """
        block_len = min(block_len, self.total_samples - self.emitted)
        if block_len <= 0:
            return np.zeros((0, 2))
        self._ensure_buffer(block_len)
        block_end = self.emitted + block_len

        first = self._next_frame
        last = first
        while last < self.num_frames and self._frame_start(last) < block_end:
            last += 1
        if last > first:
            frame_indices = range(first, last)
            starts = np.array([self._frame_start(k) for k in frame_indices],
                              dtype=np.int64)
            azimuths, gains = self._resolve_poses(frame_indices, listener_at)

            frames = gather_windowed(self.x, starts, self.window, self.fft_len)
            spectra = np.fft.rfft(frames, axis=1)
            h_l, h_r = self.table.lookup(azimuths)
            scaled = gains[:, np.newaxis] * spectra
            out_l = np.fft.irfft(h_l * scaled, n=self.fft_len, axis=1)
            out_r = np.fft.irfft(h_r * scaled, n=self.fft_len, axis=1)
            local = starts - self.emitted
            overlap_add(self._buf_l,
                        np.ascontiguousarray(out_l[:, :self.frame_out_len]), local)
            overlap_add(self._buf_r,
                        np.ascontiguousarray(out_r[:, :self.frame_out_len]), local)
            self._next_frame = last

        block = np.stack([self._buf_l[:block_len], self._buf_r[:block_len]],
                         axis=1) / self.ola_gain
        # slide the rolling accumulators past the emitted block
        self._buf_l[:-block_len] = self._buf_l[block_len:]
        self._buf_l[-block_len:] = 0.0
        self._buf_r[:-block_len] = self._buf_r[block_len:]
        self._buf_r[-block_len:] = 0.0
        self.emitted = block_end
        return block


def render_binaural(recording: AudioClip,
                    source_traj: Trajectory,
                    listener: Union[Trajectory, ListenerPose],
                    hrirs: HrirSet,
                    params: RenderParams = RenderParams()) -> AudioClip:
    """Offline render: stereo clip of exactly the recording's duration.

    ``listener`` may be a trajectory or a single fixed pose; the source
    trajectory is evaluated at every frame center either way.
    """
    if isinstance(listener, ListenerPose):
        listener_at = lambda t: listener
    else:
        listener_at = lambda t: pose_at(listener, t)
    renderer = BlockRenderer(recording, source_traj, hrirs, params)
    block = renderer.emit(renderer.total_samples, listener_at)
    return AudioClip(block, recording.sample_rate)
