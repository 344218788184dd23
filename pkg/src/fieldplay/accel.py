"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

The renderer spends its time gathering windowed frames and scattering
overlap-add contributions back into the output.  Both kernels exist in two
variants:

* ``*_numba`` -- ``@njit`` compiled (used by default when numba imports)
* ``*_numpy`` -- plain numpy, same accumulation order, so results are
  bit-identical between the two paths

Set ``FIELDPLAY_NO_NUMBA=1`` to force the numpy path (also taken
automatically when numba is not installed).  ``benchmarks/bench_kernels.py``
compares the two.
"""

import os

import numpy as np

NUMBA_ENABLED = os.environ.get("FIELDPLAY_NO_NUMBA", "").lower() not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        # decorator passthrough so the _numba names still exist
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


def gather_windowed_numpy(x, starts, window, frame_len):
    """Extract windowed frames of ``x`` into a (K, frame_len) matrix.

    Frame k covers x[starts[k] : starts[k]+len(window)] (zeros outside the
    signal) times ``window``; columns beyond the window are left zero so the
    matrix can feed an FFT of length ``frame_len`` directly.
    """
    n = x.shape[0]
    wlen = window.shape[0]
    out = np.zeros((starts.shape[0], frame_len), dtype=np.float64)
    for k, s in enumerate(starts):
        lo = max(s, 0)
        hi = min(s + wlen, n)
        if hi > lo:
            out[k, lo - s:hi - s] = x[lo:hi] * window[lo - s:hi - s]
    return out


@njit(cache=True)
def _gather_windowed_jit(x, starts, window, out):
    n = x.shape[0]
    wlen = window.shape[0]
    for k in range(starts.shape[0]):
        s = starts[k]
        for i in range(wlen):
            j = s + i
            if 0 <= j < n:
                out[k, i] = x[j] * window[i]


def gather_windowed_numba(x, starts, window, frame_len):
    out = np.zeros((starts.shape[0], frame_len), dtype=np.float64)
    _gather_windowed_jit(x, starts, window, out)
    return out


def overlap_add_numpy(out, frames, starts):
    """Scatter-add each row of ``frames`` into ``out`` at its start index.

    Rows are accumulated in order, clipped to the bounds of ``out``; the
    numba variant uses the same per-sample order so both paths agree bitwise.
    """
    n = out.shape[0]
    flen = frames.shape[1]
    for k, s in enumerate(starts):
        lo = max(s, 0)
        hi = min(s + flen, n)
        if hi > lo:
            out[lo:hi] += frames[k, lo - s:hi - s]
    return out


@njit(cache=True)
def _overlap_add_jit(out, frames, starts):
    n = out.shape[0]
    flen = frames.shape[1]
    for k in range(starts.shape[0]):
        s = starts[k]
        for i in range(flen):
            j = s + i
            if 0 <= j < n:
                out[j] += frames[k, i]


def overlap_add_numba(out, frames, starts):
    _overlap_add_jit(out, frames, starts)
    return out


if NUMBA_ENABLED:
    gather_windowed = gather_windowed_numba
    overlap_add = overlap_add_numba
else:
    gather_windowed = gather_windowed_numpy
    overlap_add = overlap_add_numpy


def warm_kernels():
    """Force JIT compilation now (at the renderer's argument signatures).

    Latency-sensitive callers (the streaming service) run this before their
    pacing clocks start; otherwise the first rendered chunk pays ~1 s of
    compilation and the stream opens with a backlog burst.
    """
    x = np.zeros(16)
    starts = np.zeros(1, dtype=np.int64)
    window = np.ones(4)
    frames = gather_windowed(x, starts, window, 8)
    overlap_add(np.zeros(16), np.ascontiguousarray(frames), starts)
