#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

Times the two hot render kernels (windowed gather, overlap-add scatter) head
to head, then an end-to-end chunk render under each path, and prints the
real-time factor.  Run the fallback-only figures with FIELDPLAY_NO_NUMBA=1
(the end-to-end row then reflects whichever path the env flag selected).
"""

import time

import numpy as np

from fieldplay import accel
from fieldplay.hrtf import HrirSet
from fieldplay.render import BlockRenderer
from fieldplay.scene import AudioClip, ListenerPose, SourcePoint, Trajectory

SR = 48000


def timed(func, *args, repeats=50):
    func(*args)  # warm-up / JIT
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - started)
    return best


def bench_gather():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(10 * SR)
    window = np.hanning(1025)[:1024]
    starts = (np.arange(1875, dtype=np.int64) * 256) - 768
    args = (x, starts, window, 2048)
    t_numpy = timed(accel.gather_windowed_numpy, *args)
    t_numba = timed(accel.gather_windowed_numba, *args)
    same = np.array_equal(accel.gather_windowed_numpy(*args),
                          accel.gather_windowed_numba(*args))
    return t_numpy, t_numba, same


def bench_overlap_add():
    rng = np.random.default_rng(1)
    frames = rng.standard_normal((1875, 1087))
    starts = (np.arange(1875, dtype=np.int64) * 256) - 768

    def run_numpy():
        accel.overlap_add_numpy(np.zeros(10 * SR), frames, starts)

    def run_numba():
        accel.overlap_add_numba(np.zeros(10 * SR), frames, starts)

    t_numpy = timed(run_numpy)
    t_numba = timed(run_numba)
    same = np.array_equal(accel.overlap_add_numpy(np.zeros(10 * SR), frames, starts),
                          accel.overlap_add_numba(np.zeros(10 * SR), frames, starts))
    return t_numpy, t_numba, same


def bench_end_to_end():
    rng = np.random.default_rng(2)
    clip = AudioClip(0.3 * rng.standard_normal(4 * SR), SR)
    entries = {}
    for az in range(0, 360, 15):
        ir = np.zeros(128)
        ir[:32] = rng.standard_normal(32) * np.exp(-np.arange(32) / 8)
        entries[az] = (ir, ir[::-1].copy())
    hrirs = HrirSet(SR, entries)
    source = Trajectory.static(SourcePoint(0.0, 2.0))
    pose = ListenerPose(0.3, 0.5, 0.4)

    def render_all():
        renderer = BlockRenderer(clip, source, hrirs)
        while not renderer.exhausted:
            renderer.emit(4096, lambda t: pose)

    best = timed(render_all, repeats=5)
    return best, clip.duration


def main():
    path = "numba" if accel.NUMBA_ENABLED else "numpy (FIELDPLAY_NO_NUMBA)"
    print(f"active kernel path: {path}\n")

    if accel.NUMBA_ENABLED:
        print(f"{'kernel':<28}{'numpy':>12}{'numba':>12}{'speedup':>10}  bit-equal")
        t_np, t_nb, same = bench_gather()
        print(f"{'gather_windowed (10 s)':<28}{t_np * 1e3:>10.2f}ms"
              f"{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>9.1f}x  {same}")
        t_np, t_nb, same = bench_overlap_add()
        print(f"{'overlap_add (10 s)':<28}{t_np * 1e3:>10.2f}ms"
              f"{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>9.1f}x  {same}")
    else:
        print("numba disabled: kernel head-to-head skipped, timing the "
              "numpy path end to end")

    elapsed, duration = bench_end_to_end()
    print(f"\nend-to-end chunked render: {duration:.0f} s of audio in "
          f"{elapsed * 1e3:.0f} ms -> real-time factor {duration / elapsed:.1f}x")


if __name__ == "__main__":
    main()
