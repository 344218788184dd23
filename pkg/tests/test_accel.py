import numpy as np

from fieldplay import accel


def test_gather_variants_agree(rng):
    x = rng.standard_normal(4096)
    window = np.hanning(257)[:256]
    starts = np.array([-200, 0, 256, 3900, 4100], dtype=np.int64)
    a = accel.gather_windowed_numpy(x, starts, window, 512)
    b = accel.gather_windowed_numba(x, starts, window, 512)
    np.testing.assert_array_equal(a, b)
    # out-of-range rows are zero-padded, fully out-of-range rows are zero
    assert np.all(a[4] == 0)
    assert np.all(a[0][:200] == 0)


def test_overlap_add_variants_agree(rng):
    frames = rng.standard_normal((8, 300))
    starts = (np.arange(8, dtype=np.int64) * 128) - 64
    out_a = accel.overlap_add_numpy(np.zeros(1024), frames, starts)
    out_b = accel.overlap_add_numba(np.zeros(1024), frames, starts)
    np.testing.assert_array_equal(out_a, out_b)
    # off-the-end contributions are dropped, not wrapped
    tail = (np.arange(2, dtype=np.int64) * 0) + 1000
    clipped = accel.overlap_add_numpy(np.zeros(1024), frames[:2], tail)
    assert np.all(clipped[:1000] == 0)


def test_selected_path_matches_flag():
    if accel.NUMBA_ENABLED:
        assert accel.overlap_add is accel.overlap_add_numba
        assert accel.gather_windowed is accel.gather_windowed_numba
    else:
        assert accel.overlap_add is accel.overlap_add_numpy
        assert accel.gather_windowed is accel.gather_windowed_numpy


def test_numpy_fallback_env_flag(tmp_path):
    import subprocess
    import sys

    code = ("import fieldplay.accel as a; "
            "assert not a.NUMBA_ENABLED; "
            "assert a.overlap_add is a.overlap_add_numpy")
    result = subprocess.run([sys.executable, "-c", code],
                            env={"PATH": "/usr/bin:/bin",
                                 "FIELDPLAY_NO_NUMBA": "1"},
                            capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
