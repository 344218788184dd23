import numpy as np
import pytest
import yaml

from fieldplay.audio_io import write_wav
from fieldplay.scene import AudioClip


@pytest.fixture
def rng():
    return np.random.default_rng(20240615)


def delta_hrir(length=64, delay=0, gain=1.0):
    h = np.zeros(length)
    h[delay] = gain
    return h


def write_hrir_dir(root, entries, sample_rate=48000):
    """Materialize an HRIR directory: index + one WAV pair per azimuth."""
    root.mkdir(parents=True, exist_ok=True)
    index = {}
    for az, (left, right) in entries.items():
        left_name = f"az{int(az):03d}_L.wav"
        right_name = f"az{int(az):03d}_R.wav"
        write_wav(root / left_name, AudioClip(left, sample_rate))
        write_wav(root / right_name, AudioClip(right, sample_rate))
        index[az] = [left_name, right_name]
    (root / "index").write_text(yaml.safe_dump(index))
    return root


def identity_hrir_entries(length=64, azimuths=(0, 90, 180, 270)):
    """Unit-impulse HRIRs on both ears at every azimuth."""
    return {az: (delta_hrir(length), delta_hrir(length)) for az in azimuths}


def panning_hrir_entries(length=64, azimuths=range(0, 360, 30)):
    """Toy ILD set: right ear louder for sources on the right, and vice versa."""
    entries = {}
    for az in azimuths:
        s = np.sin(np.radians(az))
        entries[az] = (delta_hrir(length, gain=0.6 - 0.4 * s),
                       delta_hrir(length, gain=0.6 + 0.4 * s))
    return entries


def write_scene(tmp_path, recording, hrir_entries, source=((0.0, 0.0, 2.0),),
                sample_rate=48000, gain_cap=4.0, listener=None, name="scene",
                window_len=1024, hop=256):
    """Build a complete on-disk scene and return the config path."""
    scene_dir = tmp_path / name
    scene_dir.mkdir(parents=True, exist_ok=True)
    write_wav(scene_dir / "recording.wav", AudioClip(recording, sample_rate))
    write_hrir_dir(scene_dir / "hrirs", hrir_entries, sample_rate)
    doc = {
        "recording_path": "recording.wav",
        "hrir_path": "hrirs",
        "gain_cap": gain_cap,
        "source": [{"t": t, "x": x, "y": y} for t, x, y in source],
        "stft": {"window_len": window_len, "hop": hop},
    }
    if listener is not None:
        doc["listener_default"] = listener
    config = scene_dir / f"{name}.yaml"
    config.write_text(yaml.safe_dump(doc))
    return config


@pytest.fixture
def tone_clip():
    sr = 48000
    t = np.arange(sr) / sr
    return AudioClip(0.4 * np.sin(2 * np.pi * 440 * t), sr)


@pytest.fixture
def noise_clip(rng):
    return AudioClip(0.3 * rng.standard_normal(48000), 48000)
