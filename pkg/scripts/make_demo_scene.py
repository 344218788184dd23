#!/usr/bin/env python3
"""Generate a self-contained demo scene for the CLI and the explorer UI.

Writes a scene directory containing a synthetic mono recording (a melody
with noise bursts), a toy HRIR set with level and time differences, and a
scene YAML the serve/render commands accept.

Usage: python scripts/make_demo_scene.py [--out demo_scenes] [--seconds 20]
"""

import argparse
import math
from pathlib import Path

import numpy as np
import yaml

from fieldplay.audio_io import write_wav
from fieldplay.scene import AudioClip

SR = 48000


def melody(seconds, rng):
    notes = [262, 330, 392, 523, 392, 330]
    samples = np.zeros(int(seconds * SR))
    note_len = SR // 2
    for i in range(0, len(samples) - note_len, note_len):
        freq = notes[(i // note_len) % len(notes)]
        t = np.arange(note_len) / SR
        envelope = np.minimum(1.0, 10 * (1 - t / 0.5)) * np.minimum(1.0, 40 * t)
        # keep the master low: the renderer may boost by gain_cap (4x) up close
        tone = 0.17 * np.sin(2 * np.pi * freq * t)
        tone += 0.05 * np.sin(2 * np.pi * 2 * freq * t)
        samples[i:i + note_len] = envelope * tone
    samples += 0.006 * rng.standard_normal(len(samples))
    return np.clip(samples, -0.95, 0.95)


def toy_hrirs(root: Path):
    """ILD + ITD deltas every 15 degrees: enough spatial cue to steer by ear."""
    root.mkdir(parents=True, exist_ok=True)
    index = {}
    for az in range(0, 360, 15):
        s = math.sin(math.radians(az))
        gain_l, gain_r = 0.65 - 0.35 * s, 0.65 + 0.35 * s
        # up to ~0.6 ms of interaural delay toward the far ear
        delay_l = int(round(14 * max(s, 0.0)))
        delay_r = int(round(14 * max(-s, 0.0)))
        left = np.zeros(64)
        right = np.zeros(64)
        left[delay_l] = gain_l
        right[delay_r] = gain_r
        names = (f"az{az:03d}_L.wav", f"az{az:03d}_R.wav")
        write_wav(root / names[0], AudioClip(left, SR))
        write_wav(root / names[1], AudioClip(right, SR))
        index[az] = list(names)
    (root / "index").write_text(yaml.safe_dump(index))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_scenes")
    parser.add_argument("--seconds", type=float, default=20.0)
    args = parser.parse_args()

    out = Path(args.out)
    scene_dir = out / "courtyard"
    scene_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(2024)
    write_wav(scene_dir / "recording.wav", AudioClip(melody(args.seconds, rng), SR))
    toy_hrirs(scene_dir / "hrirs")

    # source slowly circles the microphone at 2 m
    steps = 9
    source = []
    for i in range(steps):
        t = args.seconds * i / (steps - 1)
        angle = 2 * math.pi * i / (steps - 1)
        source.append({"t": round(t, 3), "x": round(2 * math.sin(angle), 3),
                       "y": round(2 * math.cos(angle), 3)})

    doc = {
        "recording_path": "courtyard/recording.wav",
        "hrir_path": "courtyard/hrirs",
        "gain_cap": 4.0,
        "listener_default": {"x": 0.0, "y": -1.5, "heading_deg": 0.0},
        "source": source,
        "stft": {"window_len": 1024, "hop": 256},
    }
    (out / "courtyard.yaml").write_text(yaml.safe_dump(doc, sort_keys=False))
    print(f"wrote scene 'courtyard' under {out}/")
    print(f"try: fieldplay serve --scenes {out}")


if __name__ == "__main__":
    main()
