"""Scene data model: poses, trajectories, audio clips, scene configuration.

A scene lives in the microphone's frame: the recording mic is the origin,
all coordinates are meters, and time is seconds from the start of the
recording.  Everything here is immutable after construction so scenes can be
shared freely across renderer threads and service sessions.

Scene configuration is a YAML document; the schema is documented in the
README (see also `load_scene_config`).
"""

import bisect
import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Generic, Sequence, TypeVar, Union

import numpy as np
import yaml

DEFAULT_GAIN_CAP = 4.0
DEFAULT_WINDOW_LEN = 1024
DEFAULT_HOP = 256


class SceneFileError(Exception):
    """A referenced file is missing, unreadable, or unparsable."""


class SceneSchemaError(ValueError):
    """A scene document violates the documented schema."""


def normalize_heading(heading: float) -> float:
    """Wrap an angle in radians into (-pi, pi]."""
    h = math.remainder(heading, math.tau)
    if h <= -math.pi:
        h += math.tau
    return h


def _require_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v}")


@dataclass(frozen=True)
class ListenerPose:
    """Listener position (m) and heading (radians CCW from the +y axis)."""

    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        _require_finite("listener pose", self.x, self.y, self.heading)
        object.__setattr__(self, "heading", normalize_heading(self.heading))


@dataclass(frozen=True)
class SourcePoint:
    """Sound source position in the mic frame (the mic is the origin)."""

    x: float
    y: float

    def __post_init__(self):
        _require_finite("source point", self.x, self.y)


P = TypeVar("P", ListenerPose, SourcePoint)


@dataclass(frozen=True)
class Trajectory(Generic[P]):
    """Timed pose samples; timestamps strictly increasing."""

    samples: tuple

    def __init__(self, samples: Sequence[tuple]):
        samples = tuple((float(t), pose) for t, pose in samples)
        if not samples:
            raise ValueError("trajectory must contain at least one sample")
        times = [t for t, _ in samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("trajectory timestamps must be strictly increasing")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def static(cls, pose: P, t: float = 0.0) -> "Trajectory[P]":
        return cls([(t, pose)])

    @property
    def times(self):
        return np.array([t for t, _ in self.samples])

    @property
    def duration(self) -> float:
        return self.samples[-1][0] - self.samples[0][0]

    def __len__(self):
        return len(self.samples)


def _lerp_heading(h0: float, h1: float, u: float) -> float:
    # shortest arc: walk the wrapped delta, so +170deg..-170deg passes 180deg
    delta = normalize_heading(h1 - h0)
    return normalize_heading(h0 + u * delta)


def pose_at(traj: Trajectory[P], t: float) -> P:
    """Pose at time ``t``: linear in position, shortest-arc in heading.

    Queries before the first or after the last sample clamp to the endpoint
    pose, so listener paths may outrun source annotations without erroring.
    """
    samples = traj.samples
    if t <= samples[0][0]:
        return samples[0][1]
    if t >= samples[-1][0]:
        return samples[-1][1]
    times = [s[0] for s in samples]
    hi = bisect.bisect_right(times, t)
    t0, p0 = samples[hi - 1]
    t1, p1 = samples[hi]
    u = (t - t0) / (t1 - t0)
    x = p0.x + u * (p1.x - p0.x)
    y = p0.y + u * (p1.y - p0.y)
    if isinstance(p0, ListenerPose):
        return ListenerPose(x, y, _lerp_heading(p0.heading, p1.heading, u))
    return SourcePoint(x, y)


@dataclass(frozen=True)
class AudioClip:
    """PCM audio held as float64 in nominal [-1, 1], shape (num_samples, channels)."""

    data: np.ndarray
    sample_rate: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, np.newaxis]
        if data.ndim != 2 or data.shape[1] not in (1, 2):
            raise ValueError(f"audio data must be (n,) or (n, 1|2), got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("audio data contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    @property
    def num_samples(self) -> int:
        return self.data.shape[0]

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate

    def mono(self) -> np.ndarray:
        """The single channel as a 1-D array; raises on stereo clips."""
        if self.channels != 1:
            raise ValueError(f"expected mono audio, got {self.channels} channels")
        return self.data[:, 0]


@dataclass(frozen=True)
class SceneConfig:
    """A fully validated scene: source path, defaults, and render parameters."""

    source: Trajectory
    listener_default: ListenerPose
    hrir_path: Path
    recording_path: Path
    gain_cap: float = DEFAULT_GAIN_CAP
    window_len: int = DEFAULT_WINDOW_LEN
    hop: int = DEFAULT_HOP
    sample_rate: Union[int, None] = None  # None = use the recording's native rate

    def __post_init__(self):
        if self.gain_cap < 1.0:
            raise SceneSchemaError(f"gain_cap must be >= 1, got {self.gain_cap}")
        if (self.window_len <= 0 or self.hop <= 0 or self.window_len % self.hop
                or self.hop > self.window_len // 2):
            raise SceneSchemaError(
                f"stft hop ({self.hop}) must divide window_len "
                f"({self.window_len}) with at least 2x overlap"
            )


_KNOWN_FIELDS = {
    "recording_path", "hrir_path", "source", "listener_default",
    "gain_cap", "stft", "sample_rate",
}


def _schema_type(doc, key, types, where="scene config"):
    value = doc[key]
    if not isinstance(value, types):
        raise SceneSchemaError(f"{where}: field '{key}' has wrong type "
                               f"({type(value).__name__})")
    return value


def _parse_listener(entry) -> ListenerPose:
    if not isinstance(entry, dict):
        raise SceneSchemaError("listener_default must be a mapping with x, y, heading_deg")
    try:
        return ListenerPose(float(entry["x"]), float(entry["y"]),
                            math.radians(float(entry.get("heading_deg", 0.0))))
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneSchemaError(f"listener_default: {exc}") from exc


def _parse_source(value, base: Path) -> Trajectory:
    if isinstance(value, str):
        path = (base / value).resolve()
        if not path.exists():
            raise FileNotFoundError(f"source trajectory file not found: {path}")
        traj = load_trajectory_csv(path)
        if isinstance(traj.samples[0][1], ListenerPose):
            raise SceneSchemaError("source trajectory must not carry a heading column")
        return traj
    if not isinstance(value, list) or not value:
        raise SceneSchemaError("field 'source' must be a non-empty list or a CSV path")
    samples = []
    for i, entry in enumerate(value):
        try:
            if isinstance(entry, dict):
                samples.append((float(entry["t"]), SourcePoint(float(entry["x"]),
                                                               float(entry["y"]))))
            else:
                t, x, y = entry
                samples.append((float(t), SourcePoint(float(x), float(y))))
        except (KeyError, TypeError, ValueError) as exc:
            raise SceneSchemaError(f"source[{i}]: expected t, x, y ({exc})") from exc
    try:
        return Trajectory(samples)
    except ValueError as exc:
        raise SceneSchemaError(f"source: {exc}") from exc


def load_scene_config(path) -> SceneConfig:
    """Load and validate a YAML scene document.

    Unknown fields warn and are ignored; missing required fields or type
    violations raise SceneSchemaError naming the field; referenced paths must
    exist at load time.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"scene config not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise SceneFileError(f"cannot parse scene config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SceneSchemaError(f"scene config {path} must be a mapping at top level")

    unknown = sorted(set(doc) - _KNOWN_FIELDS)
    if unknown:
        warnings.warn(f"scene config {path.name}: ignoring unknown field(s) "
                      f"{', '.join(unknown)}", stacklevel=2)

    for required in ("recording_path", "hrir_path", "source"):
        if required not in doc:
            raise SceneSchemaError(f"scene config {path}: missing required field "
                                   f"'{required}'")

    base = path.parent
    recording = (base / _schema_type(doc, "recording_path", str)).resolve()
    hrirs = (base / _schema_type(doc, "hrir_path", str)).resolve()
    for ref in (recording, hrirs):
        if not ref.exists():
            raise FileNotFoundError(f"scene config {path}: referenced path does not "
                                    f"exist: {ref}")

    source = _parse_source(doc["source"], base)
    listener = (_parse_listener(doc["listener_default"])
                if "listener_default" in doc else ListenerPose(0.0, 0.0, 0.0))

    gain_cap = float(_schema_type(doc, "gain_cap", (int, float))) \
        if "gain_cap" in doc else DEFAULT_GAIN_CAP
    window_len, hop = DEFAULT_WINDOW_LEN, DEFAULT_HOP
    if "stft" in doc:
        stft_doc = _schema_type(doc, "stft", dict)
        window_len = int(stft_doc.get("window_len", DEFAULT_WINDOW_LEN))
        hop = int(stft_doc.get("hop", DEFAULT_HOP))
    sample_rate = int(_schema_type(doc, "sample_rate", int)) \
        if "sample_rate" in doc else None

    return SceneConfig(source=source, listener_default=listener, hrir_path=hrirs,
                       recording_path=recording, gain_cap=gain_cap,
                       window_len=window_len, hop=hop, sample_rate=sample_rate)


def load_trajectory_csv(path) -> Trajectory:
    """Read a trajectory CSV with header ``t,x,y[,heading_deg]``.

    A heading_deg column makes it a listener trajectory; without it the rows
    are source points.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"trajectory file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SceneFileError(f"trajectory file {path} is empty") from None
        if header[:3] != ["t", "x", "y"] or header not in (
                ["t", "x", "y"], ["t", "x", "y", "heading_deg"]):
            raise SceneFileError(f"trajectory file {path}: header must be "
                                 f"t,x,y[,heading_deg], got {','.join(header)}")
        with_heading = len(header) == 4
        samples = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
                if with_heading:
                    t, x, y, hdg = values
                    samples.append((t, ListenerPose(x, y, math.radians(hdg))))
                else:
                    t, x, y = values
                    samples.append((t, SourcePoint(x, y)))
            except ValueError as exc:
                raise SceneFileError(f"trajectory file {path}:{lineno}: {exc}") from exc
    try:
        return Trajectory(samples)
    except ValueError as exc:
        raise SceneFileError(f"trajectory file {path}: {exc}") from exc
