"""Planar listener/source geometry: direction angle, signed azimuth, distance gain.

Conventions (fixed across the toolkit):

* The recording microphone sits at the origin of a 2D world, +y is "north".
* A listener heading is the counterclockwise angle from the +y axis, kept
  in (-pi, pi].
* The facing unit vector for heading ``h`` is ``(-sin h, cos h)`` and the
  right-hand unit vector is ``(cos h, sin h)``.
* Signed azimuth is reported in degrees in (-180, 180], positive when the
  source is to the listener's right; HRIR lookup wraps it into [0, 360)
  with 0 = straight ahead and 90 = hard right.
"""

import math
import warnings
from dataclasses import dataclass

from fieldplay.scene import ListenerPose, SourcePoint

DISTANCE_FLOOR_M = 0.05
DEFAULT_GAIN_CAP = 4.0

# below this source-listener separation the direction is numerically meaningless
_COINCIDENT_EPS = 1e-12


class DegenerateGeometryError(ValueError):
    """Source and listener coincide; the direction is undefined."""


@dataclass(frozen=True)
class FramePose:
    """Geometry resolved for one render frame."""

    theta_s: float           # unsigned source direction, radians in [0, pi]
    azimuth_signed: float    # degrees in (-180, 180], positive = right
    gain: float              # distance scaling, clamped to [0, gain_cap]


def _separation(listener, source):
    dx = source.x - listener.x
    dy = source.y - listener.y
    return dx, dy, math.hypot(dx, dy)


def direction_angle(listener: ListenerPose, source: SourcePoint) -> float:
    """Unsigned angle between the listener's facing line and the source.

    arccos of the normalized dot product between the listener-to-source
    vector and the facing vector; result in [0, pi].
    """
    dx, dy, dist = _separation(listener, source)
    if dist < _COINCIDENT_EPS:
        raise DegenerateGeometryError(
            f"source ({source.x}, {source.y}) coincides with listener position"
        )
    fx = -math.sin(listener.heading)
    fy = math.cos(listener.heading)
    cos_angle = (dx * fx + dy * fy) / dist
    return math.acos(min(1.0, max(-1.0, cos_angle)))


def signed_azimuth(listener: ListenerPose, source: SourcePoint) -> float:
    """Source azimuth in degrees in (-180, 180], positive to the listener's right.

    Computed as atan2(v1 . right, v1 . facing); its magnitude in radians
    equals direction_angle for the same geometry.
    """
    dx, dy, dist = _separation(listener, source)
    if dist < _COINCIDENT_EPS:
        raise DegenerateGeometryError(
            f"source ({source.x}, {source.y}) coincides with listener position"
        )
    fx = -math.sin(listener.heading)
    fy = math.cos(listener.heading)
    rx, ry = fy, -fx  # right = facing rotated 90 degrees clockwise
    az = math.degrees(math.atan2(dx * rx + dy * ry, dx * fx + dy * fy))
    if az <= -180.0:
        az += 360.0
    return az


def distance_gain(listener: ListenerPose, source: SourcePoint,
                  gain_cap: float = DEFAULT_GAIN_CAP) -> float:
    """Loudness scaling at the listener relative to the original recording.

    Ratio of source-to-microphone distance over source-to-listener distance.
    The denominator is floored at 0.05 m and the result clamped to
    [0, gain_cap], so a listener standing on the source gets the cap instead
    of a singularity.  A source exactly at the microphone yields 0 (silent
    render) with a warning.
    """
    if gain_cap < 1.0:
        raise ValueError(f"gain_cap must be >= 1, got {gain_cap}")
    src_dist = math.hypot(source.x, source.y)
    if src_dist == 0.0:
        warnings.warn("source sits exactly on the microphone; gain is 0 (silent render)",
                      stacklevel=2)
        return 0.0
    _, _, sep = _separation(listener, source)
    lam = src_dist / max(sep, DISTANCE_FLOOR_M)
    return min(max(lam, 0.0), gain_cap)


def frame_pose(listener: ListenerPose, source: SourcePoint,
               gain_cap: float = DEFAULT_GAIN_CAP) -> FramePose:
    """Resolve direction and gain for one frame of rendering."""
    az = signed_azimuth(listener, source)
    return FramePose(theta_s=abs(math.radians(az)), azimuth_signed=az,
                     gain=distance_gain(listener, source, gain_cap))
