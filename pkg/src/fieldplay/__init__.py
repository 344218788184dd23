"""fieldplay: 6-DoF binaural playback of a mono recording, plus capture tooling.

The core renderer turns one microphone recording and a pair of source/listener
trajectories into listener-position-dependent binaural audio (HRTF auralization
in the STFT domain).  Around it sit multi-view color harmonization, multi-stream
alignment, a capture-density metric, a streaming playback service, and a CLI.
"""

from fieldplay.scene import (
    AudioClip,
    ListenerPose,
    SceneConfig,
    SourcePoint,
    Trajectory,
    load_scene_config,
    load_trajectory_csv,
    pose_at,
)
from fieldplay.geometry import (
    DegenerateGeometryError,
    FramePose,
    direction_angle,
    distance_gain,
    frame_pose,
    signed_azimuth,
)
from fieldplay.stft import Spectrogram, istft, stft
from fieldplay.hrtf import HrirSet, hrtf_for_azimuth, load_hrir_dir
from fieldplay.render import RenderParams, render_binaural
from fieldplay.colormap import (
    AffineColorMap,
    Image,
    apply_color_map,
    color_loss,
    fit_color_map,
    harmonize_multiview,
    psnr,
    ssim,
)
from fieldplay.capture import (
    RigSweep,
    StreamHeader,
    capture_density,
    timecode_offsets,
    xcorr_refine,
)

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "ListenerPose",
    "SourcePoint",
    "Trajectory",
    "SceneConfig",
    "load_scene_config",
    "load_trajectory_csv",
    "pose_at",
    "DegenerateGeometryError",
    "FramePose",
    "direction_angle",
    "signed_azimuth",
    "distance_gain",
    "frame_pose",
    "Spectrogram",
    "stft",
    "istft",
    "HrirSet",
    "hrtf_for_azimuth",
    "load_hrir_dir",
    "RenderParams",
    "render_binaural",
    "AffineColorMap",
    "Image",
    "apply_color_map",
    "ssim",
    "psnr",
    "color_loss",
    "fit_color_map",
    "harmonize_multiview",
    "StreamHeader",
    "RigSweep",
    "timecode_offsets",
    "xcorr_refine",
    "capture_density",
]
