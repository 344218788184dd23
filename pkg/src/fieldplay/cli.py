"""Command-line entry point: render, harmonize, align, density, serve.

Every subcommand is a thin shell over one library operation; results go to
standard output, diagnostics to standard error.  Exit codes: 0 success,
2 bad input file, 3 schema violation, 4 render failure.
"""

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

from fieldplay.scene import SceneFileError, SceneSchemaError

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_SCHEMA = 3
EXIT_RENDER = 4


@dataclass(frozen=True)
class ExitReport:
    exit_code: int
    message: str = ""


def _classified(func):
    """Map library exceptions onto the documented exit codes."""

    def wrapper(args) -> ExitReport:
        try:
            return func(args)
        except SceneSchemaError as exc:
            return ExitReport(EXIT_SCHEMA, f"schema violation: {exc}")
        except (FileNotFoundError, SceneFileError, OSError, ValueError) as exc:
            return ExitReport(EXIT_BAD_INPUT, f"bad input: {exc}")
        except Exception as exc:  # noqa: BLE001 - CLI boundary
            return ExitReport(EXIT_RENDER, f"{type(exc).__name__}: {exc}")

    return wrapper


@_classified
def cmd_render(args) -> ExitReport:
    import numpy as np

    from fieldplay.audio_io import write_wav
    from fieldplay.render import RenderParams, render_binaural
    from fieldplay.scene import ListenerPose, load_trajectory_csv
    from fieldplay.service import load_scene_bundle

    bundle = load_scene_bundle(args.scene)
    if args.listener_traj:
        listener = load_trajectory_csv(args.listener_traj)
        if not isinstance(listener.samples[0][1], ListenerPose):
            return ExitReport(EXIT_SCHEMA,
                              "listener trajectory needs a heading_deg column")
    else:
        listener = bundle.config.listener_default
    params = RenderParams(window_len=bundle.config.window_len,
                          hop=bundle.config.hop, gain_cap=bundle.config.gain_cap)
    try:
        rendered = render_binaural(bundle.recording, bundle.config.source,
                                   listener, bundle.hrirs, params)
    except Exception as exc:  # noqa: BLE001
        return ExitReport(EXIT_RENDER, f"render failed: {exc}")
    write_wav(args.out, rendered)
    peak = float(np.abs(rendered.data).max()) if rendered.num_samples else 0.0
    print(f"duration_s={rendered.duration:.3f} peak={peak:.4f}")
    return ExitReport(EXIT_OK)


@_classified
def cmd_harmonize(args) -> ExitReport:
    from fieldplay.colormap import harmonize_multiview, load_image, save_color_maps

    images = [(Path(p).stem, load_image(p)) for p in args.images]
    ids = [camera_id for camera_id, _ in images]
    if len(set(ids)) != len(ids):
        return ExitReport(EXIT_BAD_INPUT, f"duplicate camera ids in {ids}")
    if args.reference not in ids:
        return ExitReport(EXIT_BAD_INPUT,
                          f"reference {args.reference!r} not among {ids}")
    maps = harmonize_multiview(images, args.reference, lambda1=args.lambda1)
    if args.out:
        save_color_maps(args.out, maps)
        print(f"wrote {len(maps)} maps to {args.out}")
    else:
        for camera_id, cmap in maps:
            numbers = " ".join(f"{v:.10g}" for v in cmap.flat())
            print(f"{camera_id} {numbers}")
    return ExitReport(EXIT_OK)


@_classified
def cmd_align(args) -> ExitReport:
    from fieldplay.audio_io import read_wav_mono
    from fieldplay.capture import load_stream_manifest, timecode_offsets, xcorr_refine

    headers, manifest_rate = load_stream_manifest(args.manifest)
    session_rate = args.session_rate or manifest_rate or 48000.0
    offsets = timecode_offsets(headers, session_rate)

    if args.refine:
        search = int(round(args.search_ms * session_rate / 1000.0))
        reference = min(headers, key=lambda h: h.start_time)
        if reference.path is None:
            return ExitReport(EXIT_BAD_INPUT,
                              f"stream {reference.stream_id} has no wav path; "
                              f"cannot refine")
        ref_clip = read_wav_mono(reference.path, int(session_rate))
        for header in headers:
            if header.stream_id == reference.stream_id or header.path is None:
                continue
            clip = read_wav_mono(header.path, int(session_rate))
            offsets[header.stream_id] = xcorr_refine(
                ref_clip, clip, offsets[header.stream_id], search)

    rows = [(h.stream_id, offsets[h.stream_id],
             1000.0 * offsets[h.stream_id] / session_rate) for h in headers]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        if args.output == "csv":
            writer = csv.writer(out)
            writer.writerow(["stream_id", "offset_samples", "offset_ms"])
            for stream_id, samples, ms in rows:
                writer.writerow([stream_id, samples, f"{ms:.3f}"])
        else:
            for stream_id, samples, ms in rows:
                print(f"{stream_id}: {samples} samples ({ms:.3f} ms)", file=out)
    finally:
        if args.out:
            out.close()
    return ExitReport(EXIT_OK)


@_classified
def cmd_density(args) -> ExitReport:
    from fieldplay.capture import RigSweep, capture_density

    if args.path:
        rows = _read_path_csv(args.path)
        if args.duration is not None:
            t0 = rows[0][0]
            span = rows[-1][0] - t0
            if span <= 0 or args.duration <= 0:
                return ExitReport(EXIT_BAD_INPUT, "duration must be positive")
            rows = [((t - t0) * args.duration / span, x, y) for t, x, y in rows]
        sweep = RigSweep(args.r, args.h, rows)
    else:
        if args.duration is None:
            return ExitReport(EXIT_BAD_INPUT, "--duration is required without --path")
        sweep = RigSweep.stationary(args.r, args.h, args.duration)
    print(f"{capture_density(sweep):.4f}")
    return ExitReport(EXIT_OK)


def _read_path_csv(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"path file not found: {path}")
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header][:3] != ["t", "x", "y"]:
            raise SceneFileError(f"path file {path}: header must be t,x,y")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                t, x, y = (float(c) for c in row[:3])
            except ValueError as exc:
                raise SceneFileError(f"path file {path}:{lineno}: {exc}") from exc
            rows.append((t, x, y))
    if len(rows) < 2:
        raise SceneFileError(f"path file {path}: need at least 2 rows")
    return rows


@_classified
def cmd_serve(args) -> ExitReport:
    from fieldplay.service import run_server

    run_server(args.scenes, host=args.host, port=args.port, pace=args.pace,
               frontend_dir=args.frontend)
    return ExitReport(EXIT_OK)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldplay",
        description="6-DoF binaural playback, color harmonization, and capture tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render a scene to a stereo WAV")
    p.add_argument("--scene", required=True, help="scene YAML document")
    p.add_argument("--listener-traj",
                   help="listener trajectory CSV (t,x,y,heading_deg); "
                        "defaults to the scene's listener_default")
    p.add_argument("--out", required=True, help="output WAV path")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("harmonize", help="fit per-camera color maps to a reference")
    p.add_argument("images", nargs="+", help="image files; camera id = file stem")
    p.add_argument("--reference", required=True, help="camera id of the reference view")
    p.add_argument("--lambda1", type=float, default=0.2,
                   help="SSIM weight in the loss (default 0.2)")
    p.add_argument("--out", help="write maps here instead of stdout")
    p.set_defaults(func=cmd_harmonize)

    p = sub.add_parser("align", help="timecode-align streams, optionally refine")
    p.add_argument("--manifest", required=True, help="stream manifest YAML")
    p.add_argument("--session-rate", type=float, default=None)
    p.add_argument("--refine", action="store_true",
                   help="cross-correlate against the earliest stream")
    p.add_argument("--search-ms", type=float, default=50.0,
                   help="refine search half-window in ms (default 50)")
    p.add_argument("--output", choices=["csv", "text"], default="csv")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("density", help="spatiotemporal capture density in m^3/s")
    p.add_argument("--r", type=float, required=True, help="rig radius in meters")
    p.add_argument("--h", type=float, required=True, help="rig height in meters")
    p.add_argument("--path", help="rig path CSV (t,x,y); omit for a stationary rig")
    p.add_argument("--duration", type=float,
                   help="capture duration in seconds (required without --path)")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("serve", help="run the streaming service")
    p.add_argument("--scenes", required=True, help="directory of scene YAML files")
    p.add_argument("--host", default=None, help="bind address (env FIELDPLAY_HOST)")
    p.add_argument("--port", type=int, default=None, help="port (env FIELDPLAY_PORT)")
    p.add_argument("--pace", type=float, default=None,
                   help="playback speed factor, 0 = unpaced (env FIELDPLAY_PACE)")
    p.add_argument("--frontend", help="also serve this static directory at /app")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    report = args.func(args)
    if report.message:
        print(report.message, file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
