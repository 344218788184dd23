"""Session-oriented streaming service around the block renderer.

One session = one recording played once for one listener.  Pose updates go
through a single-slot last-write-wins mailbox; the render loop reads the
slot once per chunk, so a chunk is always rendered under one constant
listener pose and replaying a pose log reproduces the byte-identical chunk
stream.

HTTP surface (FastAPI):
  GET  /scenes                 list scene ids found in the scene directory
  POST /sessions               {"scene_id": ..., "chunk_len": optional}
  WS   /sessions/{id}/stream   inbound  {"type": "pose", x, y, heading_deg, client_time}
                               outbound binary chunks + {"type": "eos"}

Binary chunk layout (little endian): uint32 sequence number, uint32 reserved,
float64 client_time of the pose in effect (0 when none was ever set), then
interleaved stereo float32 samples.
"""

import asyncio
import logging
import math
import os
import sys
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from fieldplay.audio_io import read_wav_mono
from fieldplay.hrtf import HrirSet, load_hrir_dir
from fieldplay.render import BlockRenderer, RenderParams
from fieldplay.scene import AudioClip, ListenerPose, SceneConfig, load_scene_config
from fieldplay.service_protocol import pack_chunk

logger = logging.getLogger("fieldplay.service")

DEFAULT_CHUNK_LEN = 4096


class SessionClosedError(RuntimeError):
    """Operation on a session that has already been closed."""


@dataclass(frozen=True)
class SceneBundle:
    """A scene with its recording and HRIRs loaded at the session rate."""

    scene_id: str
    config: SceneConfig
    recording: AudioClip
    hrirs: HrirSet


def load_scene_bundle(config_path, scene_id: Optional[str] = None) -> SceneBundle:
    config_path = Path(config_path)
    config = load_scene_config(config_path)
    recording = read_wav_mono(config.recording_path, config.sample_rate)
    hrirs = load_hrir_dir(config.hrir_path, session_rate=recording.sample_rate)
    return SceneBundle(scene_id=scene_id or config_path.stem, config=config,
                       recording=recording, hrirs=hrirs)


@dataclass(frozen=True)
class PoseAck:
    applied: bool
    reason: str = ""


class Session:
    """Deterministic chunked render of one scene for one listener."""

    def __init__(self, bundle: SceneBundle, chunk_len: int = DEFAULT_CHUNK_LEN):
        config = bundle.config
        if chunk_len <= 0 or chunk_len % config.hop:
            raise ValueError(f"chunk_len ({chunk_len}) must be a positive multiple "
                             f"of the STFT hop ({config.hop})")
        self.bundle = bundle
        self.chunk_len = chunk_len
        self.sample_rate = bundle.recording.sample_rate
        self.renderer = BlockRenderer(
            bundle.recording, config.source, bundle.hrirs,
            RenderParams(window_len=config.window_len, hop=config.hop,
                         gain_cap=config.gain_cap))
        self.seq = 0
        self.closed = False
        self._lock = threading.Lock()
        self._pose = config.listener_default
        self._pose_time = 0.0
        self._pose_ever_set = False

    @property
    def chunk_duration(self) -> float:
        return self.chunk_len / self.sample_rate

    def update_pose(self, pose: ListenerPose, client_time: float) -> PoseAck:
        """Last-write-wins pose mailbox; out-of-order updates are dropped."""
        if self.closed:
            raise SessionClosedError("session is closed")
        if not math.isfinite(client_time):
            return PoseAck(False, "bad client_time")
        with self._lock:
            if self._pose_ever_set and client_time < self._pose_time:
                return PoseAck(False, "stale")
            self._pose = pose
            self._pose_time = client_time
            self._pose_ever_set = True
        return PoseAck(True)

    def next_chunk(self):
        """Render the next chunk under the current pose.

        Returns (seq, pose_time, float32 array (n, 2)) or None at end of
        stream.  The final chunk may be shorter than chunk_len.
        """
        if self.closed:
            raise SessionClosedError("session is closed")
        if self.renderer.exhausted:
            return None
        with self._lock:
            pose = self._pose
            pose_time = self._pose_time
        block = self.renderer.emit(self.chunk_len, lambda t: pose)
        seq = self.seq
        self.seq += 1
        return seq, pose_time, block.astype(np.float32)

    def close(self):
        self.closed = True


class SceneLibrary:
    """Scene configs discovered in a directory, loaded lazily and cached."""

    def __init__(self, scenes_dir):
        self.scenes_dir = Path(scenes_dir)
        self._bundles = {}
        self._lock = threading.Lock()

    def scene_ids(self):
        return sorted(p.stem for p in self.scenes_dir.glob("*.yaml"))

    def bundle(self, scene_id: str) -> SceneBundle:
        with self._lock:
            if scene_id not in self._bundles:
                path = self.scenes_dir / f"{scene_id}.yaml"
                if not path.exists():
                    raise KeyError(scene_id)
                logger.info("event=scene_load scene=%s", scene_id)
                self._bundles[scene_id] = load_scene_bundle(path, scene_id)
            return self._bundles[scene_id]


def create_app(scenes_dir, pace: Optional[float] = None, lead_chunks: float = 0.5):
    """Build the FastAPI app serving scene listing, sessions, and streams.

    ``pace`` scales playback speed (1.0 = real time, 0 = unpaced); defaults
    to the FIELDPLAY_PACE environment variable.  ``lead_chunks`` is how far
    ahead of real time chunks are pushed: enough client buffer to ride out
    scheduling jitter while keeping pose-to-audible latency well under two
    chunk durations.
    """
    from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
    from fastapi.concurrency import run_in_threadpool
    from fastapi.middleware.cors import CORSMiddleware

    if pace is None:
        pace = float(os.environ.get("FIELDPLAY_PACE", "1.0"))
    from fieldplay.accel import warm_kernels

    warm_kernels()  # JIT now, not on the first paced chunk
    library = SceneLibrary(scenes_dir)
    sessions = {}

    app = FastAPI(title="fieldplay stream service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    app.state.library = library
    app.state.sessions = sessions

    @app.get("/scenes")
    def list_scenes():
        return {"scenes": [{"id": sid} for sid in library.scene_ids()]}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        scene_id = body.get("scene_id")
        chunk_len = int(body.get("chunk_len", DEFAULT_CHUNK_LEN))
        if not scene_id:
            raise HTTPException(422, "scene_id is required")
        try:
            bundle = library.bundle(scene_id)
        except KeyError:
            raise HTTPException(404, f"unknown scene {scene_id!r}") from None
        try:
            session = Session(bundle, chunk_len)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from None
        session_id = uuid.uuid4().hex
        sessions[session_id] = session
        logger.info("event=session_create session=%s scene=%s chunk_len=%d",
                    session_id, scene_id, chunk_len)
        return {
            "session_id": session_id,
            "socket_url": f"/sessions/{session_id}/stream",
            "sample_rate": session.sample_rate,
            "chunk_len": session.chunk_len,
            "chunk_duration_s": session.chunk_duration,
            "source_path": [[t, p.x, p.y] for t, p in bundle.config.source.samples],
            "listener_default": {
                "x": bundle.config.listener_default.x,
                "y": bundle.config.listener_default.y,
                "heading_deg": math.degrees(bundle.config.listener_default.heading),
            },
            "duration_s": bundle.recording.duration,
        }

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        session = sessions.get(session_id)
        if session is None:
            await ws.close(code=4404)
            return
        await ws.accept()
        logger.info("event=stream_open session=%s", session_id)

        async def receive_poses():
            while True:
                message = await ws.receive_json()
                if message.get("type") != "pose":
                    logger.warning("event=bad_message session=%s type=%r",
                                   session_id, message.get("type"))
                    continue
                try:
                    pose = ListenerPose(float(message["x"]), float(message["y"]),
                                        math.radians(float(message["heading_deg"])))
                    ack = session.update_pose(pose, float(message.get("client_time", 0.0)))
                except (KeyError, TypeError, ValueError) as exc:
                    logger.warning("event=bad_pose session=%s error=%s",
                                   session_id, exc)
                    continue
                if not ack.applied:
                    logger.debug("event=pose_dropped session=%s reason=%s",
                                 session_id, ack.reason)

        async def send_chunks():
            start = time.monotonic()
            index = 0
            while True:
                if pace > 0:
                    due = start + max(0.0, index - lead_chunks) \
                        * session.chunk_duration / pace
                    delay = due - time.monotonic()
                    if delay > 0:
                        await asyncio.sleep(delay)
                chunk = await run_in_threadpool(session.next_chunk)
                if chunk is None:
                    await ws.send_json({"type": "eos"})
                    logger.info("event=stream_eos session=%s chunks=%d",
                                session_id, index)
                    return
                seq, pose_time, samples = chunk
                await ws.send_bytes(pack_chunk(seq, pose_time, samples))
                index += 1

        receiver = asyncio.create_task(receive_poses())
        try:
            await send_chunks()
        except WebSocketDisconnect:
            pass
        finally:
            receiver.cancel()
            session.close()
            sessions.pop(session_id, None)
            logger.info("event=stream_close session=%s", session_id)

    return app


def run_server(scenes_dir, host: Optional[str] = None, port: Optional[int] = None,
               pace: Optional[float] = None, frontend_dir=None) -> None:
    """Blocking uvicorn server; host/port fall back to FIELDPLAY_HOST/PORT."""
    import uvicorn

    host = host or os.environ.get("FIELDPLAY_HOST", "127.0.0.1")
    port = port or int(os.environ.get("FIELDPLAY_PORT", "8731"))
    app = create_app(scenes_dir, pace=pace)
    if frontend_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/app", StaticFiles(directory=frontend_dir, html=True),
                  name="frontend")
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s %(message)s")
    uvicorn.run(app, host=host, port=port, log_level="info")
