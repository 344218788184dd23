import math

import numpy as np
import pytest

from fieldplay.render import render_binaural
from fieldplay.scene import ListenerPose
from fieldplay.service import (
    Session,
    SessionClosedError,
    create_app,
    load_scene_bundle,
)
from fieldplay.service_protocol import pack_chunk, unpack_chunk

from conftest import panning_hrir_entries, write_scene
from oracles import relative_l2


@pytest.fixture
def scene_path(tmp_path, rng):
    recording = 0.3 * rng.standard_normal(48000)  # 1 s
    return write_scene(tmp_path, recording, panning_hrir_entries(48),
                       source=((0.0, 0.0, 2.0),),
                       listener={"x": 0.0, "y": 0.0, "heading_deg": 0.0})


@pytest.fixture
def bundle(scene_path):
    return load_scene_bundle(scene_path)


def drain(session):
    chunks = []
    while True:
        chunk = session.next_chunk()
        if chunk is None:
            break
        chunks.append(chunk)
    return chunks


class TestSession:
    def test_default_pose_when_none_set(self, bundle):
        session = Session(bundle, chunk_len=4096)
        chunks = drain(session)
        offline = render_binaural(bundle.recording, bundle.config.source,
                                  bundle.config.listener_default, bundle.hrirs)
        joined = np.concatenate([c[2] for c in chunks], axis=0)
        assert joined.shape[0] == offline.num_samples
        assert relative_l2(joined, offline.data.astype(np.float32)) <= 1e-4

    def test_sequence_numbers_count_up(self, bundle):
        session = Session(bundle, chunk_len=4096)
        seqs = [c[0] for c in drain(session)]
        assert seqs == list(range(len(seqs)))
        assert len(seqs) == math.ceil(48000 / 4096)

    def test_chunk_len_must_be_hop_multiple(self, bundle):
        with pytest.raises(ValueError, match="multiple"):
            Session(bundle, chunk_len=1000)

    def test_last_write_wins(self, bundle):
        session = Session(bundle, chunk_len=4096)
        first = session.update_pose(ListenerPose(1, 0, 0), client_time=1.0)
        second = session.update_pose(ListenerPose(0, 1, 0), client_time=2.0)
        assert first.applied and second.applied
        seq, pose_time, _ = session.next_chunk()
        assert pose_time == 2.0

    def test_stale_update_dropped(self, bundle):
        session = Session(bundle, chunk_len=4096)
        session.update_pose(ListenerPose(1, 0, 0), client_time=5.0)
        ack = session.update_pose(ListenerPose(0, 1, 0), client_time=4.0)
        assert not ack.applied
        assert "stale" in ack.reason
        _, pose_time, _ = session.next_chunk()
        assert pose_time == 5.0

    def test_pose_on_source_renders_with_cap(self, bundle):
        session = Session(bundle, chunk_len=4096)
        session.update_pose(ListenerPose(0.0, 2.0, 0.0), client_time=1.0)
        chunks = drain(session)
        joined = np.concatenate([c[2] for c in chunks], axis=0)
        offline = render_binaural(bundle.recording, bundle.config.source,
                                  ListenerPose(0.0, 2.0, 0.0), bundle.hrirs)
        assert relative_l2(joined, offline.data.astype(np.float32)) <= 1e-4
        assert np.all(np.isfinite(joined))

    def test_fixed_pose_stream_matches_offline_bitwise(self, bundle):
        pose = ListenerPose(0.4, -0.8, 0.7)
        session = Session(bundle, chunk_len=4096)
        session.update_pose(pose, client_time=1.0)
        joined = np.concatenate([c[2] for c in drain(session)], axis=0)
        offline = render_binaural(bundle.recording, bundle.config.source, pose,
                                  bundle.hrirs)
        np.testing.assert_array_equal(joined, offline.data.astype(np.float32))

    def test_replaying_pose_log_is_bit_identical(self, bundle, rng):
        log = {}
        t = 0.0
        for i in range(12):
            if rng.uniform() < 0.7:
                t += float(rng.uniform(0.01, 0.2))
                log[i] = (ListenerPose(*rng.uniform(-2, 2, 2),
                                       rng.uniform(-math.pi, math.pi)), t)

        def run():
            session = Session(bundle, chunk_len=4096)
            out = []
            i = 0
            while True:
                if i in log:
                    pose, when = log[i]
                    session.update_pose(pose, when)
                chunk = session.next_chunk()
                if chunk is None:
                    break
                out.append(chunk[2].tobytes())
                i += 1
            return out

        first, second = run(), run()
        assert len(first) == len(second)
        for a, b in zip(first, second):
            assert a == b

    def test_closed_session_rejects_operations(self, bundle):
        session = Session(bundle, chunk_len=4096)
        session.close()
        with pytest.raises(SessionClosedError):
            session.update_pose(ListenerPose(0, 0, 0), 0.0)
        with pytest.raises(SessionClosedError):
            session.next_chunk()

    def test_playhead_monotone(self, bundle):
        session = Session(bundle, chunk_len=4096)
        positions = [session.renderer.emitted]
        while (chunk := session.next_chunk()) is not None:
            positions.append(session.renderer.emitted)
        assert positions == sorted(positions)


class TestChunkWireFormat:
    def test_round_trip(self, rng):
        samples = rng.standard_normal((256, 2)).astype(np.float32)
        seq, pose_time, got = unpack_chunk(pack_chunk(7, 1.25, samples))
        assert seq == 7
        assert pose_time == 1.25
        np.testing.assert_array_equal(got, samples)

    def test_truncated_payload_rejected(self):
        with pytest.raises(ValueError):
            unpack_chunk(b"\x00\x01")


@pytest.fixture
def client(scene_path):
    from fastapi.testclient import TestClient

    app = create_app(scene_path.parent, pace=0.0)
    with TestClient(app) as client:
        yield client


class TestHttpSurface:
    def test_list_scenes(self, client, scene_path):
        body = client.get("/scenes").json()
        assert {"id": scene_path.stem} in body["scenes"]

    def test_create_session(self, client, scene_path):
        resp = client.post("/sessions", json={"scene_id": scene_path.stem})
        assert resp.status_code == 201
        body = resp.json()
        assert body["sample_rate"] == 48000
        assert body["chunk_len"] == 4096
        assert body["socket_url"].endswith("/stream")

    def test_unknown_scene_404(self, client):
        assert client.post("/sessions", json={"scene_id": "nope"}).status_code == 404

    def test_missing_scene_id_422(self, client):
        assert client.post("/sessions", json={}).status_code == 422

    def test_stream_delivers_chunks_and_eos(self, client, scene_path):
        created = client.post("/sessions",
                              json={"scene_id": scene_path.stem}).json()
        seqs = []
        with client.websocket_connect(created["socket_url"]) as ws:
            ws.send_json({"type": "pose", "x": 0.5, "y": 0.5, "heading_deg": 90,
                          "client_time": 1.0})
            while True:
                message = ws.receive()
                if "bytes" in message and message["bytes"] is not None:
                    seq, _, samples = unpack_chunk(message["bytes"])
                    seqs.append(seq)
                    assert samples.shape[1] == 2
                elif "text" in message and message["text"]:
                    import json

                    assert json.loads(message["text"]) == {"type": "eos"}
                    break
        assert seqs == list(range(len(seqs)))
        assert sum(s for s in seqs) >= 0 and len(seqs) == math.ceil(48000 / 4096)
