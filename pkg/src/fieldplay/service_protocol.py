"""Binary wire format for streamed audio chunks.

Layout (little endian): uint32 sequence number, uint32 reserved (zero),
float64 pose client_time, then interleaved stereo float32 samples.  The
header lets clients report sequence gaps and measure pose-to-audio latency.
"""

import struct

import numpy as np

CHUNK_HEADER = struct.Struct("<IId")


def pack_chunk(seq: int, pose_time: float, samples: np.ndarray) -> bytes:
    """Serialize one stereo float32 chunk; samples shape (n, 2)."""
    interleaved = np.ascontiguousarray(samples, dtype="<f4")
    return CHUNK_HEADER.pack(seq, 0, pose_time) + interleaved.tobytes()


def unpack_chunk(payload: bytes):
    """Parse a binary chunk into (seq, pose_time, samples (n, 2))."""
    if len(payload) < CHUNK_HEADER.size:
        raise ValueError(f"chunk shorter than header: {len(payload)} bytes")
    seq, _, pose_time = CHUNK_HEADER.unpack_from(payload)
    body = payload[CHUNK_HEADER.size:]
    if len(body) % 8:
        raise ValueError("chunk body is not whole stereo float32 frames")
    samples = np.frombuffer(body, dtype="<f4").reshape(-1, 2)
    return seq, pose_time, samples
