/**
 * Wire protocol shared with the fieldplay stream service.
 *
 * Binary chunk layout (little endian): uint32 sequence number, uint32
 * reserved, float64 client_time of the pose in effect for the chunk, then
 * interleaved stereo float32 samples.  Control messages are JSON text.
 */

export const CHUNK_HEADER_BYTES = 16;

export interface AudioChunk {
  seq: number;
  poseTime: number;
  /** Interleaved stereo samples (L0 R0 L1 R1 ...). */
  samples: Float32Array;
  /** Stereo frame count (samples.length / 2). */
  frames: number;
}

export function parseChunk(buffer: ArrayBuffer): AudioChunk {
  if (buffer.byteLength < CHUNK_HEADER_BYTES) {
    throw new Error(`chunk shorter than header: ${buffer.byteLength} bytes`);
  }
  const view = new DataView(buffer);
  const seq = view.getUint32(0, true);
  const poseTime = view.getFloat64(8, true);
  const bodyBytes = buffer.byteLength - CHUNK_HEADER_BYTES;
  if (bodyBytes % 8 !== 0) {
    throw new Error(`chunk body is not whole stereo float32 frames: ${bodyBytes} bytes`);
  }
  const samples = new Float32Array(buffer, CHUNK_HEADER_BYTES, bodyBytes / 4);
  return { seq, poseTime, samples, frames: bodyBytes / 8 };
}

export interface Pose {
  x: number;
  y: number;
  headingDeg: number;
}

export function buildPoseMessage(pose: Pose, clientTime: number): string {
  return JSON.stringify({
    type: "pose",
    x: pose.x,
    y: pose.y,
    heading_deg: pose.headingDeg,
    client_time: clientTime,
  });
}

export type ControlMessage = { type: "eos" } | { type: string; [key: string]: unknown };

export function parseControl(text: string): ControlMessage {
  const parsed = JSON.parse(text);
  if (typeof parsed !== "object" || parsed === null || typeof parsed.type !== "string") {
    throw new Error(`malformed control message: ${text}`);
  }
  return parsed as ControlMessage;
}

/** Per-channel RMS of an interleaved stereo buffer; handy for level meters. */
export function channelRms(samples: Float32Array): { left: number; right: number } {
  let left = 0;
  let right = 0;
  const frames = samples.length / 2;
  for (let i = 0; i < frames; i++) {
    left += samples[2 * i] * samples[2 * i];
    right += samples[2 * i + 1] * samples[2 * i + 1];
  }
  return {
    left: frames ? Math.sqrt(left / frames) : 0,
    right: frames ? Math.sqrt(right / frames) : 0,
  };
}
