import { describe, expect, it } from "vitest";

import {
  buildPoseMessage,
  channelRms,
  CHUNK_HEADER_BYTES,
  parseChunk,
  parseControl,
} from "../src/protocol.js";

function makeChunk(seq: number, poseTime: number, frames: number[][]): ArrayBuffer {
  const buffer = new ArrayBuffer(CHUNK_HEADER_BYTES + frames.length * 8);
  const view = new DataView(buffer);
  view.setUint32(0, seq, true);
  view.setUint32(4, 0, true);
  view.setFloat64(8, poseTime, true);
  frames.forEach(([left, right], i) => {
    view.setFloat32(CHUNK_HEADER_BYTES + 8 * i, left, true);
    view.setFloat32(CHUNK_HEADER_BYTES + 8 * i + 4, right, true);
  });
  return buffer;
}

describe("parseChunk", () => {
  it("decodes header and interleaved samples", () => {
    const chunk = parseChunk(makeChunk(7, 1.25, [[0.5, -0.5], [0.25, 0.125]]));
    expect(chunk.seq).toBe(7);
    expect(chunk.poseTime).toBe(1.25);
    expect(chunk.frames).toBe(2);
    expect(Array.from(chunk.samples)).toEqual([0.5, -0.5, 0.25, 0.125]);
  });

  it("rejects payloads shorter than the header", () => {
    expect(() => parseChunk(new ArrayBuffer(4))).toThrow(/shorter/);
  });

  it("rejects ragged bodies", () => {
    expect(() => parseChunk(new ArrayBuffer(CHUNK_HEADER_BYTES + 6))).toThrow(/stereo/);
  });
});

describe("buildPoseMessage", () => {
  it("matches the service's inbound schema", () => {
    const msg = JSON.parse(buildPoseMessage({ x: 1, y: 2, headingDeg: -90 }, 3.5));
    expect(msg).toEqual({ type: "pose", x: 1, y: 2, heading_deg: -90, client_time: 3.5 });
  });
});

describe("parseControl", () => {
  it("parses eos", () => {
    expect(parseControl('{"type": "eos"}')).toEqual({ type: "eos" });
  });

  it("rejects messages without a type", () => {
    expect(() => parseControl("{}")).toThrow(/malformed/);
  });
});

describe("channelRms", () => {
  it("separates the channels", () => {
    const samples = new Float32Array([1, 0, 1, 0, 1, 0, 1, 0]);
    const rms = channelRms(samples);
    expect(rms.left).toBeCloseTo(1.0, 6);
    expect(rms.right).toBeCloseTo(0.0, 6);
  });
});
