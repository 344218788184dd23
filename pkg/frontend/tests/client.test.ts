import { describe, expect, it } from "vitest";

import { StreamClient, WireSocket } from "../src/client.js";
import { CHUNK_HEADER_BYTES } from "../src/protocol.js";

class FakeSocket implements WireSocket {
  binaryType = "blob";
  onopen: ((ev: any) => void) | null = null;
  onmessage: ((ev: any) => void) | null = null;
  onclose: ((ev: any) => void) | null = null;
  onerror: ((ev: any) => void) | null = null;
  sent: string[] = [];
  closed = false;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.({});
  }
}

function connected(handlers: ConstructorParameters<typeof StreamClient>[1]) {
  const socket = new FakeSocket();
  const client = new StreamClient(() => socket, handlers);
  client.connect("ws://example/stream");
  socket.onopen?.({});
  return { socket, client };
}

function chunkBuffer(seq: number, frames = 2): ArrayBuffer {
  const buffer = new ArrayBuffer(CHUNK_HEADER_BYTES + frames * 8);
  new DataView(buffer).setUint32(0, seq, true);
  return buffer;
}

describe("StreamClient", () => {
  it("requests arraybuffer frames and reports state changes", () => {
    const states: string[] = [];
    const { socket, client } = connected({ onState: (s) => states.push(s) });
    expect(socket.binaryType).toBe("arraybuffer");
    expect(client.state).toBe("open");
    expect(states).toEqual(["connecting", "open"]);
  });

  it("delivers parsed chunks", () => {
    const seqs: number[] = [];
    const { socket } = connected({ onChunk: (c) => seqs.push(c.seq) });
    socket.onmessage?.({ data: chunkBuffer(0) });
    socket.onmessage?.({ data: chunkBuffer(1) });
    expect(seqs).toEqual([0, 1]);
  });

  it("skips malformed frames without dropping the stream", () => {
    const seqs: number[] = [];
    const { socket } = connected({ onChunk: (c) => seqs.push(c.seq) });
    socket.onmessage?.({ data: new ArrayBuffer(3) });       // shorter than header
    socket.onmessage?.({ data: "definitely not json" });    // bad control frame
    socket.onmessage?.({ data: chunkBuffer(5) });
    expect(seqs).toEqual([5]);
  });

  it("finishes on eos", () => {
    let eos = false;
    const { socket, client } = connected({ onEos: () => (eos = true) });
    socket.onmessage?.({ data: '{"type": "eos"}' });
    expect(eos).toBe(true);
    expect(client.state).toBe("finished");
  });

  it("refuses to send poses on a closed socket", () => {
    const socket = new FakeSocket();
    const client = new StreamClient(() => socket, {});
    expect(client.sendPose({ x: 0, y: 0, headingDeg: 0 }, 1.0)).toBe(false);
    client.connect("ws://example/stream");
    socket.onopen?.({});
    expect(client.sendPose({ x: 1, y: 2, headingDeg: 90 }, 2.0)).toBe(true);
    expect(JSON.parse(socket.sent[0]).heading_deg).toBe(90);
    socket.close();
    expect(client.state).toBe("closed");
    expect(client.sendPose({ x: 0, y: 0, headingDeg: 0 }, 3.0)).toBe(false);
  });
});
