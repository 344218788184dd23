/**
 * HTTP session setup and the WebSocket stream client.
 *
 * The socket is injected as a factory producing anything shaped like a
 * browser WebSocket, so the same client runs in the browser and under node
 * (the integration tests pass the `ws` implementation).
 */

import { AudioChunk, buildPoseMessage, parseChunk, parseControl, Pose } from "./protocol.js";

export interface SessionInfo {
  sessionId: string;
  socketPath: string;
  sampleRate: number;
  chunkLen: number;
  chunkDurationS: number;
  durationS: number;
  sourcePath: Array<[number, number, number]>;
  listenerDefault: Pose;
}

export async function fetchScenes(server: string,
                                  fetchImpl: typeof fetch = fetch): Promise<string[]> {
  const resp = await fetchImpl(`${server}/scenes`);
  if (!resp.ok) throw new Error(`GET /scenes failed: ${resp.status}`);
  const body = await resp.json();
  return (body.scenes as Array<{ id: string }>).map((s) => s.id);
}

export async function createSession(server: string, sceneId: string,
                                    fetchImpl: typeof fetch = fetch): Promise<SessionInfo> {
  const resp = await fetchImpl(`${server}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ scene_id: sceneId }),
  });
  if (!resp.ok) throw new Error(`POST /sessions failed: ${resp.status}`);
  const body = await resp.json();
  return {
    sessionId: body.session_id,
    socketPath: body.socket_url,
    sampleRate: body.sample_rate,
    chunkLen: body.chunk_len,
    chunkDurationS: body.chunk_duration_s,
    durationS: body.duration_s,
    sourcePath: body.source_path,
    listenerDefault: {
      x: body.listener_default.x,
      y: body.listener_default.y,
      headingDeg: body.listener_default.heading_deg,
    },
  };
}

export function socketUrl(server: string, info: SessionInfo): string {
  return server.replace(/^http/, "ws") + info.socketPath;
}

/** The subset of the WebSocket interface the client needs.
 *  Handler params are `any` so both the browser WebSocket and the node `ws`
 *  implementation satisfy it structurally. */
export interface WireSocket {
  binaryType: string;
  onopen: ((ev: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
  onerror: ((ev: any) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => WireSocket;

export type ConnectionState = "connecting" | "open" | "finished" | "closed" | "error";

export interface StreamHandlers {
  onChunk?: (chunk: AudioChunk) => void;
  onEos?: () => void;
  onState?: (state: ConnectionState) => void;
}

export class StreamClient {
  private socket: WireSocket | null = null;
  state: ConnectionState = "closed";

  constructor(private readonly factory: SocketFactory,
              private readonly handlers: StreamHandlers = {}) {}

  connect(url: string): void {
    const socket = this.factory(url);
    socket.binaryType = "arraybuffer";
    this.socket = socket;
    this.setState("connecting");
    socket.onopen = () => this.setState("open");
    socket.onclose = () => {
      if (this.state !== "finished" && this.state !== "error") {
        this.setState("closed");
      }
    };
    socket.onerror = () => this.setState("error");
    socket.onmessage = (ev) => this.dispatch(ev.data);
  }

  /** Returns false when the socket is not open (drag handlers must not throw). */
  sendPose(pose: Pose, clientTime: number): boolean {
    if (this.socket === null || this.state !== "open") return false;
    this.socket.send(buildPoseMessage(pose, clientTime));
    return true;
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
  }

  private dispatch(data: unknown): void {
    try {
      if (typeof data === "string") {
        const control = parseControl(data);
        if (control.type === "eos") {
          this.setState("finished");
          this.handlers.onEos?.();
        }
        return;
      }
      if (data instanceof ArrayBuffer) {
        this.handlers.onChunk?.(parseChunk(data));
        return;
      }
      console.warn("unexpected frame type", typeof data);
    } catch (err) {
      // malformed frame: log and keep the stream alive
      console.warn("dropping malformed frame:", err);
    }
  }

  private setState(state: ConnectionState): void {
    this.state = state;
    this.handlers.onState?.(state);
  }
}
