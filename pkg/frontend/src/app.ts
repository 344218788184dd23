/**
 * Entry point: load config.json, pick a scene, open a session, then wire the
 * map, coalescer, stream client, player, gap detector, and latency probe
 * together.  Poses are flushed at most once per animation frame.
 */

import { DEFAULT_BOUNDS, SceneBounds } from "./bounds.js";
import { createSession, fetchScenes, socketUrl, StreamClient } from "./client.js";
import { PoseCoalescer } from "./coalesce.js";
import { GapDetector } from "./gaps.js";
import { LatencyProbe } from "./latency.js";
import { MapView } from "./mapview.js";
import { ChunkPlayer } from "./player.js";
import { channelRms } from "./protocol.js";

interface AppConfig {
  server: string;
  bounds?: SceneBounds;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const config: AppConfig = await (await fetch("./config.json")).json();
  const statusLine = el<HTMLSpanElement>("status");
  const meters = el<HTMLSpanElement>("meters");
  const sceneSelect = el<HTMLSelectElement>("scene");
  const startButton = el<HTMLButtonElement>("start");

  const scenes = await fetchScenes(config.server);
  if (!scenes.length) {
    statusLine.textContent = "no scenes on the server";
    return;
  }
  for (const id of scenes) {
    const option = document.createElement("option");
    option.value = id;
    option.textContent = id;
    sceneSelect.appendChild(option);
  }
  statusLine.textContent = "pick a scene and press start";

  startButton.onclick = () => {
    startButton.disabled = true;
    run(config, sceneSelect.value, statusLine, meters).catch((err) => {
      statusLine.textContent = `error: ${err}`;
      startButton.disabled = false;
    });
  };
}

async function run(config: AppConfig, sceneId: string,
                   statusLine: HTMLSpanElement,
                   meters: HTMLSpanElement): Promise<void> {
  const info = await createSession(config.server, sceneId);
  const player = new ChunkPlayer(info.sampleRate);
  await player.resume();

  const coalescer = new PoseCoalescer();
  const gaps = new GapDetector();
  const probe = new LatencyProbe();
  let playedFrames = 0;

  const canvas = el<HTMLCanvasElement>("map");
  const view = new MapView(canvas, config.bounds ?? DEFAULT_BOUNDS,
                           info.sourcePath, info.listenerDefault,
                           { onPose: (pose) => coalescer.set(pose) });

  const client = new StreamClient((url) => new WebSocket(url), {
    onState: (state) => (view.status = `stream: ${state}`),
    onEos: () => (view.status = "finished"),
    onChunk: (chunk) => {
      gaps.feed(chunk.seq);
      const { audibleAtMs } = player.play(chunk);
      const latency = probe.chunkAudible(chunk.poseTime, audibleAtMs / 1000);
      playedFrames += chunk.frames;
      view.playheadS = playedFrames / info.sampleRate;
      const rms = channelRms(chunk.samples);
      meters.textContent =
        `L ${rms.left.toFixed(3)}  R ${rms.right.toFixed(3)}  ` +
        `buffer ${player.bufferedSeconds.toFixed(2)}s  ` +
        `underruns ${player.underruns}  gaps ${gaps.gaps}` +
        (latency !== null ? `  drag->audible ${(latency * 1000).toFixed(0)}ms` : "");
      if (player.underruns > 0) {
        statusLine.textContent = "buffer underrun (network or CPU starved)";
      }
    },
  });
  client.connect(socketUrl(config.server, info));

  const tick = () => {
    const pose = coalescer.flush();
    if (pose !== null) {
      const clientTime = performance.now() / 1000;
      if (client.sendPose(pose, clientTime)) {
        probe.markSent(clientTime, clientTime);
      }
    }
    view.draw();
    requestAnimationFrame(tick);
  };
  statusLine.textContent = `playing ${sceneId} (${info.durationS.toFixed(1)}s)`;
  requestAnimationFrame(tick);
}

boot().catch((err) => {
  document.body.insertAdjacentText("beforeend", `boot failed: ${err}`);
});
