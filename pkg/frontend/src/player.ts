/**
 * Gapless playback of interleaved stereo chunks through the Web Audio API.
 * Scheduling decisions live in schedule.ts; this class only owns the
 * AudioContext plumbing and the audio-clock-to-wall-clock conversion the
 * latency probe needs.
 */

import { AudioChunk } from "./protocol.js";
import { bufferedAhead, newSchedule, placeChunk, ScheduleState } from "./schedule.js";

export class ChunkPlayer {
  private ctx: AudioContext;
  private schedule: ScheduleState = newSchedule();

  constructor(sampleRate: number) {
    this.ctx = new AudioContext({ sampleRate });
  }

  /** Schedule a chunk; returns its start time in performance.now() terms. */
  play(chunk: AudioChunk): { audibleAtMs: number; underrun: boolean } {
    const buffer = this.ctx.createBuffer(2, chunk.frames, this.ctx.sampleRate);
    const left = buffer.getChannelData(0);
    const right = buffer.getChannelData(1);
    for (let i = 0; i < chunk.frames; i++) {
      left[i] = chunk.samples[2 * i];
      right[i] = chunk.samples[2 * i + 1];
    }
    const placement = placeChunk(this.schedule, this.ctx.currentTime,
                                 chunk.frames / this.ctx.sampleRate);
    const source = this.ctx.createBufferSource();
    source.buffer = buffer;
    source.connect(this.ctx.destination);
    source.start(placement.startAt);
    const audibleAtMs = performance.now()
      + (placement.startAt - this.ctx.currentTime) * 1000;
    return { audibleAtMs, underrun: placement.underrun };
  }

  get underruns(): number {
    return this.schedule.underruns;
  }

  get bufferedSeconds(): number {
    return bufferedAhead(this.schedule, this.ctx.currentTime);
  }

  async resume(): Promise<void> {
    if (this.ctx.state === "suspended") await this.ctx.resume();
  }

  async stop(): Promise<void> {
    await this.ctx.close();
  }
}
