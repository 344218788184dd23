/**
 * Drag-to-audible latency probe.
 *
 * Every outbound pose carries a client_time; the service echoes, in each
 * binary chunk header, the client_time of the pose that chunk was rendered
 * under.  When a chunk whose pose_time covers a pending probe becomes
 * audible, the probe records (audible time - send time).
 */

export interface LatencySample {
  clientTime: number;
  latencyS: number;
}

export class LatencyProbe {
  private pending: Array<{ clientTime: number; sentAt: number }> = [];
  readonly samples: LatencySample[] = [];

  markSent(clientTime: number, sentAt: number): void {
    this.pending.push({ clientTime, sentAt });
  }

  /**
   * Report a chunk becoming audible.  Returns the latency for the newest
   * pending probe the chunk covers (pose_time >= probe client_time), or
   * null; older covered probes are discarded as superseded.
   */
  chunkAudible(poseTime: number, audibleAt: number): number | null {
    let newest: { clientTime: number; sentAt: number } | null = null;
    const rest: Array<{ clientTime: number; sentAt: number }> = [];
    for (const probe of this.pending) {
      if (probe.clientTime <= poseTime) {
        if (newest === null || probe.clientTime > newest.clientTime) newest = probe;
      } else {
        rest.push(probe);
      }
    }
    this.pending = rest;
    if (newest === null) return null;
    const latencyS = audibleAt - newest.sentAt;
    this.samples.push({ clientTime: newest.clientTime, latencyS });
    return latencyS;
  }

  get last(): LatencySample | null {
    return this.samples.length ? this.samples[this.samples.length - 1] : null;
  }
}
