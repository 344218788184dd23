/**
 * Pose coalescer: pointer events arrive far faster than the service needs.
 * Drags overwrite a single pending slot; flush() is called once per
 * animation tick and emits at most one message.
 */

import type { Pose } from "./protocol.js";

export class PoseCoalescer {
  private pending: Pose | null = null;
  private updates = 0;
  private flushes = 0;

  set(pose: Pose): void {
    this.pending = pose;
    this.updates += 1;
  }

  /** The coalesced pose for this tick, or null when nothing changed. */
  flush(): Pose | null {
    const pose = this.pending;
    this.pending = null;
    if (pose !== null) this.flushes += 1;
    return pose;
  }

  get stats(): { updates: number; sent: number } {
    return { updates: this.updates, sent: this.flushes };
  }
}
