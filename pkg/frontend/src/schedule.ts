/**
 * Gapless chunk scheduling arithmetic, kept pure so it can be tested and so
 * the latency probe can model audibility headlessly.  Times are seconds on
 * the audio clock (AudioContext.currentTime in the browser).
 */

/** Lead given to the very first chunk so its start isn't already in the past. */
export const PRIME_DELAY_S = 0.02;

export interface ScheduleState {
  nextStart: number | null;
  underruns: number;
  scheduled: number;
}

export function newSchedule(): ScheduleState {
  return { nextStart: null, underruns: 0, scheduled: 0 };
}

export interface Placement {
  startAt: number;
  underrun: boolean;
}

/**
 * Decide when the next chunk should start.  Back-to-back while the buffer
 * holds; if the previous chunk has already finished (buffer ran dry) the
 * chunk starts now and the underrun is counted.
 */
export function placeChunk(state: ScheduleState, now: number,
                           durationS: number): Placement {
  let startAt: number;
  let underrun = false;
  if (state.nextStart === null) {
    startAt = now + PRIME_DELAY_S;
  } else if (state.nextStart >= now) {
    startAt = state.nextStart;
  } else {
    startAt = now;
    underrun = true;
    state.underruns += 1;
  }
  state.nextStart = startAt + durationS;
  state.scheduled += 1;
  return { startAt, underrun };
}

/** Seconds of audio queued beyond `now`; negative means starved. */
export function bufferedAhead(state: ScheduleState, now: number): number {
  return state.nextStart === null ? 0 : state.nextStart - now;
}
