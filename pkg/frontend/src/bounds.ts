/** Scene bounds and heading conventions for the map. */

import type { Pose } from "./protocol.js";

export interface SceneBounds {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export const DEFAULT_BOUNDS: SceneBounds = { xMin: -4, xMax: 4, yMin: -4, yMax: 4 };

export function clampToBounds(pose: Pose, bounds: SceneBounds): Pose {
  return {
    x: Math.min(Math.max(pose.x, bounds.xMin), bounds.xMax),
    y: Math.min(Math.max(pose.y, bounds.yMin), bounds.yMax),
    headingDeg: normalizeHeadingDeg(pose.headingDeg),
  };
}

/** Wrap into (-180, 180], matching the backend's heading convention. */
export function normalizeHeadingDeg(deg: number): number {
  let h = deg % 360;
  if (h <= -180) h += 360;
  if (h > 180) h -= 360;
  return h === -180 ? 180 : h;
}

/**
 * Unit facing vector for a heading (degrees CCW from +y), in world axes.
 * Heading 0 faces +y, +90 faces -x.
 */
export function facingVector(headingDeg: number): { dx: number; dy: number } {
  const rad = (headingDeg * Math.PI) / 180;
  return { dx: -Math.sin(rad), dy: Math.cos(rad) };
}
