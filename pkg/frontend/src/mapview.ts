/**
 * Top-down scene map on a canvas: mic at the origin, source trajectory
 * polyline, playhead-driven source dot, and a draggable listener marker
 * whose arrow shows the heading (0 = up/+y, positive turns left).
 *
 * Interaction: drag moves the listener (clamped to the scene bounds),
 * mouse wheel rotates the heading, arrow keys nudge and rotate as a
 * keyboard fallback.  Every change lands in the coalescer; app.ts flushes
 * it once per animation frame.
 */

import { clampToBounds, facingVector, SceneBounds } from "./bounds.js";
import { Pose } from "./protocol.js";

export interface MapCallbacks {
  onPose: (pose: Pose) => void;
}

export class MapView {
  pose: Pose;
  playheadS = 0;
  status = "idle";
  private dragging = false;

  constructor(private readonly canvas: HTMLCanvasElement,
              private readonly bounds: SceneBounds,
              private readonly sourcePath: Array<[number, number, number]>,
              initialPose: Pose,
              private readonly callbacks: MapCallbacks) {
    this.pose = clampToBounds(initialPose, bounds);
    canvas.addEventListener("pointerdown", (ev) => this.onPointerDown(ev));
    canvas.addEventListener("pointermove", (ev) => this.onPointerMove(ev));
    canvas.addEventListener("pointerup", () => (this.dragging = false));
    canvas.addEventListener("pointercancel", () => (this.dragging = false));
    canvas.addEventListener("wheel", (ev) => this.onWheel(ev), { passive: false });
    canvas.tabIndex = 0;
    canvas.addEventListener("keydown", (ev) => this.onKey(ev));
  }

  private scale(): number {
    const spanX = this.bounds.xMax - this.bounds.xMin;
    const spanY = this.bounds.yMax - this.bounds.yMin;
    return Math.min(this.canvas.width / spanX, this.canvas.height / spanY) * 0.9;
  }

  private toCanvas(x: number, y: number): [number, number] {
    const s = this.scale();
    const cx = this.canvas.width / 2 - s * (this.bounds.xMin + this.bounds.xMax) / 2;
    const cy = this.canvas.height / 2 + s * (this.bounds.yMin + this.bounds.yMax) / 2;
    return [cx + s * x, cy - s * y];
  }

  private toWorld(px: number, py: number): [number, number] {
    const s = this.scale();
    const cx = this.canvas.width / 2 - s * (this.bounds.xMin + this.bounds.xMax) / 2;
    const cy = this.canvas.height / 2 + s * (this.bounds.yMin + this.bounds.yMax) / 2;
    return [(px - cx) / s, (cy - py) / s];
  }

  private setPose(pose: Pose): void {
    this.pose = clampToBounds(pose, this.bounds);
    this.callbacks.onPose(this.pose);
  }

  private onPointerDown(ev: PointerEvent): void {
    this.dragging = true;
    this.canvas.setPointerCapture(ev.pointerId);
    this.onPointerMove(ev);
  }

  private onPointerMove(ev: PointerEvent): void {
    if (!this.dragging) return;
    const rect = this.canvas.getBoundingClientRect();
    const [x, y] = this.toWorld(ev.clientX - rect.left, ev.clientY - rect.top);
    this.setPose({ ...this.pose, x, y });
  }

  private onWheel(ev: WheelEvent): void {
    ev.preventDefault();
    const step = ev.deltaY > 0 ? -10 : 10;
    this.setPose({ ...this.pose, headingDeg: this.pose.headingDeg + step });
  }

  private onKey(ev: KeyboardEvent): void {
    const move = 0.15;
    const turn = 15;
    const handlers: Record<string, () => Pose> = {
      ArrowLeft: () => ({ ...this.pose, headingDeg: this.pose.headingDeg + turn }),
      ArrowRight: () => ({ ...this.pose, headingDeg: this.pose.headingDeg - turn }),
      ArrowUp: () => {
        const f = facingVector(this.pose.headingDeg);
        return { ...this.pose, x: this.pose.x + move * f.dx, y: this.pose.y + move * f.dy };
      },
      ArrowDown: () => {
        const f = facingVector(this.pose.headingDeg);
        return { ...this.pose, x: this.pose.x - move * f.dx, y: this.pose.y - move * f.dy };
      },
    };
    const handler = handlers[ev.key];
    if (handler) {
      ev.preventDefault();
      this.setPose(handler());
    }
  }

  private sourceAt(t: number): [number, number] {
    const path = this.sourcePath;
    if (!path.length) return [0, 0];
    if (t <= path[0][0]) return [path[0][1], path[0][2]];
    const last = path[path.length - 1];
    if (t >= last[0]) return [last[1], last[2]];
    for (let i = 1; i < path.length; i++) {
      if (t <= path[i][0]) {
        const [t0, x0, y0] = path[i - 1];
        const [t1, x1, y1] = path[i];
        const u = (t - t0) / (t1 - t0);
        return [x0 + u * (x1 - x0), y0 + u * (y1 - y0)];
      }
    }
    return [last[1], last[2]];
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#10141c";
    ctx.fillRect(0, 0, width, height);

    // bounds + meter grid
    ctx.strokeStyle = "#2a3244";
    ctx.lineWidth = 1;
    for (let gx = Math.ceil(this.bounds.xMin); gx <= this.bounds.xMax; gx++) {
      const [px0, py0] = this.toCanvas(gx, this.bounds.yMin);
      const [px1, py1] = this.toCanvas(gx, this.bounds.yMax);
      ctx.beginPath(); ctx.moveTo(px0, py0); ctx.lineTo(px1, py1); ctx.stroke();
    }
    for (let gy = Math.ceil(this.bounds.yMin); gy <= this.bounds.yMax; gy++) {
      const [px0, py0] = this.toCanvas(this.bounds.xMin, gy);
      const [px1, py1] = this.toCanvas(this.bounds.xMax, gy);
      ctx.beginPath(); ctx.moveTo(px0, py0); ctx.lineTo(px1, py1); ctx.stroke();
    }

    // source trajectory polyline
    if (this.sourcePath.length > 1) {
      ctx.strokeStyle = "#7a6a2e";
      ctx.lineWidth = 2;
      ctx.beginPath();
      this.sourcePath.forEach(([, x, y], i) => {
        const [px, py] = this.toCanvas(x, y);
        if (i === 0) ctx.moveTo(px, py); else ctx.lineTo(px, py);
      });
      ctx.stroke();
    }

    // microphone at the origin
    const [mx, my] = this.toCanvas(0, 0);
    ctx.fillStyle = "#c23b3b";
    ctx.beginPath(); ctx.arc(mx, my, 6, 0, 2 * Math.PI); ctx.fill();
    ctx.fillStyle = "#aab";
    ctx.font = "11px sans-serif";
    ctx.fillText("mic", mx + 8, my + 4);

    // source dot at the playhead
    const [sx, sy] = this.sourceAt(this.playheadS);
    const [spx, spy] = this.toCanvas(sx, sy);
    ctx.fillStyle = "#e0b93f";
    ctx.beginPath(); ctx.arc(spx, spy, 7, 0, 2 * Math.PI); ctx.fill();
    ctx.fillStyle = "#aab";
    ctx.fillText("source", spx + 9, spy + 4);

    // listener marker + heading arrow
    const [lx, ly] = this.toCanvas(this.pose.x, this.pose.y);
    const facing = facingVector(this.pose.headingDeg);
    ctx.fillStyle = "#3f9fe0";
    ctx.beginPath(); ctx.arc(lx, ly, 9, 0, 2 * Math.PI); ctx.fill();
    ctx.strokeStyle = "#bfe3ff";
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(lx, ly);
    ctx.lineTo(lx + 22 * facing.dx, ly - 22 * facing.dy);
    ctx.stroke();
    ctx.fillStyle = "#aab";
    ctx.fillText("listener", lx + 11, ly - 8);

    // status line
    ctx.fillStyle = "#8fa";
    ctx.fillText(this.status, 10, height - 10);
  }
}
