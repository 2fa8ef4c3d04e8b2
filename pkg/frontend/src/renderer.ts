/**
 * Top-down canvas view: corridor, centerline, coins, vehicle, HUD, toasts,
 * turn-direction arrow, and the connection/"no signal" overlays.
 */

import { CourseData } from "./course.js";
import { StateMsg } from "./protocol.js";
import { Toast } from "./statebuf.js";
import { LinkStatus } from "./net.js";

export interface Viewport {
  scale: number;  // pixels per meter
  ox: number;     // canvas x of world origin
  oy: number;     // canvas y of world origin (y axis flipped)
}

export function fitViewport(course: CourseData, width: number, height: number,
                            marginPx = 30): Viewport {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const [x, y] of course.points) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  minX -= course.halfWidth; maxX += course.halfWidth;
  minY -= course.halfWidth; maxY += course.halfWidth;
  const spanX = Math.max(maxX - minX, 1e-6);
  const spanY = Math.max(maxY - minY, 1e-6);
  const scale = Math.min((width - 2 * marginPx) / spanX,
                         (height - 2 * marginPx) / spanY);
  return {
    scale,
    ox: marginPx - minX * scale + (width - 2 * marginPx - spanX * scale) / 2,
    oy: height - marginPx + minY * scale - (height - 2 * marginPx - spanY * scale) / 2,
  };
}

export function worldToCanvas(v: Viewport, x: number, y: number): [number, number] {
  return [v.ox + x * v.scale, v.oy - y * v.scale];
}

/** Steering sign -> arrow direction; null inside the neutral band. */
export function arrowFor(steering: number, band = 0.15): "left" | "right" | null {
  if (steering > band) return "left";   // positive = counter-clockwise
  if (steering < -band) return "right";
  return null;
}

export interface FrameModel {
  state: StateMsg | null;
  stale: boolean;
  status: LinkStatus;
  toasts: Toast[];
  collectedCoins: Set<number>;
}

export class TopDownRenderer {
  private vp: Viewport;

  constructor(private canvas: HTMLCanvasElement, private course: CourseData) {
    this.vp = fitViewport(course, canvas.width, canvas.height);
  }

  setCourse(course: CourseData): void {
    this.course = course;
    this.vp = fitViewport(course, this.canvas.width, this.canvas.height);
  }

  draw(model: FrameModel): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, width, height);

    this.drawCourse(ctx, model.collectedCoins);
    if (model.state) this.drawVehicle(ctx, model.state);
    this.drawHud(ctx, model);
    this.drawToasts(ctx, model.toasts);
    this.drawOverlays(ctx, model);
  }

  private path(ctx: CanvasRenderingContext2D): void {
    const pts = this.course.points;
    ctx.beginPath();
    const [x0, y0] = worldToCanvas(this.vp, pts[0][0], pts[0][1]);
    ctx.moveTo(x0, y0);
    for (let i = 1; i < pts.length; i++) {
      const [x, y] = worldToCanvas(this.vp, pts[i][0], pts[i][1]);
      ctx.lineTo(x, y);
    }
  }

  private drawCourse(ctx: CanvasRenderingContext2D, collected: Set<number>): void {
    ctx.lineJoin = "round";
    ctx.lineCap = "round";
    this.path(ctx);
    ctx.strokeStyle = "#1e2c3a";
    ctx.lineWidth = 2 * this.course.halfWidth * this.vp.scale;
    ctx.stroke();
    this.path(ctx);
    ctx.strokeStyle = "#3d5366";
    ctx.lineWidth = 1.5;
    ctx.setLineDash([6, 6]);
    ctx.stroke();
    ctx.setLineDash([]);

    this.course.coins.forEach((coin, i) => {
      const [x, y] = worldToCanvas(this.vp, coin.x, coin.y);
      ctx.beginPath();
      ctx.arc(x, y, Math.max(3, this.course.pickupRadius * this.vp.scale), 0, 2 * Math.PI);
      ctx.fillStyle = collected.has(i) ? "#3a3f47" : "#e8c547";
      ctx.fill();
    });
  }

  private drawVehicle(ctx: CanvasRenderingContext2D, s: StateMsg): void {
    const [x, y] = worldToCanvas(this.vp, s.x, s.y);
    const h = -s.heading; // canvas y is flipped
    ctx.save();
    ctx.translate(x, y);
    ctx.rotate(h);
    ctx.beginPath();
    ctx.moveTo(10, 0);
    ctx.lineTo(-7, 6);
    ctx.lineTo(-4, 0);
    ctx.lineTo(-7, -6);
    ctx.closePath();
    ctx.fillStyle = "#62d0a6";
    ctx.fill();
    ctx.restore();
  }

  private drawHud(ctx: CanvasRenderingContext2D, model: FrameModel): void {
    ctx.fillStyle = "#cfd8e3";
    ctx.font = "13px monospace";
    const s = model.state;
    if (s) {
      ctx.fillText(`speed ${s.speed.toFixed(2)} m/s`, 12, 20);
      ctx.fillText(`coins ${s.coins_collected}/${s.coins_total}`, 12, 38);
      ctx.fillText(`tick ${s.tick}`, 12, 56);
      // steering bar
      const cx = this.canvas.width / 2;
      ctx.fillStyle = "#2b3440";
      ctx.fillRect(cx - 60, 12, 120, 8);
      ctx.fillStyle = "#62a6d0";
      ctx.fillRect(cx, 12, -s.steering_cmd * 60, 8);
      const arrow = arrowFor(s.steering_cmd);
      if (arrow) {
        ctx.fillStyle = "#e8c547";
        ctx.font = "22px monospace";
        ctx.fillText(arrow === "left" ? "←" : "→",
                     arrow === "left" ? cx - 90 : cx + 72, 22);
      }
    }
  }

  private drawToasts(ctx: CanvasRenderingContext2D, toasts: Toast[]): void {
    ctx.font = "13px sans-serif";
    toasts.forEach((toast, i) => {
      const y = this.canvas.height - 16 - i * 22;
      ctx.fillStyle = "rgba(30, 40, 52, 0.9)";
      const w = ctx.measureText(toast.text).width + 16;
      ctx.fillRect(12, y - 14, w, 20);
      ctx.fillStyle = "#e4ecf5";
      ctx.fillText(toast.text, 20, y);
    });
  }

  private drawOverlays(ctx: CanvasRenderingContext2D, model: FrameModel): void {
    let banner: string | null = null;
    if (model.status !== "connected") {
      banner = model.status === "connecting" ? "connecting..."
        : "disconnected - retrying";
    } else if (model.stale) {
      banner = "no signal";
    }
    if (banner) {
      ctx.fillStyle = "rgba(16, 20, 26, 0.75)";
      ctx.fillRect(0, this.canvas.height / 2 - 24, this.canvas.width, 48);
      ctx.fillStyle = "#f0b455";
      ctx.font = "20px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(banner, this.canvas.width / 2, this.canvas.height / 2 + 6);
      ctx.textAlign = "left";
    }
  }
}
