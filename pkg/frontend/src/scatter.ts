/** Canvas scatter of the 2-D projection with lasso/rectangle gestures.
 *
 * Drawing goes through the MarkSurface interface so tests can count marks
 * without a real 2D context; gestures are captured in screen space and
 * converted to layout coordinates on submit (the server is the membership
 * authority — the view never decides which points are selected).
 */

import { CORE_COLOR, SELECTION_COLOR, colorForHop } from "./palette.js";
import type { Geometry, Point, ScatterPoint } from "./types.js";

export interface MarkSurface {
  clear(width: number, height: number): void;
  circle(x: number, y: number, radius: number, fill: string, stroke?: string): void;
  ring(x: number, y: number, radius: number, color: string): void;
  polyline(points: Point[], color: string, close?: boolean): void;
  rect(x0: number, y0: number, x1: number, y1: number, color: string): void;
  text(x: number, y: number, message: string, color: string): void;
}

export class Canvas2DSurface implements MarkSurface {
  constructor(private readonly ctx: CanvasRenderingContext2D) {}

  clear(width: number, height: number): void {
    this.ctx.clearRect(0, 0, width, height);
  }

  circle(x: number, y: number, radius: number, fill: string, stroke?: string): void {
    this.ctx.beginPath();
    this.ctx.arc(x, y, radius, 0, 2 * Math.PI);
    this.ctx.fillStyle = fill;
    this.ctx.fill();
    if (stroke) {
      this.ctx.strokeStyle = stroke;
      this.ctx.lineWidth = 1.5;
      this.ctx.stroke();
    }
  }

  ring(x: number, y: number, radius: number, color: string): void {
    this.ctx.beginPath();
    this.ctx.arc(x, y, radius, 0, 2 * Math.PI);
    this.ctx.strokeStyle = color;
    this.ctx.lineWidth = 2.5;
    this.ctx.stroke();
  }

  polyline(points: Point[], color: string, close = false): void {
    if (points.length < 2) {
      return;
    }
    this.ctx.beginPath();
    this.ctx.moveTo(points[0][0], points[0][1]);
    for (const [x, y] of points.slice(1)) {
      this.ctx.lineTo(x, y);
    }
    if (close) {
      this.ctx.closePath();
    }
    this.ctx.strokeStyle = color;
    this.ctx.lineWidth = 1.5;
    this.ctx.stroke();
  }

  rect(x0: number, y0: number, x1: number, y1: number, color: string): void {
    this.ctx.strokeStyle = color;
    this.ctx.lineWidth = 1.5;
    this.ctx.strokeRect(Math.min(x0, x1), Math.min(y0, y1),
      Math.abs(x1 - x0), Math.abs(y1 - y0));
  }

  text(x: number, y: number, message: string, color: string): void {
    this.ctx.fillStyle = color;
    this.ctx.font = "14px sans-serif";
    this.ctx.fillText(message, x, y);
  }
}

export class GestureError extends Error {}

export type GestureMode = "lasso" | "rectangle";

export interface RenderStats {
  marks: number;
  coreMarks: number;
  selectedMarks: number;
  emptyState: boolean;
}

interface Transform {
  scale: number;
  tx: number;
  ty: number;
}

const POINT_RADIUS = 3.5;
const CORE_RADIUS = 5.5;

export class ScatterView {
  private points: ScatterPoint[] = [];
  private selected = new Set<string>();
  private transform: Transform = { scale: 1, tx: 0, ty: 0 };
  private gestureMode: GestureMode | null = null;
  private gestureScreen: Point[] = [];

  constructor(
    private readonly surface: MarkSurface,
    readonly width: number,
    readonly height: number,
  ) {}

  setPoints(points: ScatterPoint[]): void {
    this.points = [...points];
    this.fitView();
  }

  setSelected(ids: Iterable<string>): void {
    this.selected = new Set(ids);
  }

  selectedIds(): Set<string> {
    return new Set(this.selected);
  }

  private fitView(): void {
    if (this.points.length === 0) {
      this.transform = { scale: 1, tx: 0, ty: 0 };
      return;
    }
    const xs = this.points.map((p) => p.x);
    const ys = this.points.map((p) => p.y);
    const spanX = Math.max(...xs) - Math.min(...xs) || 1;
    const spanY = Math.max(...ys) - Math.min(...ys) || 1;
    const margin = 0.92;
    const scale = margin * Math.min(this.width / spanX, this.height / spanY);
    const cx = (Math.max(...xs) + Math.min(...xs)) / 2;
    const cy = (Math.max(...ys) + Math.min(...ys)) / 2;
    this.transform = {
      scale,
      tx: this.width / 2 - cx * scale,
      ty: this.height / 2 - cy * scale,
    };
  }

  dataToScreen([x, y]: Point): Point {
    const { scale, tx, ty } = this.transform;
    return [x * scale + tx, y * scale + ty];
  }

  screenToData([sx, sy]: Point): Point {
    const { scale, tx, ty } = this.transform;
    return [(sx - tx) / scale, (sy - ty) / scale];
  }

  zoom(factor: number, center: Point): void {
    const [dx, dy] = this.screenToData(center);
    this.transform.scale *= factor;
    this.transform.tx = center[0] - dx * this.transform.scale;
    this.transform.ty = center[1] - dy * this.transform.scale;
  }

  pan(dxScreen: number, dyScreen: number): void {
    this.transform.tx += dxScreen;
    this.transform.ty += dyScreen;
  }

  // --- gestures ------------------------------------------------------------

  beginGesture(mode: GestureMode, screenPoint: Point): void {
    this.gestureMode = mode;
    this.gestureScreen = [screenPoint];
  }

  extendGesture(screenPoint: Point): void {
    if (!this.gestureMode) {
      return;
    }
    if (this.gestureMode === "rectangle") {
      this.gestureScreen = [this.gestureScreen[0], screenPoint];
    } else {
      this.gestureScreen.push(screenPoint);
    }
  }

  gestureInProgress(): boolean {
    return this.gestureMode !== null;
  }

  cancelGesture(): void {
    this.gestureMode = null;
    this.gestureScreen = [];
  }

  /** Finish the gesture and return its geometry in layout coordinates. */
  endGesture(): Geometry {
    const mode = this.gestureMode;
    const screen = this.gestureScreen;
    this.gestureMode = null;
    this.gestureScreen = [];
    if (!mode) {
      throw new GestureError("no gesture in progress");
    }
    if (mode === "rectangle") {
      if (screen.length < 2) {
        throw new GestureError("drag to give the rectangle two corners");
      }
      return {
        type: "rectangle",
        corners: [this.screenToData(screen[0]), this.screenToData(screen[1])],
      };
    }
    const distinct: Point[] = [];
    for (const pt of screen) {
      const last = distinct[distinct.length - 1];
      if (!last || last[0] !== pt[0] || last[1] !== pt[1]) {
        distinct.push(pt);
      }
    }
    if (distinct.length < 3) {
      throw new GestureError("a lasso needs at least 3 distinct vertices");
    }
    return { type: "lasso", vertices: distinct.map((pt) => this.screenToData(pt)) };
  }

  // --- rendering -------------------------------------------------------------

  render(): RenderStats {
    this.surface.clear(this.width, this.height);
    if (this.points.length === 0) {
      this.surface.text(this.width / 2 - 80, this.height / 2,
        "no papers yet — add a core", "#555555");
      return { marks: 0, coreMarks: 0, selectedMarks: 0, emptyState: true };
    }
    let coreMarks = 0;
    let selectedMarks = 0;
    for (const point of this.points) {
      const [sx, sy] = this.dataToScreen([point.x, point.y]);
      const fill = colorForHop(point.hop);
      if (point.is_core) {
        coreMarks += 1;
        this.surface.circle(sx, sy, CORE_RADIUS, fill, "#000000");
      } else {
        this.surface.circle(sx, sy, POINT_RADIUS, fill);
      }
      if (this.selected.has(point.id)) {
        selectedMarks += 1;
        this.surface.ring(sx, sy, (point.is_core ? CORE_RADIUS : POINT_RADIUS) + 2.5,
          SELECTION_COLOR);
      }
    }
    if (this.gestureMode === "lasso" && this.gestureScreen.length >= 2) {
      this.surface.polyline(this.gestureScreen, SELECTION_COLOR, true);
    } else if (this.gestureMode === "rectangle" && this.gestureScreen.length === 2) {
      const [[x0, y0], [x1, y1]] = this.gestureScreen;
      this.surface.rect(x0, y0, x1, y1, SELECTION_COLOR);
    }
    return {
      marks: this.points.length,
      coreMarks,
      selectedMarks,
      emptyState: false,
    };
  }

  static coreColor(): string {
    return CORE_COLOR;
  }
}
