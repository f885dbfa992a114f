import type { Camera } from "./camera";
import type { SelectionState } from "./state";
import type { ViewportPoint } from "./types";

/** Drawing seam: the canvas implementation draws for real, tests record. */
export interface DrawTarget {
  clear(width: number, height: number): void;
  circle(x: number, y: number, radius: number, style: NodeStyle): void;
  square(x: number, y: number, halfSide: number, style: NodeStyle): void;
  ring(x: number, y: number, radius: number): void;
  label(x: number, y: number, text: string): void;
}

export type NodeStyle = "base" | "dimmed" | "starry" | "focused";

// node sizes track display_size scaled by the camera zoom, kept legible
const MIN_RADIUS_PX = 1.0;
const MAX_RADIUS_PX = 48;
const CULL_MARGIN = 1; // node radii beyond the edge still drawn

export function nodeRadius(displaySize: number, zoom: number): number {
  return Math.min(MAX_RADIUS_PX, Math.max(MIN_RADIUS_PX, displaySize * Math.sqrt(zoom)));
}

export interface FrameStats {
  drawn: number;
  culled: number;
}

/** One frame: dim everything when a highlight is active, then overdraw the
 * highlight set bright (the starry pass), then the focused ring on top. */
export function renderFrame(
  points: ViewportPoint[],
  camera: Camera,
  selection: SelectionState,
  target: DrawTarget,
  hoveredId: string | null = null,
): FrameStats {
  target.clear(camera.viewportWidth, camera.viewportHeight);
  const highlightActive = selection.highlightSet.size > 0;
  let drawn = 0;
  let culled = 0;
  const starry: { p: ViewportPoint; sx: number; sy: number; r: number }[] = [];
  let focused: { p: ViewportPoint; sx: number; sy: number; r: number } | null = null;

  for (const p of points) {
    const { x: sx, y: sy } = camera.worldToScreen(p.x, p.y);
    const r = nodeRadius(p.size, camera.zoom);
    const margin = r * CULL_MARGIN + r;
    if (
      sx < -margin ||
      sy < -margin ||
      sx > camera.viewportWidth + margin ||
      sy > camera.viewportHeight + margin
    ) {
      culled += 1;
      continue;
    }
    const isStarry = highlightActive && selection.isHighlighted(p.id);
    const style: NodeStyle = highlightActive && !isStarry ? "dimmed" : "base";
    if (p.kind === "dataset") {
      target.square(sx, sy, r, style);
    } else {
      target.circle(sx, sy, r, style);
    }
    drawn += 1;
    if (isStarry) starry.push({ p, sx, sy, r });
    if (selection.focusedNode === p.id) focused = { p, sx, sy, r };
  }

  for (const s of starry) {
    if (s.p.kind === "dataset") {
      target.square(s.sx, s.sy, s.r, "starry");
    } else {
      target.circle(s.sx, s.sy, s.r, "starry");
    }
  }
  if (focused) {
    target.ring(focused.sx, focused.sy, focused.r + 3);
  }
  if (hoveredId) {
    const hovered = points.find((p) => p.id === hoveredId);
    if (hovered) {
      const { x: sx, y: sy } = camera.worldToScreen(hovered.x, hovered.y);
      target.label(sx, sy - nodeRadius(hovered.size, camera.zoom) - 4, hovered.name);
    }
  }
  return { drawn, culled };
}

const FILL: Record<NodeStyle, string> = {
  base: "rgba(116, 169, 207, 0.85)",
  dimmed: "rgba(116, 169, 207, 0.18)",
  starry: "rgba(255, 224, 130, 1.0)",
  focused: "rgba(255, 255, 255, 1.0)",
};
const DATASET_FILL: Record<NodeStyle, string> = {
  base: "rgba(239, 138, 98, 0.9)",
  dimmed: "rgba(239, 138, 98, 0.2)",
  starry: "rgba(255, 224, 130, 1.0)",
  focused: "rgba(255, 255, 255, 1.0)",
};

export class CanvasTarget implements DrawTarget {
  constructor(private readonly ctx: CanvasRenderingContext2D) {}

  clear(width: number, height: number): void {
    this.ctx.fillStyle = "#10141a";
    this.ctx.fillRect(0, 0, width, height);
  }

  circle(x: number, y: number, radius: number, style: NodeStyle): void {
    this.ctx.fillStyle = FILL[style];
    this.ctx.beginPath();
    this.ctx.arc(x, y, radius, 0, Math.PI * 2);
    this.ctx.fill();
    if (style === "starry") {
      // soft halo makes the highlight read as stars over the dimmed field
      this.ctx.strokeStyle = "rgba(255, 236, 179, 0.5)";
      this.ctx.lineWidth = 2;
      this.ctx.beginPath();
      this.ctx.arc(x, y, radius + 2, 0, Math.PI * 2);
      this.ctx.stroke();
    }
  }

  square(x: number, y: number, halfSide: number, style: NodeStyle): void {
    this.ctx.fillStyle = DATASET_FILL[style];
    this.ctx.fillRect(x - halfSide, y - halfSide, halfSide * 2, halfSide * 2);
    if (style === "starry") {
      this.ctx.strokeStyle = "rgba(255, 236, 179, 0.5)";
      this.ctx.lineWidth = 2;
      this.ctx.strokeRect(x - halfSide - 2, y - halfSide - 2, halfSide * 2 + 4, halfSide * 2 + 4);
    }
  }

  ring(x: number, y: number, radius: number): void {
    this.ctx.strokeStyle = "#ffffff";
    this.ctx.lineWidth = 2;
    this.ctx.beginPath();
    this.ctx.arc(x, y, radius, 0, Math.PI * 2);
    this.ctx.stroke();
  }

  label(x: number, y: number, text: string): void {
    this.ctx.font = "12px system-ui, sans-serif";
    this.ctx.textAlign = "center";
    this.ctx.fillStyle = "rgba(255,255,255,0.92)";
    this.ctx.strokeStyle = "rgba(16,20,26,0.9)";
    this.ctx.lineWidth = 3;
    this.ctx.strokeText(text, x, y);
    this.ctx.fillText(text, x, y);
  }
}
