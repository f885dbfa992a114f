export const MIN_ZOOM = 0.01;
export const MAX_ZOOM = 100;

export interface Point {
  x: number;
  y: number;
}

export interface Bounds {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

/** Pan/zoom state over layout coordinates; screen y grows downward. */
export class Camera {
  centerX = 0;
  centerY = 0;
  private zoomLevel = 1;

  constructor(
    public viewportWidth: number,
    public viewportHeight: number,
  ) {}

  get zoom(): number {
    return this.zoomLevel;
  }

  set zoom(value: number) {
    this.zoomLevel = Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, value));
  }

  worldToScreen(wx: number, wy: number): Point {
    return {
      x: (wx - this.centerX) * this.zoomLevel + this.viewportWidth / 2,
      y: (wy - this.centerY) * this.zoomLevel + this.viewportHeight / 2,
    };
  }

  screenToWorld(sx: number, sy: number): Point {
    return {
      x: (sx - this.viewportWidth / 2) / this.zoomLevel + this.centerX,
      y: (sy - this.viewportHeight / 2) / this.zoomLevel + this.centerY,
    };
  }

  /** World-space rectangle currently visible. */
  visibleBounds(): Bounds {
    const halfW = this.viewportWidth / 2 / this.zoomLevel;
    const halfH = this.viewportHeight / 2 / this.zoomLevel;
    return {
      x0: this.centerX - halfW,
      y0: this.centerY - halfH,
      x1: this.centerX + halfW,
      y1: this.centerY + halfH,
    };
  }

  panByScreen(dx: number, dy: number): void {
    this.centerX -= dx / this.zoomLevel;
    this.centerY -= dy / this.zoomLevel;
  }

  /** Zoom keeping the world point under the cursor fixed on screen. */
  zoomAt(sx: number, sy: number, factor: number): void {
    const anchor = this.screenToWorld(sx, sy);
    this.zoom = this.zoomLevel * factor;
    const moved = this.worldToScreen(anchor.x, anchor.y);
    this.panByScreen(sx - moved.x, sy - moved.y);
  }

  moveTo(wx: number, wy: number, zoom?: number): void {
    this.centerX = wx;
    this.centerY = wy;
    if (zoom !== undefined) this.zoom = zoom;
  }

  isAt(wx: number, wy: number, zoom: number, tol = 1e-9): boolean {
    return (
      Math.abs(this.centerX - wx) <= tol &&
      Math.abs(this.centerY - wy) <= tol &&
      Math.abs(this.zoomLevel - zoom) <= tol
    );
  }
}

/** Eased fly-to animation; `tick(1)` lands exactly on the target. */
export class CameraAnimation {
  private readonly fromX: number;
  private readonly fromY: number;
  private readonly fromZoom: number;
  done = false;

  constructor(
    private readonly camera: Camera,
    private readonly toX: number,
    private readonly toY: number,
    private readonly toZoom: number,
  ) {
    this.fromX = camera.centerX;
    this.fromY = camera.centerY;
    this.fromZoom = camera.zoom;
    if (camera.isAt(toX, toY, toZoom)) this.done = true;
  }

  /** t in [0, 1]. */
  tick(t: number): void {
    if (this.done) return;
    const eased = t < 0.5 ? 2 * t * t : 1 - (-2 * t + 2) ** 2 / 2;
    this.camera.moveTo(
      this.fromX + (this.toX - this.fromX) * eased,
      this.fromY + (this.toY - this.fromY) * eased,
      // zoom interpolates geometrically so the motion feels uniform
      this.fromZoom * (this.toZoom / this.fromZoom) ** eased,
    );
    if (t >= 1) {
      this.camera.moveTo(this.toX, this.toY, this.toZoom);
      this.done = true;
    }
  }
}
