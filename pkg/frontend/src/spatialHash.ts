import type { ViewportPoint } from "./types";

/** Uniform-grid hash over the current payload so hover picking never waits
 * on the network. Cell size tracks the largest node radius in the payload. */
export class SpatialHash {
  private cells = new Map<string, ViewportPoint[]>();
  private readonly cellSize: number;

  constructor(
    points: ViewportPoint[],
    private readonly radiusOf: (p: ViewportPoint) => number,
  ) {
    let maxR = 4;
    for (const p of points) maxR = Math.max(maxR, radiusOf(p));
    this.cellSize = maxR * 2 + 1;
    for (const p of points) {
      const key = this.key(p.x, p.y);
      const bucket = this.cells.get(key);
      if (bucket) bucket.push(p);
      else this.cells.set(key, [p]);
    }
  }

  private key(x: number, y: number): string {
    return `${Math.floor(x / this.cellSize)}:${Math.floor(y / this.cellSize)}`;
  }

  /** Closest point whose radius covers (x, y), if any. */
  pick(x: number, y: number): ViewportPoint | null {
    const cx = Math.floor(x / this.cellSize);
    const cy = Math.floor(y / this.cellSize);
    let best: ViewportPoint | null = null;
    let bestD2 = Infinity;
    for (let dx = -1; dx <= 1; dx++) {
      for (let dy = -1; dy <= 1; dy++) {
        const bucket = this.cells.get(`${cx + dx}:${cy + dy}`);
        if (!bucket) continue;
        for (const p of bucket) {
          const r = this.radiusOf(p);
          const d2 = (p.x - x) ** 2 + (p.y - y) ** 2;
          if (d2 <= r * r && d2 < bestD2) {
            best = p;
            bestD2 = d2;
          }
        }
      }
    }
    return best;
  }
}
