import { ApiClient } from "./api";
import { Camera, CameraAnimation } from "./camera";
import { renderFrame, nodeRadius, type DrawTarget, type FrameStats } from "./renderer";
import { SpatialHash } from "./spatialHash";
import { SelectionState } from "./state";
import type {
  Justification,
  NodeProfile,
  RecommendationPayload,
  SearchResult,
  ViewportPoint,
} from "./types";

export const SETTLE_DEBOUNCE_MS = 100;

export interface InfoWindow {
  profile: NodeProfile;
  recommendations: RecommendationPayload | null;
}

/** Headless explorer controller: owns the camera, selection state, and the
 * current payload; the DOM layer only forwards events and reads state. */
export class Explorer {
  readonly camera: Camera;
  readonly selection = new SelectionState();
  points: ViewportPoint[] = [];
  infoWindow: InfoWindow | null = null;
  justification: Justification | null = null;
  justificationPending = false;
  hoveredId: string | null = null;
  notice: string | null = null;
  lastFrame: FrameStats = { drawn: 0, culled: 0 };
  /** dev overlay surface: whether the last justification was a cache hit */
  lastCacheState: "hit" | "miss" | null = null;

  private hash: SpatialHash | null = null;
  private settleTimer: ReturnType<typeof setTimeout> | null = null;
  private animation: CameraAnimation | null = null;
  private generation = 0;

  constructor(
    readonly api: ApiClient,
    width: number,
    height: number,
    private readonly onChange: () => void = () => {},
  ) {
    this.camera = new Camera(width, height);
  }

  // --- viewport data ---------------------------------------------------

  /** Schedule a payload refresh once the camera has settled. */
  cameraMoved(): void {
    if (this.settleTimer !== null) clearTimeout(this.settleTimer);
    this.settleTimer = setTimeout(() => void this.refreshViewport(), SETTLE_DEBOUNCE_MS);
  }

  async refreshViewport(): Promise<void> {
    const generation = ++this.generation;
    try {
      const payload = await this.api.fetchViewport(this.camera.visibleBounds());
      if (generation !== this.generation) return; // superseded
      this.points = payload.points;
      this.rebuildHash();
      this.onChange();
    } catch (err) {
      if ((err as Error).name === "AbortError") return;
      this.notice = "viewport fetch failed; showing the last good frame";
      this.onChange();
    }
  }

  private rebuildHash(): void {
    const zoom = this.camera.zoom;
    this.hash = new SpatialHash(this.points, (p) => nodeRadius(p.size, zoom) / zoom);
  }

  render(target: DrawTarget): FrameStats {
    this.lastFrame = renderFrame(this.points, this.camera, this.selection, target, this.hoveredId);
    return this.lastFrame;
  }

  // --- interaction ------------------------------------------------------

  hover(sx: number, sy: number): void {
    if (!this.hash) return;
    const world = this.camera.screenToWorld(sx, sy);
    const hit = this.hash.pick(world.x, world.y);
    const id = hit ? hit.id : null;
    if (id !== this.hoveredId) {
      this.hoveredId = id;
      this.onChange();
    }
  }

  pan(dxScreen: number, dyScreen: number): void {
    this.camera.panByScreen(dxScreen, dyScreen);
    this.cameraMoved();
    this.onChange();
  }

  zoomAt(sx: number, sy: number, factor: number): void {
    this.camera.zoomAt(sx, sy, factor);
    this.cameraMoved();
    this.onChange();
  }

  clickAt(sx: number, sy: number): void {
    if (!this.hash) return;
    const world = this.camera.screenToWorld(sx, sy);
    const hit = this.hash.pick(world.x, world.y);
    if (hit) void this.focusNode(hit.id);
  }

  /** Advance the fly-to animation; returns true while animating. */
  tickAnimation(t: number): boolean {
    if (!this.animation || this.animation.done) return false;
    this.animation.tick(t);
    this.onChange();
    if (this.animation.done) {
      this.animation = null;
      this.cameraMoved();
      return false;
    }
    return true;
  }

  // --- search / focus / panels -------------------------------------------

  async search(query: string, kind?: "talent" | "dataset"): Promise<SearchResult[]> {
    return this.api.search(query, kind);
  }

  async focusNode(id: string): Promise<void> {
    const profile = await this.api.node(id);
    this.selection.focusNode(id);
    this.justification = null;
    this.infoWindow = { profile, recommendations: null };
    if (profile.x !== null && profile.y !== null) {
      const targetZoom = Math.max(this.camera.zoom, 2);
      if (!this.camera.isAt(profile.x, profile.y, targetZoom)) {
        this.animation = new CameraAnimation(this.camera, profile.x, profile.y, targetZoom);
      }
    }
    this.onChange();
    const recommendations = await this.api.recommendations(id);
    if (this.selection.focusedNode === id) {
      this.infoWindow = { profile, recommendations };
      this.onChange();
    }
  }

  async whyRecommend(targetId: string): Promise<void> {
    const source = this.selection.focusedNode;
    if (!source || !this.infoWindow) return;
    if (!this.selection.openJustification(targetId)) return;
    const kind = this.infoWindow.profile.kind === "dataset" ? "dataset_user" : "collaborator";
    this.justificationPending = true;
    this.onChange();
    try {
      const j = await this.api.justification(kind, source, targetId);
      if (this.selection.chosenTarget === targetId) {
        this.justification = j;
        this.lastCacheState = j.cached ? "hit" : "miss";
      }
    } catch (err) {
      this.notice = `justification unavailable: ${(err as Error).message}`;
      this.selection.closeJustification();
    } finally {
      this.justificationPending = false;
      this.onChange();
    }
  }

  closeJustification(): void {
    this.selection.closeJustification();
    this.justification = null;
    this.onChange();
  }

  clearFocus(): void {
    this.selection.clearFocus();
    this.infoWindow = null;
    this.justification = null;
    this.onChange();
  }

  // --- collaborator highlight ---------------------------------------------

  async highlightCollaborators(query: string): Promise<void> {
    const matches = await this.api.search(query, "talent", 1);
    if (!matches.length) {
      this.selection.clearHighlight();
      this.notice = `no talent matches "${query}"`;
      this.onChange();
      return;
    }
    const ids = await this.api.collaborators(matches[0].id);
    this.selection.setHighlight(ids);
    this.notice = ids.length ? null : `${matches[0].name} has no collaborators on the map`;
    this.onChange();
  }

  clearHighlight(): void {
    this.selection.clearHighlight();
    this.onChange();
  }
}
