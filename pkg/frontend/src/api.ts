import type {
  Justification,
  NodeProfile,
  RecommendationPayload,
  SearchResult,
  ViewportPayload,
} from "./types";
import type { Bounds } from "./camera";

export const VIEWPORT_LIMIT = 5000;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const resp = await fetch(url, { signal });
  if (!resp.ok) throw new ApiError(resp.status, await resp.text());
  return (await resp.json()) as T;
}

/** Thin client over the exploration API. Viewport requests are
 * latest-camera-wins: a new request aborts the one in flight. */
export class ApiClient {
  private viewportAbort: AbortController | null = null;

  constructor(private readonly base: string = "") {}

  async fetchViewport(bounds: Bounds, limit: number = VIEWPORT_LIMIT): Promise<ViewportPayload> {
    this.viewportAbort?.abort();
    const controller = new AbortController();
    this.viewportAbort = controller;
    const params = new URLSearchParams({
      x0: String(bounds.x0),
      y0: String(bounds.y0),
      x1: String(bounds.x1),
      y1: String(bounds.y1),
      limit: String(Math.min(limit, VIEWPORT_LIMIT)),
    });
    return getJson<ViewportPayload>(`${this.base}/api/viewport?${params}`, controller.signal);
  }

  async search(query: string, kind?: "talent" | "dataset", limit = 8): Promise<SearchResult[]> {
    if (!query.trim()) return [];
    const params = new URLSearchParams({ q: query, limit: String(limit) });
    if (kind) params.set("kind", kind);
    const body = await getJson<{ results: SearchResult[] }>(`${this.base}/api/search?${params}`);
    return body.results;
  }

  async node(id: string): Promise<NodeProfile> {
    return getJson<NodeProfile>(`${this.base}/api/nodes/${encodeURIComponent(id)}`);
  }

  async recommendations(id: string, limit = 30, offset = 0): Promise<RecommendationPayload> {
    return getJson<RecommendationPayload>(
      `${this.base}/api/nodes/${encodeURIComponent(id)}/recommendations?limit=${limit}&offset=${offset}`,
    );
  }

  async collaborators(id: string): Promise<string[]> {
    const body = await getJson<{ collaborators: string[] }>(
      `${this.base}/api/nodes/${encodeURIComponent(id)}/collaborators`,
    );
    return body.collaborators;
  }

  async justification(
    kind: "collaborator" | "dataset_user",
    source: string,
    target: string,
  ): Promise<Justification> {
    const resp = await fetch(`${this.base}/api/justifications`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ kind, source, target }),
    });
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    const body = (await resp.json()) as Omit<Justification, "cached">;
    return { ...body, cached: resp.headers.get("X-Cache") === "hit" };
  }
}
