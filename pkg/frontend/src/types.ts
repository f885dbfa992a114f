export interface ViewportPoint {
  id: string;
  name: string;
  kind: "talent" | "dataset";
  x: number;
  y: number;
  size: number;
}

export interface ViewportPayload {
  points: ViewportPoint[];
}

export interface SearchResult {
  id: string;
  name: string;
  kind: "talent" | "dataset";
}

export interface NodeProfile {
  id: string;
  kind: "talent" | "dataset";
  name: string;
  institution?: string;
  publication_count?: number;
  career_start_year?: number | null;
  detail_url?: string | null;
  description?: string;
  x: number | null;
  y: number | null;
  display_size: number | null;
}

export interface RecommendationEntry {
  target: string;
  name: string;
  score: number;
  rank: number;
}

export interface RecommendationPayload {
  source: string;
  kind: "collaborator" | "dataset_user";
  total: number;
  entries: RecommendationEntry[];
}

export interface Justification {
  kind: string;
  source: string;
  target: string;
  text: string;
  model: string;
  created_at: number;
  cached: boolean;
}
