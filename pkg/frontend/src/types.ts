export interface SessionInfo {
  session: string;
  dims: number[];
  spacing: number[];
}

export interface SliceBoundary {
  axis: string;
  index: number;
  polylines: number[][][];
}

export interface MaskStats {
  voxel_count: number;
  volume: number;
  volume_cm3: number;
}

export interface SegmentResponse {
  cut_value: number;
  max_flow: number;
  stats: MaskStats;
  boundary: SliceBoundary[];
  boundary_index_min: number;
  boundary_index_max: number;
  seed_quality: string;
  iterations: number;
  converged: boolean;
  warnings: string[];
  runtime_ms: number;
}

export interface SegmentParams {
  seed: number[];
  template?: string | { tpl_text: string };
  rays?: number;
  nodes?: number | null;
  delta?: number;
  scale?: number;
  avg_window?: number | null;
  ico_level?: number;
  iterate?: { max_iters: number; eps?: number };
  slices?: number[];
}

export interface ApiError {
  error: string;
  detail: string;
}
