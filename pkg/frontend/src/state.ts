import type { SegmentResponse, SliceBoundary } from './types';

/** Everything the viewer shows; every metric it displays is copied verbatim
 * out of the last segment response. */
export interface ViewerState {
  session: string | null;
  dims: number[];
  spacing: number[];
  axis: string;
  sliceIndex: number;
  windowLo: number;
  windowHi: number;
  seed: number[] | null;
  template: string;
  rays: number;
  nodes: number | null;
  delta: number;
  scale: number;
  avgWindow: number | null;
  iterate: boolean;
  maxIters: number;
  overlays: SliceBoundary[];
  lastResult: SegmentResponse | null;
}

export function initialState(): ViewerState {
  return {
    session: null,
    dims: [],
    spacing: [],
    axis: 'z',
    sliceIndex: 0,
    windowLo: 0,
    windowHi: 255,
    seed: null,
    template: 'circle',
    rays: 360,
    nodes: null,
    delta: 2,
    scale: 2.0,
    avgWindow: null,
    iterate: false,
    maxIters: 5,
    overlays: [],
    lastResult: null,
  };
}

export function setWindow(state: ViewerState, lo: number, hi: number): ViewerState {
  // window/level changes only touch the display mapping; seed, overlays and
  // slice position stay exactly as they were
  return { ...state, windowLo: lo, windowHi: hi };
}

export function setSlice(state: ViewerState, index: number): ViewerState {
  const nz = state.dims.length === 3 ? state.dims[2] : 1;
  const clamped = Math.max(0, Math.min(nz - 1, index));
  return { ...state, sliceIndex: clamped };
}

export function setSeed(state: ViewerState, seed: number[] | null): ViewerState {
  return { ...state, seed };
}

export function applyResult(state: ViewerState, result: SegmentResponse): ViewerState {
  return { ...state, lastResult: result, overlays: result.boundary };
}

/** Overlay polylines for the slice currently on screen. */
export function overlayForSlice(state: ViewerState): number[][][] {
  const hit = state.overlays.find(
    (b) => b.axis === state.axis && b.index === state.sliceIndex,
  );
  return hit ? hit.polylines : [];
}

export interface DisplayedMetrics {
  cutValue: number;
  runtimeMs: number;
  voxelCount: number;
  volume: number;
  seedQuality: string;
  iterations: number;
  warnings: string[];
}

/** The numbers the HUD shows, taken from the API payload and nothing else. */
export function displayedMetrics(state: ViewerState): DisplayedMetrics | null {
  const r = state.lastResult;
  if (!r) return null;
  return {
    cutValue: r.cut_value,
    runtimeMs: r.runtime_ms,
    voxelCount: r.stats.voxel_count,
    volume: r.stats.volume,
    seedQuality: r.seed_quality,
    iterations: r.iterations,
    warnings: r.warnings ?? [],
  };
}
