/** Screen <-> voxel mapping for the slice canvas: screen = pan + voxel * zoom. */
export interface ViewTransform {
  zoom: number;
  panX: number;
  panY: number;
}

export const identityTransform: ViewTransform = { zoom: 1, panX: 0, panY: 0 };

/**
 * Map a canvas click to the integer voxel that was hit, or null when the
 * click lands outside the image area. The integer coords go to the API
 * verbatim; the marker is drawn back at the same voxel.
 */
export function clickToSeed(
  px: number,
  py: number,
  t: ViewTransform,
  width: number,
  height: number,
): [number, number] | null {
  const vx = Math.floor((px - t.panX) / t.zoom);
  const vy = Math.floor((py - t.panY) / t.zoom);
  if (vx < 0 || vy < 0 || vx >= width || vy >= height) return null;
  return [vx, vy];
}

export function voxelToScreen(vx: number, vy: number, t: ViewTransform): [number, number] {
  return [t.panX + vx * t.zoom, t.panY + vy * t.zoom];
}
