"""End-to-end segmentation: seed -> rays -> graph -> cut -> contour -> mask.

The cut's source side is read off as one boundary index per ray. Because the
per-node cost is a region-homogeneity term, its value plateaus inside the
object; the boundary therefore uses the outermost minimum cut (complement of
the nodes that still reach the sink in the residual graph), which resolves
zero-cost plateaus toward the object border instead of collapsing inward.
"""

import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import cost as cost_mod
from . import graph as graph_mod
from . import mincut
from ._kernels import fill_polygon_mask, voxelize_mesh_parity
from .errors import (EmptySegmentation, InternalError, InvalidSeed, OpenSurface)
from .geometry import cast_rays


@dataclass
class SegmentConfig:
    rays: int = 360               # 2D ray count (3D uses the icosphere)
    nodes: int | None = None      # per-ray node count; 200 in 2D, 150 in 3D
    delta_r: int = 2
    scale_max: float = 2.0        # outer graph reach, multiples of template radius
    avg_window_d: float | None = None  # seed window side; 4 * min spacing
    ico_level: int = 3
    orientation: object = None
    cost_floor_sigmas: float = 3.0  # gate costs within the object's own spread

    def nodes_for(self, dim):
        return self.nodes if self.nodes is not None else (200 if dim == 2 else 150)

    def window_for(self, field):
        return self.avg_window_d if self.avg_window_d is not None \
            else 4.0 * min(field.spacing)


@dataclass
class SegmentationResult:
    boundary_index: np.ndarray    # (R,) int, -1 marks an empty ray
    boundary_points: np.ndarray   # (R, dim) world coords
    contour_vertices: np.ndarray  # closed polyline (2D) / mesh vertices (3D)
    contour_faces: np.ndarray | None
    mask: np.ndarray              # uint8, congruent with the input field
    stats: dict
    cut_value: float              # total boundary cost recovered from the flow
    max_flow: float
    seed_voxel: np.ndarray
    seed_world: np.ndarray
    avg_value: float
    window_std: float
    cost_floor: float = 0.0       # node costs at or below this were zeroed
    partial_empty: bool = False
    warnings: list = dc_field(default_factory=list)
    iteration_seeds: list = dc_field(default_factory=list)  # world coords per pass
    converged: bool = True
    runtime_s: float = 0.0

    @property
    def seed_quality(self):
        """'poor' when the seed window is very inhomogeneous (std > 25% of mean)."""
        ref = max(abs(self.avg_value), 1e-12)
        return "poor" if self.window_std > 0.25 * ref else "ok"


def _validate_seed(field, seed_voxel):
    seed_voxel = np.asarray(seed_voxel, dtype=float)
    if not field.contains_voxel(seed_voxel):
        pretty = ", ".join(f"{x:g}" for x in np.atleast_1d(seed_voxel))
        raise InvalidSeed(f"seed ({pretty}) is outside the field "
                          f"(extents {field.extents})")
    return seed_voxel


def extract_boundary(cut, g, side="max"):
    """Largest source-side index per ray; -1 for empty rays.

    Verifies the per-ray source sets are prefixes (they must be: the
    intra-column arcs are uncuttable).
    """
    membership = cut.source_side_max if side == "max" else cut.source_side
    m = np.asarray(membership[:g.R * g.P], dtype=bool).reshape(g.R, g.P)
    counts = m.sum(axis=1)
    prefix = np.arange(g.P)[None, :] < counts[:, None]
    if not np.array_equal(m, prefix):
        raise InternalError("source side is not a per-ray prefix")
    return counts.astype(np.int64) - 1


def check_smoothness(boundary, pairs, delta_r):
    """Assert |b_r - b_rn| <= delta_r over all neighbor pairs."""
    if len(pairs) == 0:
        return
    a = boundary[pairs[:, 0]]
    b = boundary[pairs[:, 1]]
    ok = (a >= 0) & (b >= 0)
    if np.any(np.abs(a[ok] - b[ok]) > delta_r):
        worst = int(np.abs(a[ok] - b[ok]).max())
        raise InternalError(f"boundary jump {worst} exceeds delta_r={delta_r}")


def reconstruct_contour(boundary_points, fan):
    """Ordered closed polyline (2D) or icosphere-topology mesh (3D)."""
    pts = np.asarray(boundary_points, dtype=np.float64)
    if pts.shape[1] == 2:
        return pts, None
    if fan.mesh_faces is None:
        raise OpenSurface("3D reconstruction needs the sampling mesh topology")
    return pts, fan.mesh_faces


def voxelize(vertices, faces, field):
    """Rasterize a closed contour/mesh onto the field grid (voxel-center rule)."""
    verts = np.ascontiguousarray(vertices, dtype=np.float64)
    if field.dim == 2:
        if len(verts) < 3:
            raise OpenSurface("polygon needs >= 3 points")
        ny, nx = field.values.shape
        return fill_polygon_mask(verts, ny, nx, field.spacing[0], field.spacing[1])
    if faces is None or len(faces) == 0:
        raise OpenSurface("mesh voxelization needs faces")
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    if not np.all(counts == 2):
        raise OpenSurface("mesh is not watertight")
    nz, ny, nx = field.values.shape
    return voxelize_mesh_parity(verts, np.ascontiguousarray(faces, dtype=np.int64),
                                nz, ny, nx, *field.spacing)


def shape_costs(costs, floor):
    """Zero out node costs at or below the floor.

    Deviations within the object's own intensity spread (estimated as the
    seed-window std) carry no boundary information; gating them to exactly
    zero restores the inside-the-object cost plateau on noisy data, which
    the outermost-min-cut rule then resolves at the true edge. A floor of 0
    (noise-free input) leaves the costs untouched.
    """
    if floor <= 0:
        return costs
    shaped = costs.copy()
    shaped[shaped <= floor] = 0.0
    return shaped


def mask_stats(mask, spacing):
    count = int(np.asarray(mask).sum())
    volume = count * float(np.prod(spacing))
    return {"voxel_count": count,
            "volume": volume,
            "volume_cm3": volume / 10 ** len(spacing)}


def segment(field, template, seed_voxel, config=None):
    """Run the full pipeline once. Seed is in voxel-index units."""
    t0 = time.perf_counter()
    config = config or SegmentConfig()
    seed_voxel = _validate_seed(field, seed_voxel)
    seed_world = field.voxel_to_world(seed_voxel)
    if template.dim != field.dim:
        raise InvalidSeed(f"{template.dim}D template on a {field.dim}D field")

    fan = cast_rays(template, seed_world, R=config.rays,
                    orientation=config.orientation, ico_level=config.ico_level)
    P = config.nodes_for(field.dim)
    d = config.window_for(field)
    params = cost_mod.make_cost_params(field, seed_world, d)

    warnings = []
    reach_vox = config.scale_max * float(fan.template_dist.max()) / max(field.spacing)
    if reach_vox < 4.0:
        warnings.append(
            f"graph reach is only {reach_vox:.1f} voxels; the template radius "
            "is one world unit, so set the field spacing accordingly or raise "
            "scale_max")
    if fan.multi_hit_rays:
        warnings.append(f"{fan.multi_hit_rays} rays crossed the template "
                        "boundary more than once (template is not star-shaped "
                        "about its centroid)")

    pos = graph_mod.sample_nodes(fan, P, config.scale_max)
    costs = cost_mod.node_cost(field, params, pos.reshape(-1, field.dim)).reshape(fan.R, P)
    floor = config.cost_floor_sigmas * params.window_std
    costs = shape_costs(costs, floor)
    g = graph_mod.build_ray_graph(fan, P, config.scale_max, config.delta_r, costs)
    cut = mincut.max_flow(mincut.from_ray_graph(g))

    boundary = extract_boundary(cut, g, side="max")
    if np.all(boundary < 0):
        raise EmptySegmentation("no ray kept any node on the source side")
    partial = bool(np.any(boundary < 0))
    check_smoothness(boundary, g.pairs, g.delta_r)

    # empty rays (defensive; the innermost level is uncuttable) fall back to p=0
    pick = np.maximum(boundary, 0)
    boundary_points = g.node_pos[np.arange(g.R), pick]
    verts, faces = reconstruct_contour(boundary_points, fan)
    mask = voxelize(verts, faces, field)

    # boundary cost recovered from flow arithmetic; tests compare it against
    # the independent per-ray cost sum (telescoping identity)
    shifted = g.weights.copy()
    shifted[:, 0] -= g.base_penalty
    neg_sum = float(-shifted[shifted < 0].sum())
    cut_value = cut.max_flow - neg_sum + g.R * g.base_penalty

    return SegmentationResult(
        boundary_index=boundary, boundary_points=boundary_points,
        contour_vertices=verts, contour_faces=faces, mask=mask,
        stats=mask_stats(mask, field.spacing), cut_value=float(cut_value),
        max_flow=float(cut.max_flow), seed_voxel=seed_voxel,
        seed_world=seed_world, avg_value=params.avg_value,
        window_std=params.window_std, cost_floor=float(floor),
        partial_empty=partial, warnings=warnings,
        iteration_seeds=[seed_world.tolist()],
        runtime_s=time.perf_counter() - t0)


def mask_centroid_world(mask, spacing):
    """Intensity-free center of gravity of the set voxels, world units."""
    idx = np.nonzero(np.asarray(mask) > 0)
    if len(idx[0]) == 0:
        raise EmptySegmentation("mask is empty")
    # numpy index order is (y, x) / (z, y, x); world order is (x, y[, z])
    means = [float(a.mean()) for a in reversed(idx)]
    return np.array(means) * np.array(spacing)


def iterate_seed(field, template, seed_voxel, config=None, max_iters=5, eps=None):
    """Re-run segmentation from the previous mask centroid until it settles.

    eps is the world-space convergence radius; defaults to one min-spacing.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    config = config or SegmentConfig()
    if eps is None:
        eps = min(field.spacing)
    t0 = time.perf_counter()
    seeds = []
    seed = np.asarray(seed_voxel, dtype=float)
    result = None
    converged = False
    for _ in range(max_iters):
        result = segment(field, template, seed, config)
        seeds.append(result.seed_world.tolist())
        centroid = mask_centroid_world(result.mask, field.spacing)
        if np.linalg.norm(centroid - result.seed_world) < eps:
            converged = True
            break
        seed = field.world_to_voxel(centroid)
    result.iteration_seeds = seeds
    result.converged = converged
    result.runtime_s = time.perf_counter() - t0
    return result


def write_contour(path, points):
    """One `x y [z]` line per boundary point, in ray order."""
    pts = np.asarray(points)
    with open(path, "w", encoding="utf-8") as fh:
        for p in pts:
            fh.write(" ".join(f"{x:.9g}" for x in p) + "\n")


def read_contour(path):
    with open(path, "r", encoding="utf-8") as fh:
        rows = [[float(x) for x in line.split()] for line in fh if line.strip()]
    return np.array(rows)
