"""Node cost model: interpolated intensities vs. the seed-window average.

The object's mean gray value is estimated by averaging over a small square
(2D) or cube (3D) of side d centered on the seed; the cost of a graph node
is the absolute difference between that average and the intensity at the
node's position.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import bilinear_batch, trilinear_batch
from .errors import AverageNotSet, WindowDegenerate


@dataclass
class CostParams:
    avg_window_d: float          # world-units side of the averaging window
    avg_value: float | None = None
    window_std: float | None = None  # spread inside the window (seed-quality flag)


def sample_intensity(field, world_points):
    """Bi/trilinear interpolation at world points, clamped at the field edge.

    Accepts a single point or an (N, dim) array; returns a scalar or (N,).
    """
    pts = np.asarray(world_points, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    spacing = np.array(field.spacing)
    idx = pts / spacing
    if field.dim == 2:
        out = bilinear_batch(field.values, np.ascontiguousarray(idx[:, 0]),
                             np.ascontiguousarray(idx[:, 1]))
    else:
        out = trilinear_batch(field.values, np.ascontiguousarray(idx[:, 0]),
                              np.ascontiguousarray(idx[:, 1]),
                              np.ascontiguousarray(idx[:, 2]))
    return float(out[0]) if single else out


def window_samples(field, seed_world, d):
    """Regular sample grid spanning [-d/2, d/2] per axis around the seed.

    k = max(3, round(d / min_spacing) + 1) samples per axis, endpoints
    included, so the discretized integral is exact on constant fields.
    """
    if d <= 0:
        raise WindowDegenerate("window side d must be positive")
    min_spacing = min(field.spacing)
    k = max(3, int(round(d / min_spacing)) + 1)
    offsets = np.linspace(-d / 2.0, d / 2.0, k)
    grids = np.meshgrid(*([offsets] * field.dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1) + np.asarray(seed_world, dtype=float)
    return sample_intensity(field, pts)


def estimate_average(field, seed_world, d):
    """Mean interpolated intensity over the seed window (Eq. 4/5 discretized)."""
    return float(np.mean(window_samples(field, seed_world, d)))


def make_cost_params(field, seed_world, d):
    """Estimate the window average once and cache it with its spread."""
    samples = window_samples(field, seed_world, d)
    return CostParams(avg_window_d=float(d), avg_value=float(np.mean(samples)),
                      window_std=float(np.std(samples)))


def node_cost(field, params, world_points):
    """c = |window average - intensity|, for one point or a batch."""
    if params.avg_value is None:
        raise AverageNotSet("run estimate_average / make_cost_params first")
    vals = sample_intensity(field, world_points)
    return np.abs(params.avg_value - vals)
