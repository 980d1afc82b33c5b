"""Scalar intensity fields (2D images / 3D volumes) with spacing metadata.

Values are stored float64 in C order with x fastest: shape (ny, nx) in 2D
and (nz, ny, nx) in 3D. The center of voxel (i, j, k) sits at world
coordinates (i*sx, j*sy, k*sz).
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class ScalarField:
    values: np.ndarray   # (ny, nx) or (nz, ny, nx), float64
    spacing: tuple       # per world axis (sx, sy[, sz])

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim not in (2, 3):
            raise ValueError("field must be 2D or 3D")
        self.spacing = tuple(float(s) for s in self.spacing)
        if len(self.spacing) != self.values.ndim:
            raise ValueError("spacing length must match dimensionality")
        if any(s <= 0 for s in self.spacing):
            raise ValueError("spacing must be positive")
        if any(n < 1 for n in self.values.shape):
            raise ValueError("extents must be >= 1")

    @property
    def dim(self):
        return self.values.ndim

    @property
    def extents(self):
        """Voxel counts per world axis (nx, ny[, nz])."""
        return tuple(reversed(self.values.shape))

    @property
    def world_size(self):
        return tuple(n * s for n, s in zip(self.extents, self.spacing))

    def contains_voxel(self, idx):
        """True if the (possibly fractional) voxel index lies on the grid."""
        idx = np.asarray(idx, dtype=float)
        if idx.shape != (self.dim,):
            return False
        return bool(np.all(idx >= 0) and np.all(idx <= np.array(self.extents) - 1))

    def voxel_to_world(self, idx):
        return np.asarray(idx, dtype=float) * np.array(self.spacing)

    def world_to_voxel(self, point):
        return np.asarray(point, dtype=float) / np.array(self.spacing)
