"""PCA shape statistics over corresponding landmarks.

Training shapes are Procrustes-aligned (translation, scale, rotation
removed), the landmark-wise mean and principal variation modes are taken
from the aligned set, and new shapes are synthesized as mean + modes @ b.
The spread of the modes also yields a data-driven value for the boundary
stiffness delta used by the graph builder.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateShape, DimensionMismatch

GPA_TOL = 1e-9


@dataclass
class ShapeModel:
    dim: int
    n_landmarks: int
    mean: np.ndarray          # (L*dim,) flattened x0 y0 [z0] x1 ...
    modes: np.ndarray         # (M, L*dim) orthonormal rows, variance-ordered
    eigenvalues: np.ndarray   # (M,) descending, >= 0

    @property
    def n_modes(self):
        return len(self.eigenvalues)

    def mean_landmarks(self):
        return self.mean.reshape(self.n_landmarks, self.dim)


def _center_unit_rms(shape):
    centered = shape - shape.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum(centered ** 2, axis=1)))
    if rms <= 0:
        raise DegenerateShape("shape has zero scatter")
    return centered / rms


def _optimal_rotation(X, M):
    """Proper rotation Q (applied as X @ Q) minimizing ||X @ Q - M||_F (Kabsch)."""
    H = X.T @ M
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(U @ Vt))
    D = np.eye(H.shape[0])
    D[-1, -1] = d
    return U @ D @ Vt


def align_shapes(shapes, max_iters=200):
    """Generalized Procrustes alignment.

    Each shape is centered, scaled to unit RMS landmark radius and rotated
    against the evolving mean until the mean stops moving (1e-9).
    """
    arrays = [np.asarray(s, dtype=np.float64) for s in shapes]
    if len(arrays) < 2:
        raise ValueError("need at least 2 shapes")
    L, dim = arrays[0].shape
    for a in arrays:
        if a.shape != (L, dim):
            raise DimensionMismatch("all shapes need the same landmark count")
    aligned = [_center_unit_rms(a) for a in arrays]
    mean = aligned[0]
    for _ in range(max_iters):
        aligned = [a @ _optimal_rotation(a, mean) for a in aligned]
        new_mean = _center_unit_rms(np.mean(aligned, axis=0))
        # pin the mean's rotation to the first shape so iterations can settle
        new_mean = new_mean @ _optimal_rotation(new_mean, aligned[0])
        if np.linalg.norm(new_mean - mean) < GPA_TOL:
            mean = new_mean
            break
        mean = new_mean
    aligned = [a @ _optimal_rotation(a, mean) for a in aligned]
    return aligned


def fit_pca(aligned):
    """Mean shape + variation modes of an aligned training set."""
    data = np.stack([np.asarray(a, dtype=np.float64).ravel() for a in aligned])
    n, length = data.shape
    L, dim = np.asarray(aligned[0]).shape
    mean = data.mean(axis=0)
    dev = data - mean
    n_modes = min(n - 1, length)
    _, svals, vt = np.linalg.svd(dev, full_matrices=False)
    eigenvalues = (svals ** 2) / (n - 1)
    return ShapeModel(dim=dim, n_landmarks=L, mean=mean,
                      modes=vt[:n_modes], eigenvalues=eigenvalues[:n_modes])


def synthesize(model, b):
    """Shape instance mean + modes.T @ b, as (L, dim) landmarks."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (model.n_modes,):
        raise DimensionMismatch(f"b must have length {model.n_modes}")
    flat = model.mean + model.modes.T @ b
    return flat.reshape(model.n_landmarks, model.dim)


def project(model, shape):
    """Mode coefficients of a shape (inverse of synthesize up to truncation)."""
    flat = np.asarray(shape, dtype=np.float64).ravel()
    if flat.shape != model.mean.shape:
        raise DimensionMismatch("shape has the wrong landmark count")
    return model.modes @ (flat - model.mean)


def estimate_delta(model, fan, P, scale_max, mode_sigma=2.0):
    """Boundary stiffness from the shape spread.

    Takes the largest per-landmark displacement of the +-mode_sigma*sqrt(lambda)
    deformation, rescales it from model units (unit RMS) to template units
    (unit max radius, as cast by the fan) and converts to node indices via
    the smallest per-ray node spacing. Result is a nonnegative integer.
    """
    if model.n_modes == 0:
        return 0
    b = mode_sigma * np.sqrt(np.maximum(model.eigenvalues, 0.0))
    disp = (model.modes.T @ b).reshape(model.n_landmarks, model.dim)
    max_disp = float(np.linalg.norm(disp, axis=1).max())
    mean_lm = model.mean_landmarks()
    mean_lm = mean_lm - mean_lm.mean(axis=0)
    max_radius = float(np.linalg.norm(mean_lm, axis=1).max())
    if max_radius <= 0:
        raise DegenerateShape("mean shape has zero extent")
    min_spacing = float(fan.template_dist.min()) * scale_max / P
    indices = (max_disp / max_radius) / min_spacing
    return max(0, int(np.ceil(indices - 1e-9)))


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def format_model(model):
    lines = [f"SHAPEMODEL {model.dim} {model.n_landmarks} {model.n_modes}", "mean"]
    for p in model.mean_landmarks():
        lines.append(" ".join(f"{x:.17g}" for x in p))
    for k in range(model.n_modes):
        lines.append(f"lambda {k} {model.eigenvalues[k]:.17g}")
        lines.append(f"mode {k}")
        for p in model.modes[k].reshape(model.n_landmarks, model.dim):
            lines.append(" ".join(f"{x:.17g}" for x in p))
    return "\n".join(lines) + "\n"


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_model(model))


def parse_model(text):
    lines = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    head = lines[0].split()
    if head[0] != "SHAPEMODEL":
        raise ValueError("not a SHAPEMODEL file")
    dim, L, M = int(head[1]), int(head[2]), int(head[3])

    def read_block(start):
        rows = [[float(x) for x in lines[start + i].split()] for i in range(L)]
        return np.array(rows).ravel(), start + L

    pos = 1
    if lines[pos] != "mean":
        raise ValueError("expected mean section")
    mean, pos = read_block(pos + 1)
    eigenvalues = np.zeros(M)
    modes = np.zeros((M, L * dim))
    for _ in range(M):
        tok = lines[pos].split()
        k = int(tok[1])
        eigenvalues[k] = float(tok[2])
        if not lines[pos + 1].startswith("mode"):
            raise ValueError("expected mode section after lambda")
        modes[k], pos = read_block(pos + 2)
    return ShapeModel(dim=dim, n_landmarks=L, mean=mean,
                      modes=modes, eigenvalues=eigenvalues)


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())
