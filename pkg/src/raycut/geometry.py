"""Template shapes, normalization and ray casting.

A template is a closed 2D polygon or watertight 3D triangle mesh giving the
expected shape of the object. It is normalized to centroid zero / unit max
radius and placed at the seed point, and rays cast from the seed measure the
per-ray template distance that scales the graph's node spacing.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels, icosphere
from .errors import DegenerateTemplate, NonWatertightMesh, NoIntersection, TooFewPoints

NORM_TOL = 1e-9


@dataclass(frozen=True)
class TemplateShape:
    """Normalized shape prior: centroid at the origin, max vertex radius 1."""
    dim: int
    vertices: np.ndarray            # (N, dim), unitless model coords
    faces: np.ndarray | None = None  # (F, 3) vertex indices, 3D only

    @property
    def max_radius(self):
        return float(np.linalg.norm(self.vertices, axis=1).max())

    @property
    def centroid(self):
        return self.vertices.mean(axis=0)


@dataclass
class RayFan:
    """Unit ray directions from a seed plus per-ray template distances."""
    seed: np.ndarray                # (dim,) world units
    directions: np.ndarray          # (R, dim) unit vectors
    template_dist: np.ndarray       # (R,) distance to template boundary, > 0
    neighbors: list                 # adjacency list over ray indices
    multi_hit_rays: int = 0         # rays with >1 template intersection
    mesh_faces: np.ndarray | None = field(default=None, repr=False)  # icosphere faces (3D)

    @property
    def R(self):
        return len(self.directions)


def normalize_template(raw_vertices, raw_faces=None):
    """Center vertices on their mean and scale the farthest one to radius 1.

    Vertex order is preserved. Raises DegenerateTemplate for flat or
    zero-extent input, NonWatertightMesh when a 3D edge is not shared by
    exactly two faces.
    """
    verts = np.asarray(raw_vertices, dtype=np.float64)
    if verts.ndim != 2 or verts.shape[1] not in (2, 3):
        raise DegenerateTemplate("vertices must be an (N, 2) or (N, 3) array")
    dim = verts.shape[1]
    if dim == 2:
        if raw_faces is not None:
            raise DegenerateTemplate("2D template takes no faces")
        if len(verts) < 3:
            raise TooFewPoints("2D template needs >= 3 vertices")
        faces = None
    else:
        if raw_faces is None:
            raise NonWatertightMesh("3D template needs faces")
        faces = np.asarray(raw_faces, dtype=np.int64)
        if len(verts) < 4:
            raise DegenerateTemplate("3D template needs >= 4 vertices")
        _check_watertight(len(verts), faces)

    centered = verts - verts.mean(axis=0)
    radii = np.linalg.norm(centered, axis=1)
    rmax = radii.max()
    if rmax <= 0:
        raise DegenerateTemplate("zero extent")
    # flat input: all points on a line (2D) or plane (3D)
    if np.linalg.matrix_rank(centered, tol=1e-12 * rmax) < dim:
        raise DegenerateTemplate("vertices are collinear/coplanar")
    return TemplateShape(dim=dim, vertices=centered / rmax, faces=faces)


def _check_watertight(n_verts, faces):
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise NonWatertightMesh("faces must be (F, 3)")
    if faces.min() < 0 or faces.max() >= n_verts:
        raise NonWatertightMesh("face index out of range")
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    edges.sort(axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    if not np.all(counts == 2):
        raise NonWatertightMesh("every edge must be shared by exactly 2 faces")


def close_contour(points_2d):
    """Edge list closing an ordered point sequence: edge i = (i, (i+1) mod N)."""
    pts = np.asarray(points_2d)
    n = len(pts)
    if n < 3:
        raise TooFewPoints("need >= 3 points to close a contour")
    return [(i, (i + 1) % n) for i in range(n)]


def ray_segment_intersect(origin, direction, p0, p1):
    """Smallest t >= 0 with origin + t*direction on segment [p0, p1], or None.

    Endpoints count as hits (within BARYCENTRIC_TOL of the parameter range).
    """
    origin = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    e = p1 - p0
    rel = p0 - origin
    denom = d[0] * e[1] - d[1] * e[0]
    if abs(denom) < 1e-300:
        return None
    t = (rel[0] * e[1] - rel[1] * e[0]) / denom
    s = (rel[0] * d[1] - rel[1] * d[0]) / denom
    tol = _kernels.BARYCENTRIC_TOL
    if t >= 0 and -tol <= s <= 1 + tol:
        return float(t)
    return None


def ray_triangle_intersect(origin, direction, v0, v1, v2):
    """Moller-Trumbore test. Returns (t, u, v) for the hit or None."""
    origin = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    e1 = np.asarray(v1, dtype=float) - v0
    e2 = np.asarray(v2, dtype=float) - v0
    p = np.cross(d, e2)
    det = float(e1 @ p)
    if abs(det) < 1e-300:
        return None
    inv = 1.0 / det
    tvec = origin - v0
    u = float(tvec @ p) * inv
    tol = _kernels.BARYCENTRIC_TOL
    if u < -tol or u > 1 + tol:
        return None
    q = np.cross(tvec, e1)
    v = float(d @ q) * inv
    if v < -tol or u + v > 1 + tol:
        return None
    t = float(e2 @ q) * inv
    if t < 0:
        return None
    return t, u, v


def template_distances(template, directions):
    """Distance from the template centroid to its boundary along each direction.

    Returns (dist, extra_hits). Missing rays come back negative; the caller
    decides whether that is an error.
    """
    dirs = np.ascontiguousarray(directions, dtype=np.float64)
    verts = np.ascontiguousarray(template.vertices)
    if template.dim == 2:
        return _kernels.ray_polygon_distances(verts, dirs)
    return _kernels.ray_mesh_distances(verts, np.ascontiguousarray(template.faces), dirs)


def fan_directions_2d(R):
    """R unit directions, uniform angles starting at +x, counterclockwise."""
    ang = 2.0 * np.pi * np.arange(R) / R
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


def cast_rays(template, seed, R=360, orientation=None, ico_level=3):
    """Cast rays from the seed through the template placed there.

    2D: R uniform directions (R >= 8). 3D: directions are the vertices of a
    level-``ico_level`` icosphere and R is ignored; neighbor topology comes
    from the icosphere edges. ``orientation`` rotates the template about the
    seed (angle in radians for 2D, 3x3 matrix for 3D).
    """
    seed = np.asarray(seed, dtype=np.float64)
    if template.dim == 2:
        if R < 8:
            raise ValueError("need at least 8 rays in 2D")
        dirs = fan_directions_2d(R)
        neighbors = [[(r - 1) % R, (r + 1) % R] for r in range(R)]
        mesh_faces = None
    else:
        dirs, faces = icosphere.icosphere(ico_level)
        neighbors = icosphere.vertex_adjacency(len(dirs), faces)
        mesh_faces = faces

    if orientation is not None:
        rot = _rotation_matrix(orientation, template.dim)
        # rotating the template by rot == casting along rot^-1 * dir
        probe = dirs @ rot  # rows become rot.T @ dir
    else:
        probe = dirs

    dist, extra = template_distances(template, probe)
    misses = np.flatnonzero(dist <= 0)
    if misses.size:
        raise NoIntersection(
            f"{misses.size} ray(s) missed the template (first: ray {misses[0]}); "
            "template may not be watertight or star-shaped about its centroid")
    return RayFan(seed=seed, directions=dirs, template_dist=dist,
                  neighbors=neighbors, multi_hit_rays=int(np.count_nonzero(extra)),
                  mesh_faces=mesh_faces)


def _rotation_matrix(orientation, dim):
    if dim == 2:
        if np.isscalar(orientation):
            c, s = np.cos(orientation), np.sin(orientation)
            return np.array([[c, -s], [s, c]])
        orientation = np.asarray(orientation, dtype=float)
        if orientation.shape == (2, 2):
            return orientation
        raise ValueError("2D orientation must be an angle or a 2x2 matrix")
    orientation = np.asarray(orientation, dtype=float)
    if orientation.shape != (3, 3):
        raise ValueError("3D orientation must be a 3x3 rotation matrix")
    return orientation


# ---------------------------------------------------------------------------
# TPL text format and built-in templates
# ---------------------------------------------------------------------------

def parse_tpl(text):
    """Parse TPL2/TPL3 text into a normalized TemplateShape."""
    verts, faces, dim = [], [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if dim is None:
            if line == "TPL2":
                dim = 2
            elif line == "TPL3":
                dim = 3
            else:
                raise DegenerateTemplate(f"line {lineno}: expected TPL2 or TPL3 header")
            continue
        parts = line.split()
        if parts[0] == "v" and len(parts) == dim + 1:
            verts.append([float(x) for x in parts[1:]])
        elif parts[0] == "f" and dim == 3 and len(parts) == 4:
            faces.append([int(x) for x in parts[1:]])
        else:
            raise DegenerateTemplate(f"line {lineno}: cannot parse {raw!r}")
    if dim is None:
        raise DegenerateTemplate("empty template file")
    return normalize_template(np.array(verts, dtype=float),
                              np.array(faces, dtype=int) if dim == 3 else None)


def load_tpl(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_tpl(fh.read())


def format_tpl(vertices, faces=None):
    """Serialize vertices (+faces) in the TPL2/TPL3 text format."""
    vertices = np.asarray(vertices)
    dim = vertices.shape[1]
    lines = [f"TPL{dim}"]
    for v in vertices:
        lines.append("v " + " ".join(f"{x:.9g}" for x in v))
    if faces is not None:
        for f in np.asarray(faces):
            lines.append("f %d %d %d" % (f[0], f[1], f[2]))
    return "\n".join(lines) + "\n"


def save_tpl(path, vertices, faces=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_tpl(vertices, faces))


def circle_template(n=64):
    """Regular n-gon approximating the unit circle (clockwise order)."""
    ang = -2.0 * np.pi * np.arange(n) / n
    return normalize_template(np.stack([np.cos(ang), np.sin(ang)], axis=1))


def square_template():
    return normalize_template(np.array([[-1, 1], [1, 1], [1, -1], [-1, -1]], dtype=float))


def icosphere_template(level=2):
    verts, faces = icosphere.icosphere(level)
    return normalize_template(verts, faces)


def star_template(points=5, inner=0.5, rotation=0.0):
    """2D star polygon with alternating outer/inner radii (clockwise)."""
    n = 2 * points
    ang = rotation - 2.0 * np.pi * np.arange(n) / n
    radius = np.where(np.arange(n) % 2 == 0, 1.0, inner)
    return normalize_template(
        np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1))


BUILTIN_TEMPLATES = {
    "circle": circle_template,
    "square": square_template,
    "icosphere": icosphere_template,
    "star": star_template,
}


def builtin_template(name):
    try:
        return BUILTIN_TEMPLATES[name]()
    except KeyError:
        raise KeyError(f"unknown template {name!r}; have {sorted(BUILTIN_TEMPLATES)}") from None
