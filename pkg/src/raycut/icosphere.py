"""Subdivided icosahedron on the unit sphere.

Supplies the 3D ray directions (one per vertex), the ray neighbor topology
(one per edge) and the triangulation reused for surface reconstruction.
Vertex count is 10 * 4**level + 2, so level 3 gives 642 directions.
"""

import numpy as np

_PHI = (1.0 + np.sqrt(5.0)) / 2.0

_ICO_VERTS = np.array([
    [-1, _PHI, 0], [1, _PHI, 0], [-1, -_PHI, 0], [1, -_PHI, 0],
    [0, -1, _PHI], [0, 1, _PHI], [0, -1, -_PHI], [0, 1, -_PHI],
    [_PHI, 0, -1], [_PHI, 0, 1], [-_PHI, 0, -1], [-_PHI, 0, 1],
], dtype=np.float64)

_ICO_FACES = np.array([
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
], dtype=np.int64)


def icosphere(level=3):
    """Return (vertices, faces) of a unit icosphere at the given subdivision level."""
    if level < 0:
        raise ValueError("subdivision level must be >= 0")
    verts = [v / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = [tuple(f) for f in _ICO_FACES]

    for _ in range(level):
        midpoint = {}

        def mid(i, j):
            key = (i, j) if i < j else (j, i)
            k = midpoint.get(key)
            if k is None:
                m = verts[i] + verts[j]
                m /= np.linalg.norm(m)
                k = len(verts)
                verts.append(m)
                midpoint[key] = k
            return k

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces

    return np.array(verts), np.array(faces, dtype=np.int64)


def edges_of(faces):
    """Unique undirected edges (i < j) of a triangle list."""
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e.sort(axis=1)
    return np.unique(e, axis=0)


def vertex_adjacency(n_vertices, faces):
    """Neighbor index list per vertex, derived from face edges."""
    neighbors = [set() for _ in range(n_vertices)]
    for i, j in edges_of(faces):
        neighbors[int(i)].add(int(j))
        neighbors[int(j)].add(int(i))
    return [sorted(s) for s in neighbors]
