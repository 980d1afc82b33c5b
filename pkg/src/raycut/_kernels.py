"""Hot inner loops, numba-compiled unless RAYCUT_DISABLE_NUMBA=1.

Everything here is written in nopython-compatible style (flat loops over
numpy arrays) so the exact same code runs interpreted when the JIT is off.
"""

import numpy as np

from ._accel import njit

BARYCENTRIC_TOL = 1e-12


# ---------------------------------------------------------------------------
# ray casting
# ---------------------------------------------------------------------------

@njit
def ray_polygon_distances(verts, dirs):
    """First-hit distance from the origin along each direction to a closed polygon.

    verts: (N, 2) polygon vertices, edge i joins vertex i to i+1 (mod N).
    dirs: (R, 2) unit directions.
    Returns (dist, extra_hits): dist[r] < 0 encodes a miss; extra_hits[r]
    counts intersections strictly beyond the first (non-star templates).
    """
    n = verts.shape[0]
    nrays = dirs.shape[0]
    dist = np.full(nrays, -1.0)
    extra = np.zeros(nrays, dtype=np.int64)
    for r in range(nrays):
        dx, dy = dirs[r, 0], dirs[r, 1]
        tmin = -1.0
        nhits = 0
        for i in range(n):
            x0, y0 = verts[i, 0], verts[i, 1]
            j = i + 1
            if j == n:
                j = 0
            ex, ey = verts[j, 0] - x0, verts[j, 1] - y0
            denom = dx * ey - dy * ex
            if abs(denom) < 1e-300:
                continue
            t = (x0 * ey - y0 * ex) / denom
            s = (x0 * dy - y0 * dx) / denom
            if t >= 0.0 and -BARYCENTRIC_TOL <= s <= 1.0 + BARYCENTRIC_TOL:
                nhits += 1
                if tmin < 0.0 or t < tmin:
                    tmin = t
        if tmin >= 0.0:
            dist[r] = tmin
            # recount hits strictly beyond the first (vertex grazes share tmin)
            far = 0
            for i in range(n):
                x0, y0 = verts[i, 0], verts[i, 1]
                j = i + 1
                if j == n:
                    j = 0
                ex, ey = verts[j, 0] - x0, verts[j, 1] - y0
                denom = dx * ey - dy * ex
                if abs(denom) < 1e-300:
                    continue
                t = (x0 * ey - y0 * ex) / denom
                s = (x0 * dy - y0 * dx) / denom
                if -BARYCENTRIC_TOL <= s <= 1.0 + BARYCENTRIC_TOL and t > tmin * (1.0 + 1e-9) + 1e-12:
                    far += 1
            extra[r] = far
    return dist, extra


@njit
def ray_mesh_distances(verts, faces, dirs):
    """First-hit distance from the origin to a triangle mesh (Moller-Trumbore).

    Returns (dist, extra_hits); dist[r] < 0 encodes a miss.
    """
    nf = faces.shape[0]
    nrays = dirs.shape[0]
    dist = np.full(nrays, -1.0)
    extra = np.zeros(nrays, dtype=np.int64)
    for r in range(nrays):
        ox, oy, oz = 0.0, 0.0, 0.0
        dx, dy, dz = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        tmin = -1.0
        for f in range(2):
            # pass 0 finds tmin, pass 1 counts hits strictly beyond it
            far = 0
            for k in range(nf):
                i0, i1, i2 = faces[k, 0], faces[k, 1], faces[k, 2]
                e1x = verts[i1, 0] - verts[i0, 0]
                e1y = verts[i1, 1] - verts[i0, 1]
                e1z = verts[i1, 2] - verts[i0, 2]
                e2x = verts[i2, 0] - verts[i0, 0]
                e2y = verts[i2, 1] - verts[i0, 1]
                e2z = verts[i2, 2] - verts[i0, 2]
                px = dy * e2z - dz * e2y
                py = dz * e2x - dx * e2z
                pz = dx * e2y - dy * e2x
                det = e1x * px + e1y * py + e1z * pz
                if abs(det) < 1e-300:
                    continue
                inv = 1.0 / det
                tx = ox - verts[i0, 0]
                ty = oy - verts[i0, 1]
                tz = oz - verts[i0, 2]
                u = (tx * px + ty * py + tz * pz) * inv
                if u < -BARYCENTRIC_TOL or u > 1.0 + BARYCENTRIC_TOL:
                    continue
                qx = ty * e1z - tz * e1y
                qy = tz * e1x - tx * e1z
                qz = tx * e1y - ty * e1x
                v = (dx * qx + dy * qy + dz * qz) * inv
                if v < -BARYCENTRIC_TOL or u + v > 1.0 + BARYCENTRIC_TOL:
                    continue
                t = (e2x * qx + e2y * qy + e2z * qz) * inv
                if t < 0.0:
                    continue
                if f == 0:
                    if tmin < 0.0 or t < tmin:
                        tmin = t
                elif t > tmin * (1.0 + 1e-9) + 1e-12:
                    far += 1
            if tmin < 0.0:
                break
            if f == 1:
                extra[r] = far
        if tmin >= 0.0:
            dist[r] = tmin
    return dist, extra


# ---------------------------------------------------------------------------
# intensity interpolation
# ---------------------------------------------------------------------------

@njit
def bilinear_batch(values, ix, iy):
    """Bilinear interpolation at continuous voxel coords, clamped to the grid.

    values: (ny, nx); ix, iy: flat arrays of x/y voxel coordinates.
    """
    ny, nx = values.shape
    out = np.empty(ix.size)
    for k in range(ix.size):
        x = min(max(ix[k], 0.0), nx - 1.0)
        y = min(max(iy[k], 0.0), ny - 1.0)
        x0 = min(int(x), max(nx - 2, 0))
        y0 = min(int(y), max(ny - 2, 0))
        fx = x - x0 if nx > 1 else 0.0
        fy = y - y0 if ny > 1 else 0.0
        x1 = min(x0 + 1, nx - 1)
        y1 = min(y0 + 1, ny - 1)
        v00 = values[y0, x0]
        v01 = values[y0, x1]
        v10 = values[y1, x0]
        v11 = values[y1, x1]
        out[k] = (v00 * (1 - fx) * (1 - fy) + v01 * fx * (1 - fy)
                  + v10 * (1 - fx) * fy + v11 * fx * fy)
    return out


@njit
def trilinear_batch(values, ix, iy, iz):
    """Trilinear interpolation at continuous voxel coords, clamped to the grid."""
    nz, ny, nx = values.shape
    out = np.empty(ix.size)
    for k in range(ix.size):
        x = min(max(ix[k], 0.0), nx - 1.0)
        y = min(max(iy[k], 0.0), ny - 1.0)
        z = min(max(iz[k], 0.0), nz - 1.0)
        x0 = min(int(x), max(nx - 2, 0))
        y0 = min(int(y), max(ny - 2, 0))
        z0 = min(int(z), max(nz - 2, 0))
        fx = x - x0 if nx > 1 else 0.0
        fy = y - y0 if ny > 1 else 0.0
        fz = z - z0 if nz > 1 else 0.0
        x1 = min(x0 + 1, nx - 1)
        y1 = min(y0 + 1, ny - 1)
        z1 = min(z0 + 1, nz - 1)
        c00 = values[z0, y0, x0] * (1 - fx) + values[z0, y0, x1] * fx
        c01 = values[z0, y1, x0] * (1 - fx) + values[z0, y1, x1] * fx
        c10 = values[z1, y0, x0] * (1 - fx) + values[z1, y0, x1] * fx
        c11 = values[z1, y1, x0] * (1 - fx) + values[z1, y1, x1] * fx
        c0 = c00 * (1 - fy) + c01 * fy
        c1 = c10 * (1 - fy) + c11 * fy
        out[k] = c0 * (1 - fz) + c1 * fz
    return out


# ---------------------------------------------------------------------------
# max flow (Boykov-Kolmogorov search trees, paired residual edges)
# ---------------------------------------------------------------------------

@njit
def bk_maxflow(n, source, sink, eto, ecap, adj_ptr, adj_idx, eps):
    """Exact max flow via growing source/sink search trees.

    Tailored to the shallow ray-column graphs built here: trees persist
    across augmentations instead of re-running a global search per phase.
    ecap is mutated into the residual capacities. Edge pairing as in
    dinic_maxflow.
    """
    FREE, SRC, SNK = 0, 1, 2
    tree = np.zeros(n, dtype=np.uint8)
    pe = np.full(n, -1, dtype=np.int64)    # edge from node toward its parent
    cur = adj_ptr[:n].copy()               # per-node growth scan position
    nxt = np.full(n, -2, dtype=np.int64)   # active FIFO links; -2 = not queued
    qhead = qtail = np.int64(-1)
    orph = np.empty(n + 1, dtype=np.int64)  # orphan ring buffer
    ohead = otail = 0
    # origin-check cache: dist to root, stamped per adoption round
    ts = np.zeros(n, dtype=np.int64)
    dist = np.zeros(n, dtype=np.int64)
    time = np.int64(0)

    tree[source] = SRC
    tree[sink] = SNK
    # push source and sink onto the active queue
    nxt[source] = -1
    qhead = qtail = source
    nxt[qtail] = sink
    nxt[sink] = -1
    qtail = sink

    total = 0.0
    while True:
        # --- growth: expand trees until they touch ---
        connect = np.int64(-1)
        while qhead != -1:
            u = qhead
            if tree[u] == FREE:
                qhead = nxt[u]
                nxt[u] = -2
                if qhead == -1:
                    qtail = -1
                continue
            tu = tree[u]
            found = False
            while cur[u] < adj_ptr[u + 1]:
                e = adj_idx[cur[u]]
                v = eto[e]
                residual = ecap[e] if tu == SRC else ecap[e ^ 1]
                if residual > eps:
                    if tree[v] == FREE:
                        tree[v] = tu
                        pe[v] = e ^ 1          # edge v -> u
                        cur[v] = adj_ptr[v]
                        if nxt[v] == -2:
                            nxt[v] = -1
                            if qtail == -1:
                                qhead = qtail = v
                            else:
                                nxt[qtail] = v
                                qtail = v
                    elif tree[v] != tu:
                        # trees touch; orient the edge source-side -> sink-side
                        connect = e if tu == SRC else e ^ 1
                        found = True
                        break
                cur[u] += 1
            if found:
                break
            qhead = nxt[u]
            nxt[u] = -2
            if qhead == -1:
                qtail = -1
        if connect == -1:
            break  # trees can no longer touch: flow is maximal

        # --- augment through the connecting edge ---
        a = eto[connect ^ 1]   # source-side endpoint
        b = eto[connect]       # sink-side endpoint
        bottleneck = ecap[connect]
        x = a
        while pe[x] != -1:
            r = ecap[pe[x] ^ 1]
            if r < bottleneck:
                bottleneck = r
            x = eto[pe[x]]
        x = b
        while pe[x] != -1:
            r = ecap[pe[x]]
            if r < bottleneck:
                bottleneck = r
            x = eto[pe[x]]
        total += bottleneck

        ecap[connect] -= bottleneck
        ecap[connect ^ 1] += bottleneck
        x = a
        while pe[x] != -1:
            e = pe[x]
            parent = eto[e]
            ecap[e ^ 1] -= bottleneck
            ecap[e] += bottleneck
            if ecap[e ^ 1] <= eps:
                pe[x] = -2  # saturated link: x is an orphan now
                orph[otail] = x
                otail = (otail + 1) % (n + 1)
            x = parent
        x = b
        while pe[x] != -1:
            e = pe[x]
            parent = eto[e]
            ecap[e] -= bottleneck
            ecap[e ^ 1] += bottleneck
            if ecap[e] <= eps:
                pe[x] = -2
                orph[otail] = x
                otail = (otail + 1) % (n + 1)
            x = parent

        # --- adoption: repair or free the orphaned subtrees ---
        # one stamp round per augmentation: within it, a node stamped as
        # hanging off a root can never be detached (only descendants of
        # still-pending orphans can be, and their walks stop at the orphan)
        time += 1
        while ohead != otail:
            v = orph[ohead]
            ohead = (ohead + 1) % (n + 1)
            tv = tree[v]
            best_edge = np.int64(-1)
            best_dist = np.int64(2 ** 62)
            for k in range(adj_ptr[v], adj_ptr[v + 1]):
                e = adj_idx[k]
                w = eto[e]
                if tree[w] != tv:
                    continue
                residual = ecap[e ^ 1] if tv == SRC else ecap[e]
                if residual <= eps:
                    continue
                # origin check: w must hang off its tree root; prefer the
                # closest valid parent so tree paths stay short
                x = w
                steps = np.int64(0)
                while True:
                    if ts[x] == time:
                        valid = True
                        break
                    if pe[x] == -1:
                        valid = x == source or x == sink
                        if valid:
                            ts[x] = time
                            dist[x] = 0
                        break
                    if pe[x] == -2:
                        valid = False
                        break
                    x = eto[pe[x]]
                    steps += 1
                if valid:
                    # stamp the walked prefix so later checks shortcut
                    d = dist[x] + steps
                    y = w
                    dd = d
                    while y != x:
                        ts[y] = time
                        dist[y] = dd
                        dd -= 1
                        y = eto[pe[y]]
                    if d < best_dist:
                        best_dist = d
                        best_edge = e
                        if d == 0:
                            break  # cannot beat a root parent
            if best_edge != -1:
                pe[v] = best_edge
                ts[v] = time
                dist[v] = best_dist + 1
            else:
                # free v; its tree children become orphans, potential
                # re-adopters get reactivated
                for k in range(adj_ptr[v], adj_ptr[v + 1]):
                    e = adj_idx[k]
                    w = eto[e]
                    if tree[w] != tv:
                        continue
                    if pe[w] >= 0 and eto[pe[w]] == v:
                        pe[w] = -2
                        orph[otail] = w
                        otail = (otail + 1) % (n + 1)
                    residual = ecap[e ^ 1] if tv == SRC else ecap[e]
                    if residual > eps and nxt[w] == -2:
                        cur[w] = adj_ptr[w]  # rescan: the tree changed around w
                        nxt[w] = -1
                        if qtail == -1:
                            qhead = qtail = w
                        else:
                            nxt[qtail] = w
                            qtail = w
                tree[v] = FREE
                pe[v] = -1
    return total


# ---------------------------------------------------------------------------
# max flow (Dinic blocking-flow, paired residual edges) - second exact solver
# ---------------------------------------------------------------------------

@njit
def dinic_maxflow(n, source, sink, eto, ecap, adj_ptr, adj_idx, eps):
    """Exact max flow. ecap is mutated into the residual capacities.

    Edges come in pairs: edge e and e^1 are each other's reverses, so the
    tail of e is eto[e^1].
    """
    level = np.empty(n, dtype=np.int64)
    iters = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    path = np.empty(n + 1, dtype=np.int64)
    total = 0.0
    while True:
        for i in range(n):
            level[i] = -1
        level[source] = 0
        qh, qt = 0, 1
        queue[0] = source
        while qh < qt:
            u = queue[qh]
            qh += 1
            for k in range(adj_ptr[u], adj_ptr[u + 1]):
                e = adj_idx[k]
                v = eto[e]
                if ecap[e] > eps and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[sink] < 0:
            break
        for i in range(n):
            iters[i] = adj_ptr[i]
        while True:
            u = source
            depth = 0
            found = False
            while True:
                if u == sink:
                    found = True
                    break
                advanced = False
                while iters[u] < adj_ptr[u + 1]:
                    e = adj_idx[iters[u]]
                    v = eto[e]
                    if ecap[e] > eps and level[v] == level[u] + 1:
                        path[depth] = e
                        depth += 1
                        u = v
                        advanced = True
                        break
                    iters[u] += 1
                if advanced:
                    continue
                level[u] = -1
                if depth == 0:
                    break
                depth -= 1
                e = path[depth]
                u = eto[e ^ 1]
                iters[u] += 1
            if not found:
                break
            bottleneck = ecap[path[0]]
            for d in range(1, depth):
                c = ecap[path[d]]
                if c < bottleneck:
                    bottleneck = c
            for d in range(depth):
                e = path[d]
                ecap[e] -= bottleneck
                ecap[e ^ 1] += bottleneck
            total += bottleneck
    return total


@njit
def residual_forward_reach(n, source, eto, ecap, adj_ptr, adj_idx, eps):
    """Nodes reachable from source through positive residual arcs."""
    seen = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    seen[source] = 1
    qh, qt = 0, 1
    queue[0] = source
    while qh < qt:
        u = queue[qh]
        qh += 1
        for k in range(adj_ptr[u], adj_ptr[u + 1]):
            e = adj_idx[k]
            v = eto[e]
            if ecap[e] > eps and seen[v] == 0:
                seen[v] = 1
                queue[qt] = v
                qt += 1
    return seen


@njit
def residual_backward_reach(n, sink, eto, ecap, adj_ptr, adj_idx, eps):
    """Nodes that can still reach the sink through positive residual arcs."""
    seen = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    seen[sink] = 1
    qh, qt = 0, 1
    queue[0] = sink
    while qh < qt:
        v = queue[qh]
        qh += 1
        for k in range(adj_ptr[v], adj_ptr[v + 1]):
            e = adj_idx[k]
            w = eto[e]
            # arc w -> v is the pair of v -> w; positive residual means w reaches sink
            if ecap[e ^ 1] > eps and seen[w] == 0:
                seen[w] = 1
                queue[qt] = w
                qt += 1
    return seen


# ---------------------------------------------------------------------------
# rasterization
# ---------------------------------------------------------------------------

@njit
def fill_polygon_mask(poly, ny, nx, sx, sy):
    """Even-odd scanline fill; voxel center (i, j) sits at world (i*sx, j*sy)."""
    n = poly.shape[0]
    mask = np.zeros((ny, nx), dtype=np.uint8)
    crossings = np.empty(n)
    for j in range(ny):
        y = j * sy
        nc = 0
        for i in range(n):
            y0 = poly[i, 1]
            k = i + 1
            if k == n:
                k = 0
            y1 = poly[k, 1]
            if (y0 <= y < y1) or (y1 <= y < y0):
                x = poly[i, 0] + (y - y0) / (y1 - y0) * (poly[k, 0] - poly[i, 0])
                crossings[nc] = x
                nc += 1
        # insertion sort (nc is small)
        for a in range(1, nc):
            key = crossings[a]
            b = a - 1
            while b >= 0 and crossings[b] > key:
                crossings[b + 1] = crossings[b]
                b -= 1
            crossings[b + 1] = key
        for m in range(0, nc - 1, 2):
            c0 = crossings[m]
            c1 = crossings[m + 1]
            i0 = int(np.ceil(c0 / sx - 1e-9))
            i1 = int(np.ceil(c1 / sx - 1e-9)) - 1
            if i0 < 0:
                i0 = 0
            if i1 > nx - 1:
                i1 = nx - 1
            for i in range(i0, i1 + 1):
                mask[j, i] = 1
    return mask


@njit
def voxelize_mesh_parity(verts, faces, nz, ny, nx, sx, sy, sz):
    """+x ray-parity mesh voxelization; jitters a scan line on degenerate hits."""
    nf = faces.shape[0]
    mask = np.zeros((nz, ny, nx), dtype=np.uint8)
    xs = np.empty(nf)
    for k in range(nz):
        for j in range(ny):
            yl = j * sy
            zl = k * sz
            ok = False
            tries = 0
            nc = 0
            while not ok:
                ok = True
                strict = tries < 11
                nc = 0
                for f in range(nf):
                    i0, i1, i2 = faces[f, 0], faces[f, 1], faces[f, 2]
                    y0, z0 = verts[i0, 1], verts[i0, 2]
                    y1, z1 = verts[i1, 1], verts[i1, 2]
                    y2, z2 = verts[i2, 1], verts[i2, 2]
                    d = (y1 - y0) * (z2 - z0) - (z1 - z0) * (y2 - y0)
                    if abs(d) < 1e-14:
                        continue  # projection is a sliver; tangential to the ray
                    w0 = ((y1 - yl) * (z2 - zl) - (z1 - zl) * (y2 - yl)) / d
                    w1 = ((y2 - yl) * (z0 - zl) - (z2 - zl) * (y0 - yl)) / d
                    w2 = 1.0 - w0 - w1
                    lim = 1e-10
                    if abs(w0) < lim or abs(w1) < lim or abs(w2) < lim:
                        if strict and (-lim < w0 < 1.0 + lim and -lim < w1 < 1.0 + lim
                                       and -lim < w2 < 1.0 + lim):
                            # grazing an edge or vertex: jitter the whole line
                            ok = False
                            break
                        continue
                    if w0 > 0.0 and w1 > 0.0 and w2 > 0.0:
                        xs[nc] = w0 * verts[i0, 0] + w1 * verts[i1, 0] + w2 * verts[i2, 0]
                        nc += 1
                if not ok:
                    tries += 1
                    yl += sy * 1.9e-7 * tries
                    zl += sz * 2.3e-7 * tries
            for a in range(1, nc):
                key = xs[a]
                b = a - 1
                while b >= 0 and xs[b] > key:
                    xs[b + 1] = xs[b]
                    b -= 1
                xs[b + 1] = key
            for m in range(0, nc - 1, 2):
                c0 = xs[m]
                c1 = xs[m + 1]
                i0 = int(np.ceil(c0 / sx - 1e-9))
                i1 = int(np.ceil(c1 / sx - 1e-9)) - 1
                if i0 < 0:
                    i0 = 0
                if i1 > nx - 1:
                    i1 = nx - 1
                for i in range(i0, i1 + 1):
                    mask[k, j, i] = 1
    return mask
