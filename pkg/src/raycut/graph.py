"""Ray-graph construction: node lattice, arc families and terminal weights.

Node (r, p) sits at distance ((p+1)/P) * scale_max * rho_r from the seed
along ray r, so every ray carries the same node count but its own spacing.
Three arc families are emitted:

  * intra-column arcs (r, p) -> (r, p-1), infinite capacity, making the
    source side of any finite cut a per-ray prefix;
  * inter-column arcs (r, p) -> (r_n, max(0, p - delta_r)) for neighbor
    rays, bounding the boundary-index jump between neighbors by delta_r;
  * one terminal arc per node from the telescoped weights
    w(r, 0) = c(r, 0), w(r, p) = c(r, p) - c(r, p-1).
"""

from dataclasses import dataclass

import numpy as np

INF = np.inf
DIMACS_INF = 10 ** 12


def node_id(r, p, P):
    return r * P + p


def sample_nodes(fan, P, scale_max):
    """World positions of the node lattice, shape (R, P, dim)."""
    if P < 1:
        raise ValueError("P must be >= 1")
    if scale_max <= 0:
        raise ValueError("scale_max must be positive")
    steps = (np.arange(1, P + 1) / P) * scale_max            # (P,)
    radii = fan.template_dist[:, None] * steps[None, :]      # (R, P)
    return fan.seed + radii[:, :, None] * fan.directions[:, None, :]


def neighbor_pairs(neighbors):
    """Unordered (r, r_n) pairs with r < r_n from an adjacency list."""
    pairs = [(r, rn) for r, ns in enumerate(neighbors) for rn in ns if rn > r]
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def build_intra_arcs(R, P):
    """(r, p) -> (r, p-1) for p in [1, P-1]; R*(P-1) arcs."""
    r = np.repeat(np.arange(R), P - 1)
    p = np.tile(np.arange(1, P), R)
    return node_id(r, p, P), node_id(r, p - 1, P)


def build_inter_arcs(R, P, pairs, delta_r):
    """Both orientations of every neighbor pair at every level; 2*|pairs|*P arcs."""
    if delta_r < 0:
        raise ValueError("delta_r must be >= 0")
    src_rays = np.concatenate([pairs[:, 0], pairs[:, 1]])
    dst_rays = np.concatenate([pairs[:, 1], pairs[:, 0]])
    p = np.arange(P)
    q = np.maximum(0, p - delta_r)
    u = (src_rays[:, None] * P + p[None, :]).ravel()
    v = (dst_rays[:, None] * P + q[None, :]).ravel()
    return u, v


def node_weights(costs):
    """Telescoped terminal weights: prefix sums along a ray give the boundary cost."""
    costs = np.asarray(costs, dtype=np.float64)
    w = np.empty_like(costs)
    w[:, 0] = costs[:, 0]
    if costs.shape[1] > 1:
        w[:, 1:] = costs[:, 1:] - costs[:, :-1]
    return w


def terminal_arcs(weights, source, sink):
    """One arc per node: source -> node with capacity -w when w < 0, else node -> sink with w."""
    w = np.asarray(weights, dtype=np.float64).ravel()
    nodes = np.arange(w.size)
    neg = w < 0
    u = np.where(neg, source, nodes)
    v = np.where(neg, nodes, sink)
    return u, v, np.abs(w)


def base_exclusion_penalty(costs):
    """Weight subtracted from every innermost node to rule out the empty cut.

    Any nonempty closed set contains the entire innermost level (the level-0
    nodes are strongly connected through the clamped inter-column arcs), so
    subtracting a constant there shifts all nonempty candidates equally and
    any value above the max node cost makes the best of them beat the empty
    set.
    """
    return float(np.max(costs)) + 1.0


@dataclass
class RayGraph:
    """Assembled flow graph over the ray lattice."""
    R: int
    P: int
    delta_r: int
    scale_max: float
    node_pos: np.ndarray          # (R, P, dim)
    pairs: np.ndarray             # (E, 2) unordered neighbor ray pairs
    arc_u: np.ndarray
    arc_v: np.ndarray
    arc_cap: np.ndarray           # np.inf for uncuttable arcs
    source: int
    sink: int
    weights: np.ndarray | None = None       # (R, P) telescoped weights as emitted
    base_penalty: float = 0.0               # amount subtracted at level 0

    @property
    def num_nodes(self):
        return self.R * self.P + 2

    def to_dimacs(self):
        """DIMACS max-flow text; node ids 1-based, infinity rendered as 10^12."""
        lines = [f"p max {self.num_nodes} {len(self.arc_u)}",
                 f"n {self.source + 1} s", f"n {self.sink + 1} t"]
        for u, v, c in zip(self.arc_u, self.arc_v, self.arc_cap):
            cap = str(DIMACS_INF) if np.isinf(c) else f"{c:.17g}"
            lines.append(f"a {u + 1} {v + 1} {cap}")
        return "\n".join(lines) + "\n"


def build_ray_graph(fan, P, scale_max, delta_r, costs, exclude_empty=True):
    """Assemble the full graph for a cost lattice.

    ``exclude_empty`` applies the innermost-level weight translation so the
    minimum cut is a nonempty closed set; the reported per-node weights stay
    untranslated.
    """
    costs = np.asarray(costs, dtype=np.float64)
    R = fan.R
    if costs.shape != (R, P):
        raise ValueError("costs must be (R, P)")
    pos = sample_nodes(fan, P, scale_max)
    pairs = neighbor_pairs(fan.neighbors)
    source = R * P
    sink = R * P + 1

    iu, iv = build_intra_arcs(R, P)
    ju, jv = build_inter_arcs(R, P, pairs, delta_r)
    w = node_weights(costs)
    penalty = base_exclusion_penalty(costs) if exclude_empty else 0.0
    shifted = w.copy()
    shifted[:, 0] -= penalty
    tu, tv, tcap = terminal_arcs(shifted, source, sink)

    arc_u = np.concatenate([iu, ju, tu])
    arc_v = np.concatenate([iv, jv, tv])
    arc_cap = np.concatenate([np.full(iu.size + ju.size, INF), tcap])
    return RayGraph(R=R, P=P, delta_r=int(delta_r), scale_max=float(scale_max),
                    node_pos=pos, pairs=pairs, arc_u=arc_u, arc_v=arc_v,
                    arc_cap=arc_cap, source=source, sink=sink,
                    weights=w, base_penalty=penalty)
