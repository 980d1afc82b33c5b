"""Exact s-t max flow / min cut on sparse arc lists.

Two exact solvers run over the same paired-residual-edge arrays:
Boykov-Kolmogorov-style search trees and Dinic's blocking flow. Measured on
the ray graphs built here, the search trees win on 2D ray rings (each ray
has 2 neighbors, so orphan cascades stay narrow) while blocking flow wins
on the denser 3D lattices (degree-6 neighborhoods fan the adoption step
out); ``method="auto"`` picks by arc density. Infinite capacities are
replaced by a per-graph sentinel of (sum of finite capacities) + 1, which
no finite cut can reach. ``brute_force_min_cut`` is the independent oracle
used by the equivalence suite.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import (bk_maxflow, dinic_maxflow, residual_backward_reach,
                       residual_forward_reach)
from .errors import InfiniteFlow, TooLarge

RESIDUAL_EPS = 1e-11


@dataclass
class FlowNetwork:
    num_nodes: int
    arc_u: np.ndarray
    arc_v: np.ndarray
    arc_cap: np.ndarray   # float64, np.inf allowed
    source: int
    sink: int

    def __post_init__(self):
        self.arc_u = np.asarray(self.arc_u, dtype=np.int64)
        self.arc_v = np.asarray(self.arc_v, dtype=np.int64)
        self.arc_cap = np.asarray(self.arc_cap, dtype=np.float64)
        if self.source == self.sink:
            raise ValueError("source and sink must differ")
        if np.any(self.arc_cap < 0):
            raise ValueError("capacities must be nonnegative")
        if np.any(self.arc_u == self.arc_v):
            raise ValueError("self-loops are not allowed")


def from_ray_graph(g):
    return FlowNetwork(num_nodes=g.num_nodes, arc_u=g.arc_u, arc_v=g.arc_v,
                       arc_cap=g.arc_cap, source=g.source, sink=g.sink)


@dataclass
class CutResult:
    max_flow: float
    source_side: np.ndarray                 # minimal side: reachable from s in the residual
    source_side_max: np.ndarray | None = None  # maximal side: complement of nodes reaching t

    def __post_init__(self):
        self.source_side = np.asarray(self.source_side, dtype=bool)


def _residual_arrays(net):
    """Paired edge arrays + CSR adjacency; edge 2k is arc k, 2k+1 its reverse."""
    m = len(net.arc_u)
    finite = np.isfinite(net.arc_cap)
    finite_sum = float(net.arc_cap[finite].sum())
    sentinel = finite_sum + 1.0
    eto = np.empty(2 * m, dtype=np.int64)
    ecap = np.zeros(2 * m, dtype=np.float64)
    eto[0::2] = net.arc_v
    eto[1::2] = net.arc_u
    ecap[0::2] = np.where(finite, net.arc_cap, sentinel)
    tails = np.empty(2 * m, dtype=np.int64)
    tails[0::2] = net.arc_u
    tails[1::2] = net.arc_v
    order = np.argsort(tails, kind="stable")
    adj_idx = order.astype(np.int64)
    counts = np.bincount(tails, minlength=net.num_nodes)
    adj_ptr = np.zeros(net.num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=adj_ptr[1:])
    return eto, ecap, adj_ptr, adj_idx, finite_sum


def max_flow(net, eps=RESIDUAL_EPS, method="auto"):
    """Exact max flow; raises InfiniteFlow if no finite cut separates s and t.

    method: "bk" (search trees), "dinic" (blocking flow) or "auto" (bk on
    sparse graphs, dinic above ~6 arcs per node).
    """
    eto, ecap, adj_ptr, adj_idx, finite_sum = _residual_arrays(net)
    if len(eto) == 0:
        empty = np.zeros(net.num_nodes, dtype=bool)
        side = empty.copy()
        side[net.source] = True
        side_max = np.ones(net.num_nodes, dtype=bool)
        side_max[net.sink] = False
        return CutResult(0.0, side, side_max)
    if method == "auto":
        method = "bk" if len(net.arc_u) < 6 * net.num_nodes else "dinic"
    solver = bk_maxflow if method == "bk" else dinic_maxflow
    flow = solver(net.num_nodes, net.source, net.sink,
                  eto, ecap, adj_ptr, adj_idx, eps)
    if flow > finite_sum + 0.5:
        raise InfiniteFlow("an uncuttable source-to-sink path exists")
    side = residual_forward_reach(net.num_nodes, net.source,
                                  eto, ecap, adj_ptr, adj_idx, eps).astype(bool)
    to_sink = residual_backward_reach(net.num_nodes, net.sink,
                                      eto, ecap, adj_ptr, adj_idx, eps).astype(bool)
    return CutResult(float(flow), side, ~to_sink)


def cut_capacity(net, source_side):
    """Sum of capacities of arcs leaving the given source side."""
    side = np.asarray(source_side, dtype=bool)
    crossing = side[net.arc_u] & ~side[net.arc_v]
    return float(net.arc_cap[crossing].sum())


def brute_force_min_cut(net, max_nodes=20):
    """Enumerate every source-side assignment of the non-terminal nodes.

    Returns the minimum cut value with the lexicographically smallest
    minimizing set (ordered by node id). Oracle use only.
    """
    others = np.array([i for i in range(net.num_nodes)
                       if i not in (net.source, net.sink)], dtype=np.int64)
    n = len(others)
    if n > max_nodes:
        raise TooLarge(f"{n} non-terminal nodes; brute force capped at {max_nodes}")
    slot = -np.ones(net.num_nodes, dtype=np.int64)
    slot[others] = np.arange(n)

    finite = np.isfinite(net.arc_cap)
    sentinel = float(net.arc_cap[finite].sum()) + 1.0
    caps = np.where(finite, net.arc_cap, sentinel)

    subsets = np.arange(1 << n, dtype=np.int64)
    total = np.zeros(1 << n, dtype=np.float64)
    for u, v, c in zip(net.arc_u, net.arc_v, caps):
        if u == net.sink or v == net.source:
            continue  # arcs into the source / out of the sink never cross
        u_in = np.ones_like(subsets, dtype=bool) if u == net.source \
            else (subsets >> slot[u]) & 1 == 1
        v_in = np.zeros_like(subsets, dtype=bool) if v == net.sink \
            else (subsets >> slot[v]) & 1 == 1
        total += c * (u_in & ~v_in)

    best = total.min()
    minimizers = np.flatnonzero(total <= best)
    # lexicographic order over membership tuples (node others[0] first)
    keys = np.zeros_like(minimizers)
    for i in range(n):
        keys = (keys << 1) | ((minimizers >> i) & 1)
    pick = int(minimizers[np.argmin(keys)])

    side = np.zeros(net.num_nodes, dtype=bool)
    side[net.source] = True
    for i in range(n):
        if (pick >> i) & 1:
            side[others[i]] = True
    return CutResult(float(best), side)


def read_dimacs(text):
    """Parse the DIMACS dump produced by RayGraph.to_dimacs."""
    num_nodes = source = sink = None
    arc_u, arc_v, arc_cap = [], [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            num_nodes = int(parts[2])
        elif parts[0] == "n":
            if parts[2] == "s":
                source = int(parts[1]) - 1
            elif parts[2] == "t":
                sink = int(parts[1]) - 1
        elif parts[0] == "a":
            arc_u.append(int(parts[1]) - 1)
            arc_v.append(int(parts[2]) - 1)
            cap = float(parts[3])
            arc_cap.append(np.inf if cap >= 10 ** 12 else cap)
    if num_nodes is None or source is None or sink is None:
        raise ValueError("missing p/n lines")
    return FlowNetwork(num_nodes=num_nodes, arc_u=np.array(arc_u, dtype=np.int64),
                       arc_v=np.array(arc_v, dtype=np.int64),
                       arc_cap=np.array(arc_cap), source=source, sink=sink)
