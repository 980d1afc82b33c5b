import numpy as np
import pytest

from raycut.geometry import cast_rays, circle_template, square_template
from raycut.graph import (base_exclusion_penalty, build_inter_arcs,
                          build_intra_arcs, build_ray_graph, neighbor_pairs,
                          node_weights, sample_nodes, terminal_arcs)
from raycut.mincut import from_ray_graph, max_flow, read_dimacs


@pytest.fixture(scope="module")
def circle_fan():
    return cast_rays(circle_template(256), np.zeros(2), R=8)


class TestSampleNodes:
    def test_circle_distances(self, circle_fan):
        pos = sample_nodes(circle_fan, P=4, scale_max=2.0)
        dist = np.linalg.norm(pos, axis=2)
        for p, expect in enumerate((0.5, 1.0, 1.5, 2.0)):
            assert np.allclose(dist[:, p], expect, atol=1e-3)

    def test_square_spacing_ratio(self):
        fan = cast_rays(square_template(), np.zeros(2), R=8)
        pos = sample_nodes(fan, P=10, scale_max=2.0)
        axis_spacing = np.linalg.norm(pos[0, 1] - pos[0, 0])
        diag_spacing = np.linalg.norm(pos[1, 1] - pos[1, 0])
        assert axis_spacing / diag_spacing == pytest.approx(1 / np.sqrt(2))

    def test_single_node_on_boundary(self, circle_fan):
        pos = sample_nodes(circle_fan, P=1, scale_max=1.0)
        dist = np.linalg.norm(pos, axis=2)
        assert np.allclose(dist[:, 0], circle_fan.template_dist)

    def test_seed_offset(self):
        fan = cast_rays(circle_template(64), np.array([5.0, -3.0]), R=8)
        pos = sample_nodes(fan, P=2, scale_max=1.0)
        assert np.allclose(np.linalg.norm(pos - fan.seed, axis=2)[:, 1],
                           fan.template_dist)


class TestArcFamilies:
    def test_intra_enumeration(self):
        u, v = build_intra_arcs(R=2, P=3)
        got = sorted(zip(u.tolist(), v.tolist()))
        assert got == [(1, 0), (2, 1), (4, 3), (5, 4)]

    def test_intra_p1_empty(self):
        u, v = build_intra_arcs(R=4, P=1)
        assert len(u) == 0

    def test_intra_count_formula(self):
        u, _ = build_intra_arcs(R=360, P=200)
        assert len(u) == 71_640

    def test_inter_delta0_equal_levels(self):
        pairs = np.array([[0, 1]])
        u, v = build_inter_arcs(R=2, P=3, pairs=pairs, delta_r=0)
        got = set(zip(u.tolist(), v.tolist()))
        assert got == {(0, 3), (1, 4), (2, 5), (3, 0), (4, 1), (5, 2)}

    def test_inter_clamp(self):
        pairs = np.array([[0, 1]])
        u, v = build_inter_arcs(R=2, P=3, pairs=pairs, delta_r=2)
        # node (0, 1) -> (1, max(0, 1-2)) = ray1 node0 = id 3
        assert (1, 3) in set(zip(u.tolist(), v.tolist()))

    def test_inter_count_cyclic(self):
        neighbors = [[3, 1], [0, 2], [1, 3], [2, 0]]
        pairs = neighbor_pairs(neighbors)
        u, _ = build_inter_arcs(R=4, P=2, pairs=pairs, delta_r=1)
        assert len(u) == 16


class TestWeights:
    def test_telescoping(self):
        rng = np.random.default_rng(5)
        costs = rng.uniform(0, 50, (6, 9))
        w = node_weights(costs)
        for r in range(6):
            for b in range(9):
                assert w[r, :b + 1].sum() == pytest.approx(costs[r, b], abs=1e-9)

    def test_constant_cost_only_innermost(self):
        costs = np.full((4, 5), 3.25)
        w = node_weights(costs)
        assert np.allclose(w[:, 0], 3.25)
        assert np.allclose(w[:, 1:], 0.0)

    def test_terminal_mapping(self):
        w = np.array([[-5.0, 0.0, 2.5]])
        u, v, cap = terminal_arcs(w, source=100, sink=101)
        assert (u[0], v[0], cap[0]) == (100, 0, 5.0)   # negative -> source arc
        assert (u[1], v[1], cap[1]) == (1, 101, 0.0)   # zero -> sink arc, cap 0
        assert (u[2], v[2], cap[2]) == (2, 101, 2.5)
        assert len(u) == w.size


class TestBuild:
    def build(self, delta=1, P=5, exclude=True):
        fan = cast_rays(circle_template(64), np.zeros(2), R=8)
        rng = np.random.default_rng(11)
        costs = rng.uniform(0, 10, (8, P))
        g = build_ray_graph(fan, P, 2.0, delta, costs, exclude_empty=exclude)
        return fan, costs, g

    def test_arc_count_formulas(self):
        fan, costs, g = self.build()
        R, P = g.R, g.P
        n_pairs = len(g.pairs)
        assert n_pairs == 8  # cyclic ring
        total = R * (P - 1) + 2 * n_pairs * P + R * P
        assert len(g.arc_u) == total

    def test_infinite_arcs_only_between_nodes(self):
        _, _, g = self.build()
        internal = (g.arc_u < g.source) & (g.arc_v < g.source)
        assert np.all(np.isinf(g.arc_cap[internal]))
        assert not np.any(np.isinf(g.arc_cap[~internal]))

    def test_every_node_has_one_terminal_arc(self):
        _, _, g = self.build()
        touches = np.zeros(g.R * g.P, dtype=int)
        term = (g.arc_u == g.source) | (g.arc_v == g.sink)
        for u, v in zip(g.arc_u[term], g.arc_v[term]):
            touches[v if u == g.source else u] += 1
        assert np.all(touches == 1)

    def test_base_penalty_value(self):
        _, costs, g = self.build()
        assert g.base_penalty == pytest.approx(costs.max() + 1)
        assert base_exclusion_penalty(costs) == costs.max() + 1

    def test_ray_relabeling_isomorphism(self):
        fan, costs, g = self.build(delta=1, P=3)
        R, P = fan.R, 3
        perm = np.array([3, 6, 1, 0, 7, 2, 5, 4])
        inv = np.argsort(perm)
        # permuted fan: ray i of the new fan is old ray perm[i]
        from raycut.geometry import RayFan
        fan2 = RayFan(seed=fan.seed, directions=fan.directions[perm],
                      template_dist=fan.template_dist[perm],
                      neighbors=[[int(inv[n]) for n in fan.neighbors[p]]
                                 for p in perm])
        g2 = build_ray_graph(fan2, P, 2.0, 1, costs[perm])

        def relabel(node):
            # new node (i, p) corresponds to original node (perm[i], p)
            if node >= R * P:
                return int(node)
            r, p = divmod(int(node), P)
            return int(perm[r]) * P + p

        def arc_set(gg, mapper):
            return {(mapper(u), mapper(v),
                     round(float(c), 9) if np.isfinite(c) else "inf")
                    for u, v, c in zip(gg.arc_u, gg.arc_v, gg.arc_cap)}

        assert arc_set(g, int) == arc_set(g2, relabel)


class TestDimacs:
    def test_round_trip_and_solve(self):
        fan = cast_rays(circle_template(64), np.zeros(2), R=8)
        rng = np.random.default_rng(4)
        costs = rng.uniform(0, 10, (8, 4))
        g = build_ray_graph(fan, 4, 2.0, 1, costs)
        text = g.to_dimacs()
        lines = text.splitlines()
        assert lines[0] == f"p max {g.num_nodes} {len(g.arc_u)}"
        assert f"n {g.source + 1} s" in lines
        assert f"n {g.sink + 1} t" in lines
        assert any(" 1000000000000" in ln or " 1e+12" in ln for ln in lines[3:6])

        net = read_dimacs(text)
        direct = max_flow(from_ray_graph(g))
        via_dump = max_flow(net)
        assert via_dump.max_flow == pytest.approx(direct.max_flow, abs=1e-9)
