import numpy as np
import pytest

from raycut.cost import (estimate_average, make_cost_params, node_cost,
                         sample_intensity)
from raycut.errors import AverageNotSet, WindowDegenerate
from raycut.field import ScalarField


def checkerboard(n=8):
    grid = (np.indices((n, n)).sum(axis=0) % 2).astype(np.float64)
    return ScalarField(grid, (1.0, 1.0))


class TestSampleIntensity:
    def test_constant(self):
        f = ScalarField(np.full((5, 5), 7.0), (1, 1))
        assert sample_intensity(f, (2.2, 3.7)) == pytest.approx(7)

    def test_ramp_midpoint(self):
        f = ScalarField(np.tile(np.arange(11.0), (3, 1)), (1, 1))
        assert sample_intensity(f, (3.5, 1.0)) == pytest.approx(3.5)

    def test_clamp_outside(self):
        f = ScalarField(np.tile(np.arange(4.0), (4, 1)), (1, 1))
        assert sample_intensity(f, (5.0, 1.0)) == pytest.approx(3.0)
        assert sample_intensity(f, (-2.0, 1.0)) == pytest.approx(0.0)

    def test_exact_at_voxel_centers(self):
        rng = np.random.default_rng(0)
        vals = rng.uniform(0, 255, (6, 7))
        f = ScalarField(vals, (0.5, 2.0))
        for j in range(6):
            for i in range(7):
                world = (i * 0.5, j * 2.0)
                assert sample_intensity(f, world) == pytest.approx(vals[j, i])

    def test_3d_trilinear(self):
        vals = np.zeros((2, 2, 2))
        vals[1, 1, 1] = 8.0
        f = ScalarField(vals, (1, 1, 1))
        assert sample_intensity(f, (0.5, 0.5, 0.5)) == pytest.approx(1.0)


class TestEstimateAverage:
    def test_constant_any_d(self):
        f = ScalarField(np.full((9, 9), 7.0), (1, 1))
        for d in (0.5, 2, 5, 20):
            assert estimate_average(f, (4, 4), d) == pytest.approx(7)

    def test_checkerboard_whole_board(self):
        f = checkerboard(8)
        # d = n-1 puts the k sample points exactly on the voxel centers,
        # so the window mean equals the direct mean over all voxels
        oracle = float(f.values.mean())
        assert oracle == pytest.approx(0.5)
        got = estimate_average(f, (3.5, 3.5), d=7.0)
        assert got == pytest.approx(oracle, abs=1e-9)

    def test_window_inside_uniform_disk(self):
        n = 64
        yy, xx = np.indices((n, n))
        disk = ((xx - 32) ** 2 + (yy - 32) ** 2 <= 15 ** 2)
        f = ScalarField(np.where(disk, 100.0, 0.0), (1, 1))
        assert estimate_average(f, (32, 32), d=8.0) == pytest.approx(100)

    def test_degenerate_window(self):
        f = ScalarField(np.zeros((4, 4)), (1, 1))
        with pytest.raises(WindowDegenerate):
            estimate_average(f, (2, 2), d=0.0)

    def test_exact_on_aligned_piecewise_constant(self):
        rng = np.random.default_rng(1)
        vals = np.repeat(np.repeat(rng.integers(0, 9, (3, 3)), 4, 0), 4, 1).astype(float)
        f = ScalarField(vals, (1.0, 1.0))
        d = vals.shape[0] - 1.0
        c = (vals.shape[0] - 1) / 2.0
        assert estimate_average(f, (c, c), d) == pytest.approx(vals.mean(), abs=1e-9)


class TestNodeCost:
    def test_zero_at_average(self):
        f = ScalarField(np.full((5, 5), 42.0), (1, 1))
        params = make_cost_params(f, (2, 2), d=2.0)
        assert node_cost(f, params, (1.0, 1.0)) == pytest.approx(0)

    def test_absolute_difference(self):
        f = ScalarField(np.full((5, 5), 60.0), (1, 1))
        params = make_cost_params(f, (2, 2), d=2.0)
        params.avg_value = 100.0
        assert node_cost(f, params, (2.0, 2.0)) == pytest.approx(40)

    def test_checkerboard_black_pixel(self):
        f = checkerboard(8)
        params = make_cost_params(f, (3.5, 3.5), d=7.0)
        assert params.avg_value == pytest.approx(0.5, abs=1e-9)
        assert node_cost(f, params, (0.0, 0.0)) == pytest.approx(0.5, abs=1e-9)

    def test_average_not_set(self):
        f = checkerboard()
        from raycut.cost import CostParams
        with pytest.raises(AverageNotSet):
            node_cost(f, CostParams(avg_window_d=2.0), (1.0, 1.0))

    def test_nonnegative_batch(self):
        rng = np.random.default_rng(2)
        f = ScalarField(rng.uniform(0, 255, (32, 32)), (1, 1))
        params = make_cost_params(f, (16, 16), d=6.0)
        pts = rng.uniform(-5, 36, (500, 2))
        assert np.all(node_cost(f, params, pts) >= 0)

    def test_intensity_shift_invariance(self):
        rng = np.random.default_rng(3)
        base = rng.uniform(0, 200, (32, 32))
        pts = rng.uniform(0, 31, (200, 2))
        f1 = ScalarField(base, (1, 1))
        f2 = ScalarField(base + 55.5, (1, 1))
        p1 = make_cost_params(f1, (16, 16), d=6.0)
        p2 = make_cost_params(f2, (16, 16), d=6.0)
        assert np.allclose(node_cost(f1, p1, pts), node_cost(f2, p2, pts), atol=1e-9)
