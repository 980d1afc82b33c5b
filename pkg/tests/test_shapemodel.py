import numpy as np
import pytest

from raycut.errors import DegenerateShape, DimensionMismatch
from raycut.geometry import cast_rays, normalize_template, star_template
from raycut.shapemodel import (ShapeModel, align_shapes, estimate_delta,
                               fit_pca, format_model, load_model, parse_model,
                               project, save_model, synthesize)


def pentagon():
    ang = np.linspace(0, 2 * np.pi, 5, endpoint=False)
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


def rot2(a):
    return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])


class TestAlign:
    def test_translation_removed(self):
        a = pentagon()
        b = pentagon() + np.array([5.0, -3.0])
        out = align_shapes([a, b])
        assert np.allclose(out[0], out[1], atol=1e-9)

    def test_rotation_removed(self):
        a = pentagon()
        b = pentagon() @ rot2(np.pi / 2).T
        out = align_shapes([a, b])
        assert np.allclose(out[0], out[1], atol=1e-9)

    def test_scale_removed(self):
        a = pentagon()
        b = 2.0 * pentagon()
        out = align_shapes([a, b])
        assert np.allclose(out[0], out[1], atol=1e-9)

    def test_unit_rms_radius(self):
        out = align_shapes([pentagon(), 3 * pentagon() + 1])
        for s in out:
            rms = np.sqrt(np.mean(np.sum(s ** 2, axis=1)))
            assert rms == pytest.approx(1.0, abs=1e-9)

    def test_degenerate(self):
        with pytest.raises(DegenerateShape):
            align_shapes([np.zeros((4, 2)), pentagon()[:4]])

    def test_count_mismatch(self):
        with pytest.raises(DimensionMismatch):
            align_shapes([pentagon(), pentagon()[:4]])

    def test_3d_alignment(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(9, 3))
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1
        b = (a @ q.T) * 1.7 + np.array([1, 2, 3.0])
        out = align_shapes([a, b])
        assert np.allclose(out[0], out[1], atol=1e-8)


class TestPca:
    def test_identical_shapes(self):
        shapes = [pentagon()] * 4
        model = fit_pca(align_shapes(shapes))
        assert np.allclose(model.eigenvalues, 0, atol=1e-18)
        aligned = align_shapes(shapes)[0]
        assert np.allclose(model.mean_landmarks(), aligned, atol=1e-9)

    def test_two_shapes_single_mode(self):
        a = pentagon()
        b = pentagon() * np.array([1.3, 0.8])
        aligned = align_shapes([a, b])
        model = fit_pca(aligned)
        assert model.n_modes == 1
        # closed-form 2-sample PCA: deviations are +-diff/2, so the sample
        # covariance (ddof=1) has the single eigenvalue ||a - b||^2 / 2
        diff = (aligned[0] - aligned[1]).ravel()
        expect_lambda = (np.linalg.norm(diff) ** 2) / 2.0
        assert model.eigenvalues[0] == pytest.approx(expect_lambda, rel=1e-9)
        direction = diff / np.linalg.norm(diff)
        dot = abs(model.modes[0] @ direction)
        assert dot == pytest.approx(1.0, abs=1e-9)

    def test_symmetric_pair_mode_direction(self):
        base = pentagon().ravel()
        v = np.zeros(10)
        v[2] = 1.0
        shapes = [(base + t * v).reshape(5, 2) for t in (-0.05, 0.05)]
        model = fit_pca(shapes)  # already corresponding; no alignment wanted
        dot = abs(model.modes[0] @ v)
        assert dot == pytest.approx(1.0, abs=1e-9)

    def test_mode_count_cap(self):
        rng = np.random.default_rng(1)
        shapes = [pentagon() + 0.01 * rng.normal(size=(5, 2)) for _ in range(7)]
        model = fit_pca(align_shapes(shapes))
        assert model.n_modes == 6  # min(N-1, L*dim) = min(6, 10)

    def test_orthonormal_and_sorted(self):
        rng = np.random.default_rng(2)
        shapes = [pentagon() + 0.05 * rng.normal(size=(5, 2)) for _ in range(5)]
        model = fit_pca(align_shapes(shapes))
        gram = model.modes @ model.modes.T
        assert np.allclose(gram, np.eye(model.n_modes), atol=1e-9)
        assert np.all(np.diff(model.eigenvalues) <= 1e-12)
        assert np.all(model.eigenvalues >= 0)

    def test_total_variance_preserved(self):
        rng = np.random.default_rng(3)
        shapes = [pentagon() + 0.05 * rng.normal(size=(5, 2)) for _ in range(4)]
        aligned = align_shapes(shapes)
        model = fit_pca(aligned)
        data = np.stack([s.ravel() for s in aligned])
        cov_trace = np.cov(data, rowvar=False, ddof=1).trace()
        assert model.eigenvalues.sum() == pytest.approx(cov_trace, abs=1e-9)


class TestSynthesize:
    @pytest.fixture()
    def model(self):
        rng = np.random.default_rng(4)
        shapes = [pentagon() + 0.05 * rng.normal(size=(5, 2)) for _ in range(4)]
        return fit_pca(align_shapes(shapes)), align_shapes(shapes)

    def test_zero_gives_mean(self, model):
        m, _ = model
        assert np.allclose(synthesize(m, np.zeros(m.n_modes)), m.mean_landmarks())

    def test_one_sigma_mode(self, model):
        m, _ = model
        b = np.zeros(m.n_modes)
        b[0] = np.sqrt(m.eigenvalues[0])
        out = synthesize(m, b)
        expect = m.mean + np.sqrt(m.eigenvalues[0]) * m.modes[0]
        assert np.allclose(out.ravel(), expect)

    def test_reconstruction_identity(self, model):
        m, aligned = model
        for shape in aligned:
            again = synthesize(m, project(m, shape))
            assert np.allclose(again, shape, atol=1e-9)

    def test_dimension_mismatch(self, model):
        m, _ = model
        with pytest.raises(DimensionMismatch):
            synthesize(m, np.zeros(m.n_modes + 1))


class TestEstimateDelta:
    def hand_model(self, displacement):
        # mean = unit square corners (max radius exactly 1), one mode moving
        # landmark 0 along +x, unit eigenvalue
        mean = np.array([[1, 1], [1, -1], [-1, -1], [-1, 1]], float) / np.sqrt(2)
        mode = np.zeros(8)
        mode[0] = 1.0
        return ShapeModel(dim=2, n_landmarks=4, mean=mean.ravel(),
                          modes=mode[None, :], eigenvalues=np.array([displacement ** 2]))

    def test_zero_variation(self):
        model = self.hand_model(0.0)
        fan = cast_rays(normalize_template(model.mean_landmarks()), np.zeros(2), R=8)
        assert estimate_delta(model, fan, P=50, scale_max=2.0, mode_sigma=1.0) == 0

    def test_exact_two_spacings(self):
        fan = cast_rays(normalize_template(
            np.array([[1, 1], [1, -1], [-1, -1], [-1, 1]], float)), np.zeros(2), R=8)
        min_spacing = float(fan.template_dist.min()) * 2.0 / 50
        model = self.hand_model(2.0 * min_spacing)
        assert estimate_delta(model, fan, P=50, scale_max=2.0, mode_sigma=1.0) == 2

    def test_sigma_monotone(self):
        fan = cast_rays(normalize_template(
            np.array([[1, 1], [1, -1], [-1, -1], [-1, 1]], float)), np.zeros(2), R=8)
        model = self.hand_model(0.037)
        deltas = [estimate_delta(model, fan, 50, 2.0, s) for s in (0.5, 1, 2, 4)]
        assert deltas == sorted(deltas)
        assert estimate_delta(model, fan, 50, 2.0, 2.0) <= \
            2 * max(1, estimate_delta(model, fan, 50, 2.0, 1.0))


class TestPersistence:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        shapes = [star_template(5, 0.5).vertices + 0.02 * rng.normal(size=(10, 2))
                  for _ in range(4)]
        model = fit_pca(align_shapes(shapes))
        path = tmp_path / "model.txt"
        save_model(model, path)
        again = load_model(path)
        assert again.dim == model.dim
        assert np.array_equal(again.mean, model.mean)
        assert np.array_equal(again.modes, model.modes)
        assert np.array_equal(again.eigenvalues, model.eigenvalues)

    def test_sections_present(self):
        model = fit_pca([pentagon(), pentagon() * 1.1])
        text = format_model(model)
        assert "mean" in text.splitlines()
        assert any(line.startswith("lambda 0") for line in text.splitlines())
        assert "mode 0" in text.splitlines()

    def test_reject_garbage(self):
        with pytest.raises(ValueError):
            parse_model("NOTAMODEL 2 3 1\n")
