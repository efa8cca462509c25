import numpy as np
import pytest
from pydantic import ValidationError

from packages.core.errors import DimensionMismatch
from packages.panel import demean_two_way, stack, within_transform
from packages.synthetic import DgpConfig, generate, generate_coords, region_labels
from packages.weights import build_knn, spatial_lag


def _knn(cfg, k=4):
    return build_knn(generate_coords(cfg), k, region_ids=region_labels(cfg.N))


class TestGenerate:
    def test_no_spatial_structure_reduces_to_regression(self):
        cfg = DgpConfig(
            N=20, T=3, Q=2, beta=[1.0, -2.0], theta=[0.0, 0.0], rho=0.0,
            mu_scale=0.0, nu_scale=0.0, sigma=1e-12, seed=1,
        )
        panel, _, truth = generate(cfg, _knn(cfg))
        np.testing.assert_allclose(panel.y, panel.X @ truth.beta, atol=1e-10)

    def test_two_region_closed_form(self, swap):
        cfg = DgpConfig(N=2, T=1, Q=1, beta=[1.0], theta=[0.4], rho=0.5, sigma=1e-12, seed=3)
        panel, _, truth = generate(cfg, swap)
        x = panel.X[:, 0, 0]
        signal = x * 1.0 + x[::-1] * 0.4 + truth.mu + truth.nu[0]
        inverse = np.array([[1.0, 0.5], [0.5, 1.0]]) / (1.0 - 0.25)
        np.testing.assert_allclose(panel.y[:, 0], inverse @ signal, atol=1e-10)

    def test_seeded_draws_repeat(self):
        cfg = DgpConfig(N=15, T=3, Q=2, seed=9)
        w = _knn(cfg)
        first, _, _ = generate(cfg, w)
        second, _, _ = generate(cfg, w)
        third, _, _ = generate(cfg.model_copy(update={"seed": 10}), w)
        np.testing.assert_array_equal(first.y, second.y)
        assert not np.array_equal(first.y, third.y)

    def test_demeaning_removes_both_fixed_effects(self):
        cfg = DgpConfig(N=25, T=4, Q=2, rho=0.4, mu_scale=5.0, nu_scale=5.0, sigma=1e-12, seed=2)
        w = _knn(cfg)
        panel, _, truth = generate(cfg, w)
        p = demean_two_way(panel)
        lhs = stack(p.y - truth.rho * within_transform(spatial_lag(w, p.y)))
        Z = np.hstack([stack(p.X), stack(within_transform(spatial_lag(w, p.X)))])
        delta, *_ = np.linalg.lstsq(Z, lhs, rcond=None)
        np.testing.assert_allclose(delta, np.concatenate([truth.beta, truth.theta]), atol=1e-8)

    def test_supplied_regressors_are_kept(self):
        cfg = DgpConfig(N=10, T=2, Q=1, seed=4)
        X = np.arange(20.0).reshape(10, 2)
        panel, _, _ = generate(cfg, _knn(cfg), X=X)
        np.testing.assert_array_equal(panel.X[:, :, 0], X)

    def test_labels(self):
        cfg = DgpConfig(N=3, T=2, Q=2, seed=0)
        panel, _, _ = generate(cfg, build_knn(np.eye(3)[:, :2], 1))
        assert panel.region_ids == ("r0001", "r0002", "r0003")
        assert panel.period_ids == ("1", "2")
        assert panel.var_names == ("x1", "x2")


class TestOutliers:
    def test_fraction_marks_cells(self):
        cfg = DgpConfig(N=40, T=30, Q=1, outlier_fraction=0.01, outlier_multiplier=10.0, seed=5)
        _, _, truth = generate(cfg, _knn(cfg))
        assert truth.outlier_mask.sum() == 12
        np.testing.assert_array_equal(truth.v[truth.outlier_mask], 100.0)
        np.testing.assert_array_equal(truth.v[~truth.outlier_mask], 1.0)
        assert len(truth.to_dict()["outlier_cells"]) == 12

    def test_explicit_mask(self):
        mask = np.zeros((6, 2), dtype=bool)
        mask[4, 1] = True
        cfg = DgpConfig(N=6, T=2, Q=1, outlier_mask=mask.tolist(), outlier_multiplier=3.0, seed=6)
        _, _, truth = generate(cfg, _knn(cfg, k=2))
        assert truth.to_dict()["outlier_cells"] == [[4, 1]]
        assert truth.v[4, 1] == 9.0

    def test_explicit_mask_leaves_other_draws_alone(self):
        base = DgpConfig(N=8, T=3, Q=1, seed=7)
        mask = np.zeros((8, 3), dtype=bool)
        mask[2, 0] = True
        w = _knn(base, k=2)
        clean, _, _ = generate(base, w)
        shocked, _, _ = generate(base.model_copy(update={"outlier_mask": mask.tolist()}), w)
        # periods without the outlier are unchanged
        np.testing.assert_array_equal(clean.y[:, 1:], shocked.y[:, 1:])
        assert not np.array_equal(clean.y[:, 0], shocked.y[:, 0])


class TestConfig:
    @pytest.mark.parametrize(
        "overrides",
        [
            {"rho": 1.0},
            {"rho": -1.2},
            {"sigma": 0.0},
            {"Q": 2, "beta": [1.0]},
            {"outlier_fraction": 1.0},
            {"N": 3, "T": 2, "outlier_mask": [[False, False]]},
            {"N": 1},
        ],
    )
    def test_rejects(self, overrides):
        with pytest.raises(ValidationError):
            DgpConfig(**overrides)

    def test_defaults(self):
        cfg = DgpConfig()
        np.testing.assert_array_equal(cfg.beta_vector(), [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(cfg.theta_vector(), [0.5, 0.5, 0.5])


class TestCoords:
    def test_uniform_in_unit_square(self):
        coords = generate_coords(DgpConfig(N=50, seed=1))
        assert coords.shape == (50, 2)
        assert coords.min() >= 0.0 and coords.max() <= 1.0

    def test_coordinates_seeded_apart_from_panel(self):
        a = generate_coords(DgpConfig(N=20, seed=1))
        b = generate_coords(DgpConfig(N=20, seed=1, coord_seed=2))
        np.testing.assert_array_equal(a, b)

    def test_clustered(self):
        coords = generate_coords(DgpConfig(N=60, coords="clustered", n_clusters=3, seed=4))
        assert coords.shape == (60, 2)
        assert np.all(np.isfinite(coords))


class TestShapes:
    def test_weight_size_mismatch(self, swap):
        with pytest.raises(DimensionMismatch):
            generate(DgpConfig(N=5, T=2, Q=1), swap)

    def test_regressor_shape_mismatch(self):
        cfg = DgpConfig(N=10, T=2, Q=2, seed=1)
        with pytest.raises(DimensionMismatch):
            generate(cfg, _knn(cfg), X=np.zeros((10, 2, 3)))
