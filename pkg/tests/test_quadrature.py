"""
求积节点测试
"""

import numpy as np
import pytest

from src.core.hypergeom import delta
from src.core.quadrature import (
    composite_gauss_legendre, fiber_nodes, panel_order, periodic_trapezoid, uniform_grid, x_grid,
)
from src.models.transform_models import QuadratureSpec


class TestRules:

    @pytest.mark.parametrize("n, order", [(480, 16), (320, 16), (600, 20), (36, 12), (34, 2)])
    def test_panel_order(self, n, order):
        assert panel_order(n) == order

    def test_gauss_legendre_is_exact_on_polynomials(self):
        t, w = composite_gauss_legendre(-1.0, 1.0, 32)
        assert np.sum(w * t ** 4) == pytest.approx(0.4, abs=1e-14)
        assert np.all(np.diff(t) > 0)

    def test_odd_node_count(self):
        with pytest.raises(ValueError):
            composite_gauss_legendre(0.0, 1.0, 33)

    def test_trapezoid(self):
        theta, w = periodic_trapezoid(64)
        assert np.sum(w) == pytest.approx(2 * np.pi)
        assert np.sum(w * np.cos(theta) ** 2) == pytest.approx(np.pi)


class TestGrid:

    def test_points_lie_on_hyperboloid(self, reduced_spec):
        grid = x_grid(reduced_spec)
        assert grid.points.shape == (reduced_spec.n_t * reduced_spec.n_theta, 3)
        scale = np.sum(grid.points ** 2, axis=1)
        assert np.all(np.abs(delta(grid.points) - 1.0) <= 1e-12 * scale)

    def test_total_weight(self, reduced_spec):
        grid = x_grid(reduced_spec)
        expected = 4 * np.pi * np.sinh(reduced_spec.t_max)
        assert np.sum(grid.weights) == pytest.approx(expected, rel=1e-12)

    def test_integrates_decaying_function(self, reduced_spec):
        # ∫_X (1 + x₃²)^{−2} dx = 2π ∫ sech³ t dt = π²
        grid = x_grid(reduced_spec)
        values = (1 + grid.points[:, 2] ** 2) ** -2
        assert np.sum(grid.weights * values) == pytest.approx(np.pi ** 2, rel=1e-10)

    def test_cached_and_read_only(self, reduced_spec):
        grid = x_grid(reduced_spec)
        assert x_grid(reduced_spec) is grid
        with pytest.raises(ValueError):
            grid.weights[0] = 0.0
        t, _ = fiber_nodes(reduced_spec)
        assert len(t) == reduced_spec.fiber_n
        assert fiber_nodes(reduced_spec)[0] is t

    def test_uniform_grid(self):
        assert uniform_grid(2.0, 5, 8).shape == (40, 3)


class TestSpec:

    @pytest.mark.parametrize("kwargs", [
        {"t_max": 0.0}, {"n_t": 31}, {"n_t": 33}, {"n_theta": 16}, {"fiber_n": 101}, {"fiber_t_max": -1.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureSpec(**kwargs)

    def test_doubled(self, reduced_spec):
        doubled = reduced_spec.doubled()
        assert doubled.n_t == 2 * reduced_spec.n_t
        assert doubled.n_theta == 2 * reduced_spec.n_theta
        assert doubled.fiber_n == 2 * reduced_spec.fiber_n
        assert doubled.t_max == reduced_spec.t_max

    def test_to_dict(self, reduced_spec):
        assert reduced_spec.to_dict() == {
            "t_max": 10.0, "n_t": 320, "n_theta": 128, "fiber_t_max": 12.0, "fiber_n": 192,
        }
