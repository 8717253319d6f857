import numpy as np
import pytest

from qdeflect import AngularGrid
from qdeflect.angular import fourier_sine_quadrature, integrate_curve


def test_uniform_grid_properties():
    grid = AngularGrid.uniform(0.25)
    assert len(grid) == 721
    assert grid.thetas[0] == 0.0
    assert grid.thetas[-1] == np.pi
    assert grid.is_uniform
    assert grid.spans_full_range
    assert grid.sin_thetas[0] == 0.0
    assert grid.sin_thetas[-1] == 0.0  # exact, not np.sin(np.pi)


def test_validation_rejects_bad_grids():
    with pytest.raises(ValueError):
        AngularGrid(np.array([0.5]))
    with pytest.raises(ValueError):
        AngularGrid(np.array([0.5, 0.4]))
    with pytest.raises(ValueError):
        AngularGrid(np.array([-0.1, 0.5]))
    with pytest.raises(ValueError):
        AngularGrid(np.array([0.5, 3.5]))
    with pytest.raises(ValueError):
        AngularGrid.uniform(0.0)


def test_grids_are_read_only():
    grid = AngularGrid.uniform(1.0)
    with pytest.raises(ValueError):
        grid.thetas[0] = 0.3


def test_sine_quadrature_exact_for_sine_polynomials():
    grid = AngularGrid.uniform(0.5)
    t = grid.thetas
    # even harmonics integrate to zero over [0, pi]; odd ones give 2/m
    values = 0.7 * np.sin(t) - 0.2 * np.sin(3 * t) + 0.05 * np.sin(41 * t) + 0.3 * np.sin(8 * t)
    exact = 0.7 * 2.0 / 1.0 - 0.2 * 2.0 / 3.0 + 0.05 * 2.0 / 41.0
    assert fourier_sine_quadrature(grid, values) == pytest.approx(exact, rel=1e-13)


def test_sine_quadrature_requires_full_uniform_grid():
    partial = AngularGrid(np.linspace(0.2, 3.0, 100))
    with pytest.raises(ValueError):
        fourier_sine_quadrature(partial, np.ones(100))


def test_integrate_curve_simpson_fallback():
    t = np.pi * (3 * np.linspace(0, 1, 1501) ** 2 - 2 * np.linspace(0, 1, 1501) ** 3)
    t[0], t[-1] = 0.0, np.pi
    grid = AngularGrid(np.unique(t))
    values = np.sin(grid.thetas) ** 2
    assert not grid.is_uniform
    assert integrate_curve(grid, values) == pytest.approx(np.pi / 2, rel=1e-6)
