import math

import numpy as np
import pytest

from src.lab.geom import Segment, make_disk, make_rectangle, subtract_compact
from src.lab.grid import rasterize
from src.lab.spectral import (dirichlet_lambda1, hardy_constant, hardy_extrapolation, hardy_pencil, hardy_quotient,
                              ms_test_function, random_admissible_fields, rayleigh_quotient, richardson_lambda1)

BESSEL_J0_ZERO = 2.404825557695773


@pytest.fixture(scope='module')
def disk_grid():
    return rasterize(make_disk(0j, 1.0, label='unit-disk'), 64)


@pytest.fixture(scope='module')
def fine_disk_grid():
    return rasterize(make_disk(0j, 1.0, label='unit-disk'), 128)


@pytest.fixture(scope='module')
def disk_eigen(disk_grid):
    return dirichlet_lambda1(disk_grid)


@pytest.fixture(scope='module')
def square():
    return make_rectangle(0.0, 1.0, 0.0, 1.0, label='unit-square')


def test_disk_lambda1(disk_eigen):
    assert disk_eigen.value == pytest.approx(BESSEL_J0_ZERO ** 2, rel=2e-2)
    assert disk_eigen.residual < 1e-6


def test_disk_lambda1_fine(fine_disk_grid):
    assert dirichlet_lambda1(fine_disk_grid).value == pytest.approx(BESSEL_J0_ZERO ** 2, rel=1e-2)


def test_lambda1_scales_with_dilation(disk_eigen):
    # 半径 2、分辨率 32 的网格是单位圆盘分辨率 64 网格的精确放大
    large = dirichlet_lambda1(rasterize(make_disk(0j, 2.0), 32)).value
    assert 4.0 * large == pytest.approx(disk_eigen.value, rel=1e-3)


def test_square_lambda1(square):
    result = dirichlet_lambda1(rasterize(square, 32))
    assert result.value == pytest.approx(2.0 * math.pi ** 2, rel=1e-2)


def test_richardson_square(square):
    assert richardson_lambda1(square, 16, 32) == pytest.approx(2.0 * math.pi ** 2, rel=1e-2)


def test_richardson_disk():
    assert richardson_lambda1(make_disk(0j, 1.0), 64, 128) == pytest.approx(BESSEL_J0_ZERO ** 2, rel=3e-3)


def test_eigenfield_normalization(disk_grid, disk_eigen):
    u = disk_eigen.field.values
    assert np.sum(u * u) * disk_grid.lattice_mass == pytest.approx(1.0)
    assert np.sum(u) > 0
    assert rayleigh_quotient(disk_eigen.field) == pytest.approx(disk_eigen.value, rel=1e-6)


def test_rayleigh_quotient_bounds_lambda1(disk_grid, disk_eigen):
    for f in random_admissible_fields(disk_grid, 5, seed=3):
        assert rayleigh_quotient(f) >= disk_eigen.value * (1.0 - 1e-9)


def test_rayleigh_quotient_of_zero_field(disk_grid):
    with pytest.raises(ValueError):
        rayleigh_quotient(disk_grid.scalar_field(np.zeros(disk_grid.size)))


def test_hardy_constant_of_disk(fine_disk_grid):
    estimate = hardy_extrapolation(fine_disk_grid)
    assert estimate.extrapolated
    assert estimate.resolutions == (64, 128)
    assert estimate.constant == pytest.approx(0.5, rel=5e-2)
    # 离散束随加密单调下降，外推值位于其下方
    (_, coarse), (_, fine) = estimate.refinement()
    assert coarse > fine > estimate.constant


def test_hardy_constant_of_square(square):
    assert hardy_constant(rasterize(square, 128)) == pytest.approx(0.5, rel=5e-2)


def test_hardy_constant_is_not_clamped(disk_grid):
    estimate = hardy_extrapolation(disk_grid)
    assert hardy_constant(disk_grid) == pytest.approx(estimate.constant)
    assert hardy_pencil(disk_grid).value == pytest.approx(estimate.pencils[-1])


def test_hardy_extrapolation_low_resolution():
    estimate = hardy_extrapolation(rasterize(make_disk(0j, 1.0), 12))
    assert not estimate.extrapolated
    assert estimate.constant == pytest.approx(math.sqrt(estimate.pencils[-1]))


def test_hardy_extrapolation_rejects_finer_coarse(disk_grid):
    with pytest.raises(ValueError):
        hardy_extrapolation(disk_grid, coarse=64)


def test_hardy_inequality_with_computed_constant(fine_disk_grid):
    h = hardy_constant(fine_disk_grid)
    for f in random_admissible_fields(fine_disk_grid, 5, seed=7):
        assert (0.95 * h) ** 2 <= hardy_quotient(f)


def test_hardy_quotient_bounds_pencil():
    grid = rasterize(make_disk(0j, 1.0), 32)
    mu = hardy_pencil(grid).value
    for f in random_admissible_fields(grid, 5, seed=11):
        assert hardy_quotient(f) >= mu * (1.0 - 1e-9)


def test_slit_raises_lambda1(disk_eigen):
    slit = subtract_compact(make_disk(0j, 1.0), Segment(0j, 0.75 + 0j), label='slit-disk')
    assert dirichlet_lambda1(rasterize(slit, 64)).value > disk_eigen.value


def test_ms_test_function_without_excision(disk_grid, disk_eigen):
    result = ms_test_function(disk_grid, 0.5, 0.3, 0j)
    assert result.equilibrium is None
    assert result.quotient >= disk_eigen.value * (1.0 - 1e-9)
    assert result.evaluate(0j) == pytest.approx(1.0)
    assert result.evaluate(0.9 + 0j) == 0.0


def test_ms_test_function_vanishes_on_slit():
    slit = subtract_compact(make_disk(0j, 1.0), Segment(0j, 0.75 + 0j), label='slit-disk')
    grid = rasterize(slit, 48)
    result = ms_test_function(grid, 0.3, 0.2, 0.3 + 0j, eps=0.1)
    assert result.equilibrium is not None
    assert result.evaluate(0.3 + 0j) == 0.0
    assert result.quotient > 0.0


def test_ms_quotient_is_stable_across_resolutions():
    slit = subtract_compact(make_disk(0j, 1.0), Segment(0j, 0.75 + 0j), label='slit-disk')
    quotients = [ms_test_function(rasterize(slit, n), 0.2, 0.45, 0.3 + 0j, eps=0.5).quotient for n in (48, 96)]
    assert all(math.isfinite(q) and q > 0.0 for q in quotients)
    assert quotients[1] == pytest.approx(quotients[0], rel=0.2)


def test_ms_test_function_parameters(disk_grid):
    with pytest.raises(ValueError):
        ms_test_function(disk_grid, 1.2, 0.3, 0j)
    with pytest.raises(ValueError):
        ms_test_function(disk_grid, 0.5, 0.3, 0j, ratio=2.0)
