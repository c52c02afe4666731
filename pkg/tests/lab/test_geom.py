import math

import numpy as np
import pytest

from src.lab.geom import (EMPTY_SET, ClosedDisk, PointCloud, Segment, SegmentUnion, Disk,
                          area, boundary_distance, diameter, inradius, make_annulus, make_disk,
                          make_polygon, make_rectangle, subtract_compact)


@pytest.fixture
def unit_disk():
    return make_disk(0j, 1.0, label='unit-disk')


@pytest.fixture
def slit_disk(unit_disk):
    return subtract_compact(unit_disk, Segment(0j, 0.75 + 0j), label='slit-disk')


def test_disk_descriptors(unit_disk):
    assert unit_disk.contains(0.5j)
    assert not unit_disk.contains(1.0 + 0j)
    assert boundary_distance(unit_disk, 0.5 + 0j) == pytest.approx(0.5)
    assert area(unit_disk) == pytest.approx(math.pi)
    assert diameter(unit_disk) == pytest.approx(2.0)
    assert inradius(unit_disk) == pytest.approx(1.0)


def test_disk_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        make_disk(0j, 0.0)
    with pytest.raises(ValueError):
        make_disk(0j, -1.0)


def test_annulus():
    annulus = make_annulus(0j, 0.5, 1.0)
    assert not annulus.contains(0j)
    assert annulus.contains(0.75 + 0j)
    assert boundary_distance(annulus, 0.75 + 0j) == pytest.approx(0.25)
    assert annulus.inradius == pytest.approx(0.25)
    assert annulus.area == pytest.approx(math.pi * 0.75)
    assert annulus.excised_sets() == [ClosedDisk(0j, 0.5)]
    with pytest.raises(ValueError):
        make_annulus(0j, 1.0, 0.5)


def test_rectangle():
    rect = make_rectangle(0.0, 2.0, 0.0, 1.0)
    assert rect.area == pytest.approx(2.0)
    assert rect.inradius == pytest.approx(0.5)
    assert rect.diameter == pytest.approx(math.sqrt(5.0))
    assert boundary_distance(rect, complex(1.0, 0.5)) == pytest.approx(0.5)
    assert boundary_distance(rect, complex(3.0, 0.5)) == 0.0


def test_polygon_square_matches_rectangle():
    square = make_polygon([0j, 1 + 0j, 1 + 1j, 1j])
    rect = make_rectangle(0.0, 1.0, 0.0, 1.0)
    assert square.area == pytest.approx(1.0)
    assert square.centroid == pytest.approx(0.5 + 0.5j)
    rng = np.random.default_rng(3)
    z = rng.uniform(-0.2, 1.2, 200) + 1j * rng.uniform(-0.2, 1.2, 200)
    np.testing.assert_allclose(square.boundary_distance(z), rect.boundary_distance(z), atol=1e-12)


def test_polygon_edge_points_are_outside():
    square = make_polygon([0j, 1 + 0j, 1 + 1j, 1j])
    assert not square.contains(0.5 + 0j)
    assert boundary_distance(square, 0.5 + 0j) == 0.0


def test_polygon_needs_three_vertices():
    with pytest.raises(ValueError):
        make_polygon([0j, 1 + 0j])


def test_slit_disk(slit_disk):
    assert not slit_disk.contains(0.5 + 0j)
    assert slit_disk.contains(0.5 + 0.1j)
    assert boundary_distance(slit_disk, 0.5 + 0.1j) == pytest.approx(0.1)
    assert slit_disk.area == pytest.approx(math.pi)
    assert slit_disk.excised_sets() == [Segment(0j, 0.75 + 0j)]


def test_subtract_compact_never_increases_distance(unit_disk):
    excised = subtract_compact(unit_disk, ClosedDisk(0.2 + 0.1j, 0.3))
    xs = np.linspace(-1.1, 1.1, 45)
    z = (xs[None, :] + 1j * xs[:, None]).ravel()
    assert np.all(excised.boundary_distance(z) <= unit_disk.boundary_distance(z))


def test_subtract_empty_set_is_neutral(unit_disk):
    same = subtract_compact(unit_disk, EMPTY_SET)
    z = np.array([0j, 0.3 + 0.4j, -0.9 + 0j, 1.5 + 0j])
    np.testing.assert_array_equal(same.contains(z), unit_disk.contains(z))
    np.testing.assert_allclose(same.boundary_distance(z), unit_disk.boundary_distance(z))
    assert same.excised_sets() == []


def test_subtract_compact_outside_box(unit_disk):
    with pytest.raises(ValueError):
        subtract_compact(unit_disk, Segment(0j, 3 + 0j))


@pytest.mark.parametrize('domain', [
    make_disk(0j, 1.0),
    make_annulus(0j, 0.5, 1.0),
    make_polygon([0j, 2 + 0j, 1 + 1.5j]),
    subtract_compact(make_disk(0j, 1.0), Segment(0j, 0.75 + 0j)),
])
def test_boundary_distance_is_lipschitz(domain):
    rng = np.random.default_rng(0)
    z = rng.uniform(-1, 1, 300) + 1j * rng.uniform(-1, 1, 300)
    w = rng.uniform(-1, 1, 300) + 1j * rng.uniform(-1, 1, 300)
    gap = np.abs(domain.boundary_distance(z) - domain.boundary_distance(w))
    assert np.all(gap <= np.abs(z - w) + 1e-12)


@pytest.mark.parametrize('domain', [
    make_disk(0.1j, 0.7),
    make_annulus(0j, 0.3, 1.0),
    make_rectangle(0.0, 2.0, 0.0, 1.0),
    make_polygon([0j, 2 + 0j, 1 + 1.5j]),
])
def test_translation_invariance(domain):
    moved = domain.translate(3.0 - 2.0j)
    assert moved.area == pytest.approx(domain.area, abs=1e-12)
    assert moved.diameter == pytest.approx(domain.diameter, abs=1e-12)
    assert moved.perimeter == pytest.approx(domain.perimeter, abs=1e-12)


def test_compact_samples_are_members():
    for compact in (Segment(-1 + 0j, 1 + 1j), ClosedDisk(0.5j, 0.25),
                    SegmentUnion((Segment(0j, 1 + 0j), Segment(2j, 2 + 2j))),
                    PointCloud((0j, 1j))):
        pts = compact.sample(32)
        assert len(pts) > 0
        assert np.all(compact.contains(pts))


def test_segment_default_sample_count():
    segment = Segment(-2 + 0j, 2 + 0j)
    assert len(segment.sample()) == 64 * 4
    # 同一 n 的采样是确定的
    np.testing.assert_array_equal(segment.sample(50), segment.sample(50))


def test_polar_sets():
    assert PointCloud((0.3 + 0j,)).is_polar
    assert EMPTY_SET.is_polar
    assert ClosedDisk(0j, 0.0).is_polar
    assert not Segment(0j, 1 + 0j).is_polar


def test_scalar_and_array_inputs(unit_disk):
    assert isinstance(unit_disk.boundary_distance(0.5 + 0j), float)
    values = unit_disk.boundary_distance(np.array([0j, 0.5 + 0j]))
    assert values.shape == (2,)


def test_disk_to_dict(unit_disk):
    assert unit_disk.to_dict() == {'type': 'disk', 'center': [0.0, 0.0], 'radius': 1.0, 'label': 'unit-disk'}
    assert isinstance(unit_disk, Disk)
