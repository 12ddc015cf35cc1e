import math

import numpy as np
import pytest

from hemishuffle.geometry import (
    GreatArc,
    arc_distance,
    equal_area_grid,
    geodesic_distance,
    lambert_project,
    lambert_unproject,
    random_sphere,
    rot_y,
    rot_z,
    rotate_about,
)

Z = np.array([0.0, 0.0, 1.0])
Y = np.array([0.0, 1.0, 0.0])


def test_rotate_about_examples():
    p = np.array([0.0, -1.0, 0.0])
    np.testing.assert_allclose(rotate_about(p, Z, 0.0), p)
    np.testing.assert_allclose(rotate_about(p, Z, math.pi / 2), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(rotate_about([1.0, 0, 0], Y, math.pi / 2), [0, 0, -1], atol=1e-15)


def test_rodrigues_matches_axis_rotations():
    rng = np.random.default_rng(1)
    p = random_sphere(100, rng, lower=False)
    for t in rng.uniform(-7, 7, 5):
        np.testing.assert_allclose(rotate_about(p, Z, t), rot_z(p, t), atol=1e-14)
        np.testing.assert_allclose(rotate_about(p, Y, t), rot_y(p, t), atol=1e-14)


def test_rotations_are_isometries():
    rng = np.random.default_rng(2)
    p, q = random_sphere(1000, rng, False), random_sphere(1000, rng, False)
    axis = random_sphere(1, rng, False)[0]
    d0 = geodesic_distance(p, q)
    d1 = geodesic_distance(rotate_about(p, axis, 1.234), rotate_about(q, axis, 1.234))
    assert np.max(np.abs(d0 - d1)) < 1e-12


def test_lambert_examples():
    np.testing.assert_allclose(lambert_project([0, -1, 0]), [0, 0], atol=0)
    np.testing.assert_allclose(lambert_project([1, 0, 0]), [math.sqrt(2), 0], atol=1e-15)
    np.testing.assert_allclose(lambert_project([0, 0, -1]), [0, -math.sqrt(2)], atol=1e-15)
    np.testing.assert_allclose(lambert_unproject([0, 0]), [0, -1, 0])
    np.testing.assert_allclose(lambert_unproject([math.sqrt(2), 0]), [1, 0, 0], atol=1e-15)


def test_lambert_errors():
    with pytest.raises(ValueError):
        lambert_project([0, 1, 0])
    with pytest.raises(ValueError):
        lambert_unproject([2.1, 0])


def test_lambert_roundtrip_million():
    rng = np.random.default_rng(3)
    r = math.sqrt(2) * np.sqrt(rng.uniform(0, 1, 10**6))
    t = rng.uniform(0, 2 * math.pi, 10**6)
    q = np.stack([r * np.cos(t), r * np.sin(t)], axis=1)
    p = lambert_unproject(q)
    assert np.max(np.abs(np.linalg.norm(p, axis=1) - 1)) < 1e-12
    assert np.all(p[:, 1] <= 1e-15)
    assert np.max(np.abs(lambert_unproject(lambert_project(p)) - p)) < 1e-12


def test_lambert_is_area_preserving():
    # image of a small planar square, area by the cross product of the Jacobian columns
    rng = np.random.default_rng(4)
    h = 1e-4
    r = 1.3 * np.sqrt(rng.uniform(0, 1, 10**5))
    t = rng.uniform(0, 2 * math.pi, 10**5)
    q = np.stack([r * np.cos(t), r * np.sin(t)], axis=1)
    p0 = lambert_unproject(q)
    px = lambert_unproject(q + [h, 0]) - p0
    pz = lambert_unproject(q + [0, h]) - p0
    ratio = np.linalg.norm(np.cross(px, pz), axis=1) / h**2
    assert np.max(np.abs(ratio - 1)) < 1e-4


def test_grid_small_and_lower():
    g = equal_area_grid(3)
    assert g.size == 5
    g = equal_area_grid(101)
    assert np.all(g.points[:, 1] <= 0)
    assert np.max(np.abs(np.linalg.norm(g.points, axis=1) - 1)) < 1e-12
    with pytest.raises(ValueError):
        equal_area_grid(1)


def test_grid_order_and_raster():
    g = equal_area_grid(5)
    # first in-disk point is the top centre (X = 0, Z = 1)
    np.testing.assert_allclose(g.planar[0], [0, 1])
    img = g.to_raster(np.arange(g.size), fill=-1)
    assert img.shape == (5, 5)
    assert img[0, 2] == 0 and img[0, 0] == -1


def test_grid_distortion_bound():
    n = 400
    g = equal_area_grid(n)
    full = np.full((n, n, 3), np.nan)
    full[g.mask] = g.points
    d = geodesic_distance(full[:-1, :-1].reshape(-1, 3), full[1:, 1:].reshape(-1, 3))
    assert np.nanmax(d) <= 1.05 * math.sqrt(12) * (2 / n)


def test_arc_distance_examples():
    arc = GreatArc.through([0, 0, 1], [0, -1, 0], [0, 0, -1])
    assert arc_distance(np.array([0, -1.0, 0]), arc) == pytest.approx(0, abs=1e-15)
    assert arc_distance(arc.normal, arc) == pytest.approx(math.pi / 2)
    short = GreatArc.through([0, 0, 1], [0, -math.sin(0.1), math.cos(0.1)],
                             [0, -math.sin(0.2), math.cos(0.2)])
    d = arc_distance(np.array([0, -1.0, 0]), short)
    assert d == pytest.approx(math.pi / 2 - 0.2, abs=1e-12)


def test_arc_distance_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(5):
        a, h = random_sphere(2, rng, False)
        arc = GreatArc.through(a, normalize_mid(a, h), h)
        samples = arc.sample(10**6)
        for p in random_sphere(4, rng, False):
            brute = geodesic_distance(samples, p).min()
            assert arc_distance(p, arc) == pytest.approx(brute, abs=1e-6)
            circle = math.asin(min(1.0, abs(float(p @ arc.normal))))
            assert arc_distance(p, arc) >= circle - 1e-15


def normalize_mid(a, b):
    m = a + b
    return m / np.linalg.norm(m)


def test_kernel_row_rejects_long_arcs():
    arc = GreatArc.through([1, 0, 0], [0, 0, 1], [-0.9, 0, -0.1])
    assert arc.span > math.pi
    with pytest.raises(ValueError):
        arc.kernel_row()
