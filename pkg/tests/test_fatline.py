import math

import numpy as np
import pytest

from hemishuffle.fatline import (
    FatParams,
    PALETTE,
    advect_checkpoints,
    advect_field,
    completeness_probe,
    coverage,
    initial_field,
    mark_full_sphere,
    mark_point,
    mark_points,
    render_eset,
    x_crossing_fraction,
)
from hemishuffle.geometry import equal_area_grid, random_sphere
from hemishuffle.pwi import Protocol, build_cut_arcs, full_sphere_cut_arcs

PR = Protocol.from_degrees(57, 57, 120)


def test_fat_params_validation():
    with pytest.raises(ValueError):
        FatParams(0.0, 10)
    with pytest.raises(ValueError):
        FatParams(0.01, -1)
    fp = FatParams(0.01, 3)
    assert fp.sin_eps == pytest.approx(math.sin(0.01))


def test_mark_point_on_and_off_cut():
    cuts = build_cut_arcs(PR)
    p = cuts.d1[0].sample(5)[2]
    assert mark_point(p, PR, cuts, FatParams(1e-6, 5)) == 0
    idle = Protocol(0.0, 0.0, 1.0)
    assert mark_point(np.array([0.3, -0.9, 0.3]) / np.linalg.norm([0.3, -0.9, 0.3]), idle, None,
                      FatParams(1e-3, 50)) is None


def test_marking_monotone_in_n_and_eps():
    g = equal_area_grid(120)
    f1 = mark_points(g.points, PR, FatParams(0.01, 200), threads=1)
    f2 = mark_points(g.points, PR, FatParams(0.01, 400), threads=1)
    f3 = mark_points(g.points, PR, FatParams(0.02, 200), threads=1)
    assert np.all((f1 >= 0) <= (f2 >= 0))
    assert np.all((f1 >= 0) <= (f3 >= 0))
    # prefix property: first hits within 200 iterations agree
    np.testing.assert_array_equal(f1, np.where((f2 >= 0) & (f2 <= 200), f2, -1))


def test_coverage_grid_outputs():
    cg = render_eset(PR, FatParams(0.01, 100), res=80, threads=1)
    img = cg.raster()
    assert img.shape == (80, 80) and img.dtype == np.uint8
    assert set(np.unique(img)) <= {0, 255}
    assert 0 < cg.phi <= 1
    assert cg.phi == pytest.approx(np.mean(cg.first_hit >= 0))
    assert cg.hit_until(0).sum() <= cg.hit.sum()
    fh = cg.first_hit_raster()
    assert fh.dtype == np.uint16 and fh.max() == cg.last_hit + 1
    assert coverage(PR, FatParams(0.01, 100), res=80, threads=1) == cg.phi


def test_identity_coverage_is_tiny():
    phi = coverage(Protocol(0.0, 0.0, 0.5), FatParams(0.01, 200), res=200, threads=1)
    assert phi < 0.05


def test_probe_contract():
    fp = FatParams(0.01, 100)
    r = completeness_probe(PR, fp, 80, 50, threads=1)
    assert r.last_new_hit <= r.last_raw_hit <= fp.iters
    assert r.complete == (r.last_new_hit == 0 or fp.iters - r.last_new_hit >= 50)
    huge = completeness_probe(PR, fp, 80, 10**6, threads=1)
    assert huge.complete == (huge.last_new_hit == 0)
    with pytest.raises(ValueError):
        completeness_probe(PR, fp, 80, 0)


def test_initial_fields():
    g = equal_area_grid(51)
    h = initial_field("horizontal", g)
    assert len(np.unique(h.values, axis=0)) == 2
    b = initial_field("both", g)
    assert len(np.unique(b.values, axis=0)) == 4
    img = np.zeros((10, 10, 3), dtype=np.uint8)
    img[:, 5:] = 200
    f = initial_field("image", g, img)
    assert set(np.unique(f.values)) == {0, 200}
    with pytest.raises(ValueError):
        initial_field("image", g)
    with pytest.raises(ValueError):
        initial_field("plaid", g)


def test_advection():
    g = equal_area_grid(101)
    f0 = initial_field("vertical", g)
    np.testing.assert_array_equal(advect_field(PR, f0, 0).values, f0.values)
    f1 = advect_field(PR, f0, 5, threads=1)
    assert f1.values.shape == f0.values.shape
    # measure is preserved, so colour fractions stay close
    frac0 = np.mean(np.all(f0.values == PALETTE[0], axis=1))
    frac1 = np.mean(np.all(f1.values == PALETTE[0], axis=1))
    assert abs(frac0 - frac1) < 0.03
    cps = advect_checkpoints(PR, f0, [5, 0], threads=1)
    assert [n for n, _ in cps] == [0, 5]
    np.testing.assert_array_equal(cps[1][1].values, f1.values)
    with pytest.raises(ValueError):
        advect_field(PR, f0, -1)


def test_x_crossing_fraction_barrier():
    rng = np.random.default_rng(0)
    assert x_crossing_fraction(Protocol.from_degrees(90, 60, 90), 2000, 200, rng, threads=1) == 0.0
    assert x_crossing_fraction(Protocol.from_degrees(60, 60, 90), 2000, 200, rng, threads=1) > 0.1


def test_full_sphere_marking_mirrors_hemisphere():
    pr = PR
    fp = FatParams(1e-3, 300)
    g = equal_area_grid(60)
    lower = g.points
    upper = lower * np.array([-1.0, -1.0, 1.0])
    hemi = mark_points(lower, pr, fp, threads=1) >= 0
    up = mark_full_sphere(upper, pr, fp) >= 0
    down = mark_full_sphere(lower, pr, fp) >= 0
    assert np.mean(down == hemi) > 0.99
    assert np.mean(up == hemi) > 0.99
    assert len(full_sphere_cut_arcs(pr)) == 2 * len(build_cut_arcs(pr).arcs)
