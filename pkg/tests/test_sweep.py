import numpy as np
import pytest

from hemishuffle.fatline import FatParams, coverage
from hemishuffle.pwi import Protocol
from hemishuffle.sweep import (
    CoverageMap,
    SweepSpec,
    average_coverage_curve,
    heatmap,
    lattice,
    local_minimum,
    overlay_curves,
    phi_many,
    sweep_alpha_beta,
    sweep_symmetry_plane,
)

FAST = FatParams(0.02, 60)


def test_lattice():
    np.testing.assert_allclose(lattice(0, 180, 10), np.arange(0, 181, 10))
    assert len(lattice(0, 1, 0.1)) == 11
    with pytest.raises(ValueError):
        lattice(0, 1, 0)
    with pytest.raises(ValueError):
        lattice(2, 1, 1)


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(alpha=(0, 190, 10))
    with pytest.raises(ValueError):
        SweepSpec(res=1)


def test_sweep_shape_and_values():
    spec = SweepSpec(alpha=(30, 90, 30), beta=(30, 60, 30), params=FAST, res=60)
    m = sweep_alpha_beta(120, spec, threads=2)
    assert m.phi.shape == (3, 2)
    assert m.value(60, 30) == pytest.approx(coverage(Protocol.from_degrees(60, 30, 120), FAST, 60, threads=1))
    assert m.protocol_degrees(1, 0) == (60.0, 30.0, 120.0)


def test_sweep_independent_of_threads_and_fold():
    spec = SweepSpec(alpha=(20, 160, 70), beta=(20, 160, 70), params=FAST, res=60)
    a = sweep_alpha_beta(90, spec, threads=1).phi
    b = sweep_alpha_beta(90, spec, threads=3).phi
    np.testing.assert_array_equal(a, b)
    folded = SweepSpec(alpha=(20, 160, 70), beta=(20, 160, 70), params=FAST, res=60, fold=True)
    c = sweep_alpha_beta(90, folded, threads=2).phi
    assert np.max(np.abs(a - c)) < 0.02


def test_symmetry_plane_and_average():
    spec = SweepSpec(alpha=(45, 90, 45), gamma=(60, 120, 60), params=FAST, res=50)
    m = sweep_symmetry_plane(spec, threads=1)
    assert m.phi.shape == (2, 2) and m.row_name == "gamma"
    assert m.protocol_degrees(0, 1) == (90.0, 90.0, 60.0)
    curve = average_coverage_curve([60, 90], SweepSpec(alpha=(45, 90, 45), beta=(45, 90, 45), params=FAST, res=50),
                                   threads=1)
    assert [g for g, _ in curve] == [60.0, 90.0]
    assert all(0 <= v <= 1 for _, v in curve)


def test_phi_many_order():
    prs = [Protocol.from_degrees(a, 60, 100) for a in (30, 90, 150)]
    vals = phi_many(prs, FAST, 50, threads=2)
    np.testing.assert_array_equal(vals, [coverage(p, FAST, 50, threads=1) for p in prs])


def _cmap(phi):
    phi = np.asarray(phi, dtype=float)
    rows = np.arange(phi.shape[0]) * 10.0
    cols = np.arange(phi.shape[1]) * 10.0
    return CoverageMap(phi, rows, cols, "gamma", "alpha", SweepSpec())


def test_heatmap_orientation():
    m = _cmap([[0.0, 1.0], [0.5, 0.25]])
    img = heatmap(m)
    # bottom-left pixel is row 0, col 0
    assert img[-1, 0] == 0 and img[-1, 1] == 255 and img[0, 0] == 128
    assert heatmap(m, scale=3).shape == (6, 6)


def test_overlay_does_not_modify_map():
    m = _cmap(np.full((5, 5), 0.5))
    before = m.phi.copy()
    img = overlay_curves(m, [[(0, 0), (40, 40)], [(20, 20)], [(-10, 0), (500, 0)]], scale=2)
    assert img.shape == (10, 10, 3)
    np.testing.assert_array_equal(m.phi, before)
    assert (img == [255, 0, 0]).all(axis=2).sum() > 0


def test_local_minimum():
    phi = np.ones((5, 5))
    phi[2, 2] = 0.2
    m = _cmap(phi)
    assert local_minimum(m, 20, 20)
    assert not local_minimum(m, 0, 0)
