import math

import numpy as np
import pytest

from hemishuffle.pwi import Protocol, atom_areas, map_forward
from hemishuffle.geometry import random_sphere
from hemishuffle.pwi import atom_labels
from hemishuffle.resonance import (
    BranchSpec,
    atom_quaternion,
    branch_curve,
    branch_gamma,
    branch_intersection,
    chebyshev,
    equal_area_curve_points,
    itinerary_angle,
    itinerary_quaternion,
    parse_itinerary,
    prop1_curve,
    prop1_target,
    q1_41j_closed_form,
    qmul,
    quaternion_power,
    rotate_by,
    rotation_angle,
    smallest_atom,
    theta_41j_brute,
    theta_41j_closed_form,
)


def test_chebyshev_values():
    x = np.linspace(-1, 1, 11)
    t = np.arccos(x)
    for n in range(6):
        np.testing.assert_allclose(chebyshev("first", n, x), np.cos(n * t), atol=1e-12)
    xi = x[1:-1]
    ti = np.arccos(xi)
    for n in range(6):
        np.testing.assert_allclose(chebyshev("second", n, xi), np.sin((n + 1) * ti) / np.sin(ti), atol=1e-12)
    assert chebyshev("second", -1, 0.3) == 0


def test_quaternion_basics():
    q = np.array([math.cos(0.4), 0, 0, math.sin(0.4)])
    np.testing.assert_allclose(rotate_by(q, np.array([1.0, 0, 0])), [math.cos(0.8), math.sin(0.8), 0], atol=1e-15)
    assert rotation_angle(q) == pytest.approx(0.8)
    np.testing.assert_allclose(quaternion_power(q, 5), qmul(q, qmul(q, qmul(q, qmul(q, q)))), atol=1e-14)


def test_parse_itinerary():
    assert parse_itinerary("41^3") == (4, 1, 1, 1)
    assert parse_itinerary("4111") == (4, 1, 1, 1)
    assert parse_itinerary([2, 3]) == (2, 3)
    for bad in ("", "5", "4x", "41^"):
        with pytest.raises(ValueError):
            parse_itinerary(bad)


def test_atom_quaternions_reproduce_map():
    pr = Protocol.from_degrees(80, 40, 120)
    p = random_sphere(4000, np.random.default_rng(0))
    lab, m = atom_labels(pr, p)
    q = map_forward(pr, p)
    for k in range(1, 5):
        sel = (lab == k) & (m > 1e-9)
        img = rotate_by(atom_quaternion(pr, k), p[sel])
        assert np.max(np.abs(img - q[sel])) < 1e-12


def test_closed_form_matches_composition():
    rng = np.random.default_rng(1)
    for j in range(1, 8):
        a, g = rng.uniform(0.05, math.pi - 0.05, 2)
        assert theta_41j_closed_form(a, g, j) == pytest.approx(theta_41j_brute(a, g, j), abs=1e-10)
    q = itinerary_quaternion(Protocol(1.0, 1.0, 2.0), "41^3")
    assert abs(q[0]) == pytest.approx(abs(q1_41j_closed_form(1.0, 2.0, 3)), abs=1e-12)


def test_prop1_curve():
    for j in range(1, 8):
        for a, g in prop1_curve(j, 7):
            assert theta_41j_closed_form(a, g, j) == pytest.approx(prop1_target(j), abs=1e-9)
    assert prop1_target(1) == pytest.approx(2 * math.pi / 3)


def test_itinerary_angle_single_atom():
    pr = Protocol.from_degrees(57, 57, 120)
    assert 0 <= itinerary_angle(pr, "1") <= math.pi


def test_branch_examples():
    g = branch_gamma(math.radians(57), BranchSpec(2, "left"))
    assert math.degrees(g) == pytest.approx(99.2752, abs=1e-3)
    a, g = branch_intersection(2, 1)
    assert math.degrees(a) == pytest.approx(63.4349, abs=1e-4)
    assert math.degrees(g) == pytest.approx(108.0, abs=1e-9)
    a, g = branch_intersection(1, 1)
    assert (math.degrees(a), math.degrees(g)) == pytest.approx((90, 90))
    assert math.degrees(branch_gamma(math.pi / 2, BranchSpec(1, "left"))) == pytest.approx(90)
    assert math.degrees(branch_gamma(math.pi / 2, BranchSpec(1, "right"))) == pytest.approx(90)
    assert branch_gamma(math.radians(5), BranchSpec(1, "left")) is None
    with pytest.raises(ValueError):
        BranchSpec(0, "left")
    with pytest.raises(ValueError):
        branch_gamma(0.0, BranchSpec(1, "left"))


def test_branch_origin_and_curve():
    b = BranchSpec(3, "right")
    assert b.origin == pytest.approx(math.pi - math.pi / 7)
    assert branch_gamma(b.origin - 1e-10, b) == pytest.approx(0.0, abs=1e-4)
    pts = branch_curve(b, 50)
    assert all(0 < g < math.pi for _, g in pts)


def test_smallest_atom():
    assert smallest_atom(Protocol.from_degrees(90, 90, 90)) == (1, 2, 3, 4)
    assert smallest_atom(Protocol.from_degrees(80, 40, 120)) == (3,)
    assert smallest_atom(Protocol.from_degrees(57, 57, 120)) == (2, 3)


def test_equal_area_curve():
    pts = equal_area_curve_points((2, 3), math.radians(120), res=61)
    assert len(pts) > 0
    for a, b in pts[:10]:
        ar = atom_areas(Protocol(a, b, math.radians(120))).as_array()
        assert abs(ar[1] - ar[2]) < 0.05
