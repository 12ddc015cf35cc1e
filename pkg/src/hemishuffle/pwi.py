"""The two-axis hemispherical-shell piecewise isometry.

One application of the map with protocol ``(alpha, beta, gamma)`` is::

    M = R^y_gamma  Mz_beta  R^y_-gamma  Mz_alpha

where ``Mz_t`` rotates about ``z`` by ``t`` and sends any point that ends up
strictly above the equator (``y > 0``) around by a further half turn.  Points
landing exactly on ``y == 0`` are not flipped.

Atoms are labelled by the flip pattern of the two modular steps::

    1: no flip / no flip     2: flip / no flip
    3: no flip / flip        4: flip / flip
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import GreatArc, normalize, rot_y, rot_z

PI = math.pi
TWO_PI = 2.0 * math.pi
Y_TOL = 1e-12
RENORM_EVERY = 64


class AmbiguousBoundary(ValueError):
    """Raised when a point sits on a cutting arc and its atom is not defined."""


class DegenerateProtocolWarning(UserWarning):
    pass


def _wrap(angle, period):
    a = math.fmod(angle, period)
    if a < 0.0:
        a += period
    # fmod can return exactly ``period`` after the shift for tiny negatives
    if a >= period or abs(a - period) < 1e-14:
        a = 0.0
    if abs(a) < 1e-14:
        a = 0.0
    return a


@dataclass(frozen=True)
class Protocol:
    """Control triple; stored canonically with alpha, beta in [0, pi) and gamma in [0, 2 pi)."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        object.__setattr__(self, "alpha", _wrap(float(self.alpha), PI))
        object.__setattr__(self, "beta", _wrap(float(self.beta), PI))
        object.__setattr__(self, "gamma", _wrap(float(self.gamma), TWO_PI))

    @classmethod
    def from_degrees(cls, alpha, beta, gamma):
        return cls(math.radians(alpha), math.radians(beta), math.radians(gamma))

    @property
    def degrees(self):
        return tuple(math.degrees(v) for v in (self.alpha, self.beta, self.gamma))

    @property
    def is_degenerate(self):
        """Single-axis cases: a zero rotation, or parallel axes (gamma in {0, pi})."""
        return (
            self.alpha == 0.0
            or self.beta == 0.0
            or min(self.gamma, abs(self.gamma - PI), TWO_PI - self.gamma) < 1e-12
        )

    def trig(self):
        """``[cos a, sin a, cos b, sin b, cos g, sin g]`` as consumed by the kernels."""
        return np.array(
            [
                math.cos(self.alpha), math.sin(self.alpha),
                math.cos(self.beta), math.sin(self.beta),
                math.cos(self.gamma), math.sin(self.gamma),
            ]
        )

    def __str__(self):
        a, b, g = self.degrees
        return f"({a:.6g}, {b:.6g}, {g:.6g}) deg"


# --------------------------------------------------------------------------
# point maps
# --------------------------------------------------------------------------

def _check_lower(p):
    p = np.asarray(p, dtype=float)
    if np.any(p[..., 1] > Y_TOL):
        raise ValueError("points must lie in the closed lower hemisphere (y <= 0)")
    return p


def _flip(q, up):
    q = np.array(q, dtype=float, copy=True)
    q[..., 0] = np.where(up, -q[..., 0], q[..., 0])
    q[..., 1] = np.where(up, -q[..., 1], q[..., 1])
    return q


def _modular(p, theta):
    q = rot_z(p, theta)
    up = q[..., 1] > 0.0
    return _flip(q, up), up, np.abs(q[..., 1])


def _modular_inverse(p, theta):
    q = rot_z(p, -theta)
    up = q[..., 1] > 0.0
    return _flip(q, up), up, np.abs(q[..., 1])


def modular_rotate_z(p, theta):
    """Rotate about ``z`` by ``theta``; points left above the equator get an extra half turn."""
    return _modular(_check_lower(p), theta)[0]


def _forward(pr, p):
    """One forward step returning ``(image, flip1, flip2, margin)``.

    ``margin`` is the smallest ``|y|`` seen at either flip test, i.e. the
    geodesic-sine distance of ``p`` to the cutting arcs.
    """
    q, f1, m1 = _modular(p, pr.alpha)
    q = rot_y(q, -pr.gamma)
    q, f2, m2 = _modular(q, pr.beta)
    q = rot_y(q, pr.gamma)
    return q, f1, f2, np.minimum(m1, m2)


def _inverse(pr, p):
    q = rot_y(p, -pr.gamma)
    q, f2, m2 = _modular_inverse(q, pr.beta)
    q = rot_y(q, pr.gamma)
    q, f1, m1 = _modular_inverse(q, pr.alpha)
    return q, np.minimum(m1, m2)


def map_forward(pr, p):
    """Apply the map once to point(s) ``p`` in the lower hemisphere."""
    return _forward(pr, _check_lower(p))[0]


def map_inverse(pr, p):
    """Exact inverse of :func:`map_forward` off the cutting arcs."""
    return _inverse(pr, _check_lower(p))[0]


def iterate(pr, p, n, inverse=False):
    """Apply the map (or its inverse) ``n`` times, renormalizing every 64 steps."""
    q = _check_lower(p)
    step = _inverse if inverse else _forward
    for k in range(1, n + 1):
        q = step(pr, q)[0]
        if k % RENORM_EVERY == 0:
            q = normalize(q)
    return q


def forward_margin(pr, p, n):
    """Iterate ``n`` forward steps and return ``(image, min margin over the orbit)``."""
    q = _check_lower(p)
    margin = np.full(q.shape[:-1], np.inf)
    for _ in range(n):
        q, _, _, m = _forward(pr, q)
        margin = np.minimum(margin, m)
    return q, margin


def inverse_margin(pr, p, n):
    q = _check_lower(p)
    margin = np.full(q.shape[:-1], np.inf)
    for _ in range(n):
        q, m = _inverse(pr, q)
        margin = np.minimum(margin, m)
    return q, margin


# --------------------------------------------------------------------------
# atoms
# --------------------------------------------------------------------------

def gamma_prime(pr):
    """Spherical angle between the two cutting planes."""
    c = (
        math.cos(pr.gamma) * math.sin(pr.alpha) * math.sin(pr.beta)
        - math.cos(pr.alpha) * math.cos(pr.beta)
    )
    return math.acos(min(1.0, max(-1.0, c)))


@dataclass(frozen=True)
class AtomAreas:
    a1: float
    a2: float
    a3: float
    a4: float

    def as_array(self):
        return np.array([self.a1, self.a2, self.a3, self.a4])

    @property
    def total(self):
        return self.a1 + self.a2 + self.a3 + self.a4


def atom_areas(pr):
    """Closed-form atom areas in steradians (sum is exactly ``2 pi``)."""
    a, b, gp = pr.alpha, pr.beta, gamma_prime(pr)
    areas = AtomAreas(
        PI - a - b + gp,
        PI + a - b - gp,
        PI - a + b - gp,
        -PI + a + b + gp,
    )
    # acos keeps only ~1e-8 absolute accuracy near gamma' = 0 or pi
    if min(areas.as_array()) < -1e-7:
        warnings.warn(f"negative atom area for protocol {pr}", DegenerateProtocolWarning)
    return areas


def atom_labels(pr, p):
    """Atom id (1..4) of each point, plus its distance margin to the cuts."""
    p = _check_lower(p)
    _, f1, f2, margin = _forward(pr, p)
    return 1 + f1.astype(np.int64) + 2 * f2.astype(np.int64), margin


def atom_of(pr, p, tol=1e-12):
    """Atom id of a single point.

    Raises
    ------
    AmbiguousBoundary
        If ``p`` lies within ``tol`` of a cutting arc.
    """
    label, margin = atom_labels(pr, np.asarray(p, dtype=float).reshape(1, 3))
    if margin[0] <= tol:
        raise AmbiguousBoundary(f"point {p} lies on a cutting arc of {pr}")
    return int(label[0])


def monte_carlo_areas(pr, n, rng):
    """Atom areas estimated from ``n`` uniform samples (steradians)."""
    from .geometry import random_sphere

    labels, _ = atom_labels(pr, random_sphere(n, rng))
    counts = np.bincount(labels, minlength=5)[1:]
    return counts / n * TWO_PI


# --------------------------------------------------------------------------
# cutting arcs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CutSet:
    """Discontinuity arcs of one protocol: ``d1`` (first cut) and up to two ``d2`` arcs."""

    protocol: Protocol
    d1: tuple
    d2: tuple

    @property
    def arcs(self):
        return self.d1 + self.d2

    def kernel_array(self):
        if not self.arcs:
            return np.zeros((0, 15))
        return np.ascontiguousarray(np.stack([a.kernel_row() for a in self.arcs]))

    def distance(self, p):
        from .geometry import arc_distance

        p = np.asarray(p, dtype=float)
        if not self.arcs:
            return np.full(p.shape[:-1], np.inf)
        return np.min([arc_distance(p, a) for a in self.arcs], axis=0)


def _lower_semicircle(n):
    """Lower-hemisphere half of the great circle with unit normal ``n``."""
    e = normalize(np.cross(n, [0.0, 1.0, 0.0]))
    low = np.array([0.0, -1.0, 0.0]) - (-n[1]) * n
    low = normalize(low)
    return e, low, -e


def build_cut_arcs(pr):
    """Construct the cutting arcs of ``pr``.

    ``d1`` is the lower semicircle of the plane with normal
    ``(sin a, cos a, 0)``.  ``d2`` is the pre-image under the first modular
    rotation of the second cut, split where that pre-image meets the equator.
    Zero rotation angles give a reduced (possibly empty) set.
    """
    a, b, g = pr.alpha, pr.beta, pr.gamma
    d1 = ()
    if a != 0.0:
        mid = np.array([math.cos(a), -math.sin(a), 0.0])
        d1 = (GreatArc.through([0.0, 0.0, 1.0], mid, [0.0, 0.0, -1.0]),)

    d2 = ()
    if b != 0.0:
        n2 = rot_y(np.array([math.sin(b), math.cos(b), 0.0]), g)
        e0, low, e1 = _lower_semicircle(n2)
        pieces = [(e0, e1)]
        if a != 0.0:
            k = np.array([-math.sin(a), math.cos(a), 0.0])
            s = np.cross(n2, k)
            if np.linalg.norm(s) < 1e-12:
                # second cut pre-image lies entirely on the equator
                pieces = []
            else:
                s = normalize(s)
                if s[1] > 0:
                    s = -s
                if s[1] < -1e-12:
                    pieces = [(e0, s), (s, e1)]
        arcs = []
        for p0, p1 in pieces:
            if len(pieces) == 1:
                hint = low
            else:
                hint = normalize(p0 + p1)
            pre = rot_z(hint, -a)
            if pre[1] > 0.0:
                f = lambda q: _flip(rot_z(q, -a), True)
            else:
                f = lambda q: rot_z(q, -a)
            arcs.append(GreatArc.through(f(p0), f(hint), f(p1)))
        d2 = tuple(arcs)
    return CutSet(pr, d1, d2)


# --------------------------------------------------------------------------
# full-sphere extension
# --------------------------------------------------------------------------

def _sgn(y):
    return np.where(y > 0.0, 1.0, -1.0)


def full_sphere_map(pr, p):
    """Full-sphere variant: y-rotation direction follows the current hemisphere.

    ``sign(0)`` is taken as ``-1``.
    """
    q = rot_z(np.asarray(p, dtype=float), pr.alpha)
    s = _sgn(q[..., 1])
    q = _rot_y_signed(q, pr.gamma * s)
    q = rot_z(q, pr.beta)
    s = _sgn(q[..., 1])
    return _rot_y_signed(q, -pr.gamma * s)


def full_sphere_inverse(pr, p):
    q = np.asarray(p, dtype=float)
    s = _sgn(q[..., 1])
    q = _rot_y_signed(q, pr.gamma * s)
    q = rot_z(q, -pr.beta)
    s = _sgn(q[..., 1])
    q = _rot_y_signed(q, -pr.gamma * s)
    return rot_z(q, -pr.alpha)


def _rot_y_signed(p, theta):
    # theta may vary per point
    c, s = np.cos(theta), np.sin(theta)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([x * c + z * s, y, -x * s + z * c], axis=-1)


def full_sphere_cut_arcs(pr):
    """Discontinuities of the full-sphere map: the hemispherical arcs and their half-turn images."""
    base = build_cut_arcs(pr).arcs
    half_turn = lambda q: _flip(q, True)
    return base + tuple(arc.transformed(half_turn) for arc in base)
