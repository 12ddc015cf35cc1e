"""Spherical primitives on the unit sphere.

Points are plain ``numpy`` arrays of shape ``(3,)`` or ``(n, 3)`` holding
``(x, y, z)``.  The ``y`` axis is vertical and the working domain is the
lower hemisphere ``y <= 0``.  All angles are radians.

Rotation conventions (right-handed)::

    R^z_t : (x, y, z) -> (x cos t - y sin t,  x sin t + y cos t,  z)
    R^y_t : (x, y, z) -> (x cos t + z sin t,  y,  -x sin t + z cos t)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SQRT2 = np.sqrt(2.0)


def normalize(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def rot_z(p, theta):
    """Rotate point(s) about the z axis by ``theta``."""
    p = np.asarray(p, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([x * c - y * s, x * s + y * c, z], axis=-1)


def rot_y(p, theta):
    """Rotate point(s) about the y axis by ``theta``."""
    p = np.asarray(p, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([x * c + z * s, y, -x * s + z * c], axis=-1)


def rotate_about(p, axis, theta):
    """Rotate point(s) ``p`` by ``theta`` about the unit vector ``axis``.

    Rodrigues' formula; right-handed.  ``axis`` must already be unit length.
    """
    p = np.asarray(p, dtype=float)
    k = np.asarray(axis, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    kxp = np.cross(k, p)
    kdp = np.sum(p * k, axis=-1, keepdims=True)
    return p * c + kxp * s + k * kdp * (1.0 - c)


def geodesic_distance(p, q):
    """Great-circle distance between unit vectors (atan2 form, stable at 0 and pi)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    cr = np.linalg.norm(np.cross(p, q), axis=-1)
    dt = np.sum(p * q, axis=-1)
    return np.arctan2(cr, dt)


def random_sphere(n, rng, lower=True):
    """``n`` uniformly distributed points, folded into the lower hemisphere if ``lower``."""
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if lower:
        v[:, 1] = -np.abs(v[:, 1])
    return v


# --------------------------------------------------------------------------
# Lambert azimuthal equal-area projection centred on -y
# --------------------------------------------------------------------------

def lambert_project(p):
    """Project unit vector(s) to the Lambert plane ``(X, Z)``.

    The lower hemisphere lands in the disk of radius ``sqrt(2)``.

    Raises
    ------
    ValueError
        If any input is the antipode ``(0, 1, 0)`` of the projection centre.
    """
    p = np.asarray(p, dtype=float)
    denom = 1.0 - p[..., 1]
    if np.any(denom <= 1e-15):
        raise ValueError("cannot project the point (0, 1, 0)")
    k = np.sqrt(2.0 / denom)
    return np.stack([k * p[..., 0], k * p[..., 2]], axis=-1)


def lambert_unproject(q):
    """Inverse of :func:`lambert_project`.

    Raises
    ------
    ValueError
        If ``X**2 + Z**2 > 4`` for any input.
    """
    q = np.asarray(q, dtype=float)
    X, Z = q[..., 0], q[..., 1]
    r2 = X * X + Z * Z
    if np.any(r2 > 4.0 + 1e-12):
        raise ValueError("planar point outside the disk of radius 2")
    k = np.sqrt(np.clip(1.0 - r2 / 4.0, 0.0, None))
    return np.stack([k * X, -1.0 + r2 / 2.0, k * Z], axis=-1)


@dataclass(frozen=True)
class EqualAreaGrid:
    """Tracer grid: a ``res x res`` lattice on ``[-1, 1]^2`` clipped to the unit disk.

    Row ``i`` runs from ``Z = +1`` (top) down to ``Z = -1``; column ``j`` from
    ``X = -1`` to ``X = +1``.  This is the view from below with ``+z`` up.
    ``points`` and ``planar`` are listed in row-major order of the in-disk cells.
    """

    res: int
    mask: np.ndarray      # (res, res) bool, True inside the unit disk
    planar: np.ndarray    # (n, 2) unit-disk coordinates (X, Z)
    points: np.ndarray    # (n, 3) points on the lower hemisphere

    @property
    def size(self):
        return len(self.points)

    @property
    def spacing(self):
        return 2.0 / (self.res - 1)

    def to_raster(self, values, fill=0):
        """Scatter per-point ``values`` back into a ``(res, res)`` image."""
        values = np.asarray(values)
        out = np.full((self.res, self.res) + values.shape[1:], fill, dtype=values.dtype)
        out[self.mask] = values
        return out


@lru_cache(maxsize=8)
def equal_area_grid(res):
    """Build (and cache) the equal-area tracer grid of resolution ``res``."""
    res = int(res)
    if res < 2:
        raise ValueError("res must be >= 2")
    u = np.linspace(-1.0, 1.0, res)
    Xg, Zg = np.meshgrid(u, u[::-1])
    mask = Xg * Xg + Zg * Zg <= 1.0
    planar = np.stack([Xg[mask], Zg[mask]], axis=-1)
    points = lambert_unproject(planar * SQRT2)
    # rim points can pick up y = +1 ulp from roundoff
    points[:, 1] = np.minimum(points[:, 1], 0.0)
    points = np.ascontiguousarray(points)
    for arr in (mask, planar, points):
        arr.setflags(write=False)
    return EqualAreaGrid(res, mask, planar, points)


# --------------------------------------------------------------------------
# Great-circle arcs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GreatArc:
    """Segment of a great circle from ``a`` to ``b`` passing through ``hint``.

    ``normal`` is oriented so the arc is traversed counter-clockwise about it,
    which puts the arc at angles ``[0, span]`` in the in-plane basis
    ``(a, normal x a)``.
    """

    a: np.ndarray
    b: np.ndarray
    hint: np.ndarray
    normal: np.ndarray
    span: float

    @classmethod
    def through(cls, a, hint, b):
        a, hint, b = normalize(a), normalize(hint), normalize(b)
        n = normalize(np.cross(a, hint))
        v = np.cross(n, a)
        span = float(np.arctan2(b @ v, b @ a) % (2.0 * np.pi))
        return cls(a, b, hint, n, span)

    def transformed(self, f):
        """Image of the arc under an isometry ``f`` acting on points."""
        return GreatArc.through(f(self.a), f(self.hint), f(self.b))

    def sample(self, n):
        """``n`` points evenly spaced along the arc, endpoints included."""
        t = np.linspace(0.0, self.span, n)[:, None]
        v = np.cross(self.normal, self.a)
        return np.cos(t) * self.a + np.sin(t) * v

    def kernel_row(self):
        """Flat 15-vector ``(n, a, b, v, w)`` used by the marking kernels.

        A point's foot lies on the arc iff ``p.v >= 0`` and ``p.w >= 0``;
        valid for ``span <= pi``.
        """
        if self.span > np.pi + 1e-12:
            raise ValueError("kernel arcs must not exceed a semicircle")
        v = np.cross(self.normal, self.a)
        w = np.sin(self.span) * self.a - np.cos(self.span) * v
        return np.concatenate([self.normal, self.a, self.b, v, w])


def arc_distance(p, arc):
    """Geodesic distance from point(s) ``p`` to the arc segment."""
    p = np.asarray(p, dtype=float)
    n = arc.normal
    v = np.cross(n, arc.a)
    d_n = p @ n
    pu, pv = p @ arc.a, p @ v
    proj = np.hypot(pu, pv)
    d_circle = np.arctan2(np.abs(d_n), proj)
    theta = np.arctan2(pv, pu) % (2.0 * np.pi)
    inside = theta <= arc.span + 1e-15
    d_end = np.minimum(geodesic_distance(p, arc.a), geodesic_distance(p, arc.b))
    # a pole of the circle is equidistant from every point of it
    d = np.where(inside, d_circle, d_end)
    return np.where(proj < 1e-15, np.pi / 2, d)
