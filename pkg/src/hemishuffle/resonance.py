"""Rotation algebra of itineraries and the resonance branch curves.

Quaternions are scalar-first ``(q1, q2, q3, q4)``.  The rigid rotation of atom
``k`` is ``R^u(beta') R^z(alpha')`` where ``alpha'`` (``beta'``) picks up an
extra half turn when the first (second) modular step flips, and
``u = (sin gamma, 0, cos gamma)`` is the second rotation axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pwi import PI, Protocol, atom_areas


# --------------------------------------------------------------------------
# Chebyshev polynomials
# --------------------------------------------------------------------------

def chebyshev(kind, n, x):
    """``T_n(x)`` (``kind='first'``) or ``U_n(x)`` (``kind='second'``) by the three-term recurrence.

    Works elementwise on arrays.  ``U_{-1}`` is taken as 0.
    """
    if n < -1 or (n < 0 and kind != "second"):
        raise ValueError("n must be >= 0")
    if kind not in ("first", "second"):
        raise ValueError("kind must be 'first' or 'second'")
    x = np.asarray(x, dtype=float)
    if n == -1:
        return np.zeros_like(x)[()]
    p0 = np.ones_like(x)
    if n == 0:
        return p0[()]
    p1 = x.copy() if kind == "first" else 2.0 * x
    for _ in range(n - 1):
        p0, p1 = p1, 2.0 * x * p1 - p0
    return p1[()]


# --------------------------------------------------------------------------
# quaternions
# --------------------------------------------------------------------------

def qmul(p, q):
    """Hamilton product ``p q`` (rotation ``q`` first, then ``p``).

    Components run along the first axis, so ``(4, ...)`` arrays multiply
    elementwise.
    """
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def axis_quaternion(axis, theta):
    axis = np.asarray(axis, dtype=float)
    return np.concatenate([[math.cos(theta / 2)], math.sin(theta / 2) * axis])


def rotate_by(q, p):
    """Rotate point(s) ``p`` by unit quaternion ``q``."""
    w, v = q[0], np.asarray(q[1:])
    p = np.asarray(p, dtype=float)
    t = 2.0 * np.cross(v, p)
    return p + w * t + np.cross(v, t)


def rotation_angle(q):
    """Rotation angle in ``[0, pi]``; ``q`` and ``-q`` give the same value."""
    q = np.asarray(q, dtype=float)
    return (2.0 * np.arctan2(np.linalg.norm(q[1:], axis=0), np.abs(q[0])))[()]


def second_axis(gamma):
    return np.array([math.sin(gamma), 0.0, math.cos(gamma)])


def atom_quaternions(alpha, beta, gamma, atom):
    """:func:`atom_quaternion` over arrays of angles; returns shape ``(4, ...)``."""
    if atom not in (1, 2, 3, 4):
        raise ValueError("atom must be 1, 2, 3 or 4")
    a = np.asarray(alpha, dtype=float) + (PI if atom in (2, 4) else 0.0)
    b = np.asarray(beta, dtype=float) + (PI if atom in (3, 4) else 0.0)
    g = np.asarray(gamma, dtype=float)
    zero = np.zeros(np.broadcast(a, b, g).shape)
    qz = np.array([np.cos(a / 2) + zero, zero, zero, np.sin(a / 2) + zero])
    sb = np.sin(b / 2)
    qu = np.array([np.cos(b / 2) + zero, sb * np.sin(g) + zero, zero, sb * np.cos(g) + zero])
    return qmul(qu, qz)


def atom_quaternion(pr: Protocol, atom):
    """Quaternion of the rigid rotation applied to atom ``atom`` (1..4)."""
    return atom_quaternions(pr.alpha, pr.beta, pr.gamma, atom)


def parse_itinerary(text):
    """``'41^3'`` or ``'4111'`` or ``[4, 1, 1, 1]`` -> tuple of digits."""
    if isinstance(text, str):
        digits = []
        s = text.replace(" ", "")
        i = 0
        while i < len(s):
            d = s[i]
            if d not in "1234":
                raise ValueError(f"bad itinerary {text!r}")
            i += 1
            rep = 1
            if i < len(s) and s[i] == "^":
                j = i + 1
                while j < len(s) and s[j].isdigit():
                    j += 1
                if j == i + 1:
                    raise ValueError(f"bad itinerary {text!r}")
                rep = int(s[i + 1:j])
                i = j
            digits.extend([int(d)] * rep)
        out = tuple(digits)
    else:
        out = tuple(int(d) for d in text)
    if not out or any(d not in (1, 2, 3, 4) for d in out):
        raise ValueError(f"bad itinerary {text!r}")
    return out


def itinerary_quaternions(alpha, beta, gamma, itinerary):
    """Net rotation of ``itinerary`` (first digit applied first) over arrays of angles."""
    digits = parse_itinerary(itinerary)
    atoms = {d: atom_quaternions(alpha, beta, gamma, d) for d in set(digits)}
    q = atoms[digits[0]]
    for d in digits[1:]:
        q = qmul(atoms[d], q)
    return q


def itinerary_quaternion(pr: Protocol, itinerary):
    """Net rotation of an orbit visiting the atoms in ``itinerary`` order (first digit first)."""
    return itinerary_quaternions(pr.alpha, pr.beta, pr.gamma, itinerary)


def itinerary_angle(pr: Protocol, itinerary):
    return float(rotation_angle(itinerary_quaternion(pr, itinerary)))


def itinerary_41j(j):
    return (4,) + (1,) * j


def quaternion_power(q, n):
    """``q**n`` by the multiple-angle form ``(T_n(q1), U_{n-1}(q1) v)``; ``q`` must be unit."""
    q = np.asarray(q, dtype=float)
    return np.concatenate([[chebyshev("first", n, q[0])], chebyshev("second", n - 1, q[0]) * q[1:]])


# --------------------------------------------------------------------------
# the 41^j family on the alpha = beta plane
# --------------------------------------------------------------------------

def q1_41j_closed_form(alpha, gamma, j):
    """Scalar part of the ``41^j`` rotation for ``alpha = beta`` via Chebyshev polynomials."""
    x = np.cos(np.asarray(gamma) / 2) * np.sin(np.asarray(alpha) / 2)
    cg2 = np.cos(np.asarray(gamma) / 2) ** 2
    t = chebyshev("first", 2 * (j + 1), x)
    u = chebyshev("second", 2 * j, x)
    return (-1.0) ** j * (t - 2.0 * (cg2 - 1.0) * u)


def theta_41j_closed_form(alpha, gamma, j):
    """Rotation angle of itinerary ``41^j`` at protocol ``(alpha, alpha, gamma)``; accepts arrays."""
    if j < 1:
        raise ValueError("j must be >= 1")
    q1 = np.minimum(1.0, np.abs(q1_41j_closed_form(alpha, gamma, j)))
    out = 2.0 * np.arccos(q1)
    return float(out) if np.ndim(out) == 0 else out


def theta_41j_brute(alpha, gamma, j):
    """Same angle by explicit quaternion composition; accepts arrays."""
    q = itinerary_quaternions(alpha, alpha, gamma, itinerary_41j(j))
    out = rotation_angle(q)
    return float(out) if np.ndim(out) == 0 else out


def prop1_target(j):
    return 2.0 * j * PI / (2 * j + 1)


def prop1_residual(alpha, gamma, j):
    """Distance of ``theta_41^j`` from ``2 j pi / (2j + 1)``; zero on the resonant curve."""
    return abs(theta_41j_closed_form(alpha, gamma, j) - prop1_target(j))


def prop1_curve(j, n):
    """``n`` points ``(alpha, gamma)`` with ``cos(gamma/2) sin(alpha/2) = sin(pi / (2(2j+1)))``."""
    s = math.sin(PI / (2 * (2 * j + 1)))
    lo = 2.0 * math.asin(s)
    alphas = np.linspace(lo, PI, n + 2)[1:-1]
    return [(float(a), float(2.0 * math.acos(s / math.sin(a / 2)))) for a in alphas]


# --------------------------------------------------------------------------
# branch curves
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchSpec:
    """Resonance branch ``j`` on the ``left`` or ``right`` of the alpha = beta plane."""

    j: int
    side: str

    def __post_init__(self):
        if int(self.j) != self.j or self.j < 1:
            raise ValueError("j must be a positive integer")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")

    @property
    def level(self):
        return math.sin(PI / (2 * (2 * self.j + 1)))

    @property
    def origin(self):
        """Alpha at which the branch meets ``gamma = 0``."""
        base = PI / (2 * self.j + 1)
        return base if self.side == "left" else PI - base


def _branch_factor(alpha, side):
    return math.sin(alpha / 2) if side == "left" else math.cos(alpha / 2)


def branch_gamma(alpha, b: BranchSpec):
    """``gamma`` in ``(0, pi)`` on branch ``b`` at ``alpha``, or ``None`` if there is no solution.

    Left: ``sin(alpha/2) cos(gamma/2) = sin(pi / (2(2j+1)))``;
    right: the same with ``cos(alpha/2)``.
    """
    if not 0.0 < alpha < PI:
        raise ValueError("alpha must lie in (0, pi)")
    c = b.level / _branch_factor(alpha, b.side)
    if c > 1.0:
        return None
    return 2.0 * math.acos(c)


def branch_residual(alpha, gamma, b: BranchSpec):
    return abs(_branch_factor(alpha, b.side) * math.cos(gamma / 2) - b.level)


def branch_curve(b: BranchSpec, n=200):
    """Polyline ``(alpha, gamma)`` of a branch, skipping alphas with no solution."""
    out = []
    for a in np.linspace(0.0, PI, n + 2)[1:-1]:
        g = branch_gamma(float(a), b)
        if g is not None:
            out.append((float(a), g))
    return out


def branch_intersection(j_left, j_right):
    """``(alpha, gamma)`` where left branch ``j_left`` meets right branch ``j_right``."""
    sl = BranchSpec(j_left, "left").level
    sr = BranchSpec(j_right, "right").level
    alpha = 2.0 * math.atan2(sl, sr)
    gamma = branch_gamma(alpha, BranchSpec(j_left, "left"))
    return alpha, gamma


# --------------------------------------------------------------------------
# atom sizes
# --------------------------------------------------------------------------

def smallest_atom(pr: Protocol, tol=1e-9):
    """Atom ids attaining the minimal area (more than one on a tie)."""
    areas = atom_areas(pr).as_array()
    m = areas.min()
    return tuple(int(i) + 1 for i in np.flatnonzero(areas - m <= tol))


def _area_difference(i, j, alpha, beta, gamma):
    areas = atom_areas(Protocol(alpha, beta, gamma)).as_array()
    return areas[i - 1] - areas[j - 1]


def equal_area_curve_points(pair, gamma, res=181):
    """Points ``(alpha, beta)`` where atoms ``pair`` have equal area, traced on a lattice.

    Sign changes of ``A_i - A_j`` between horizontally or vertically adjacent
    lattice nodes over ``[0, pi]^2`` are located by linear interpolation.
    Exact zeros on nodes are reported as they are.
    """
    i, j = pair
    if i == j or i not in (1, 2, 3, 4) or j not in (1, 2, 3, 4):
        raise ValueError("pair must name two different atoms")
    grid = np.linspace(0.0, PI, res)
    eps = 1e-9
    # nudge the upper edge so the canonical mod-pi wrap does not fold pi to 0
    grid[-1] = PI - eps
    D = np.array([[_area_difference(i, j, a, b, gamma) for b in grid] for a in grid])
    D[np.abs(D) < 1e-12] = 0.0
    pts = []
    for ia in range(res):
        for ib in range(res):
            if D[ia, ib] == 0.0:
                pts.append((grid[ia], grid[ib]))
    for ia in range(res):
        for ib in range(res - 1):
            d0, d1 = D[ia, ib], D[ia, ib + 1]
            if d0 * d1 < 0:
                t = d0 / (d0 - d1)
                pts.append((grid[ia], grid[ib] + t * (grid[ib + 1] - grid[ib])))
    for ia in range(res - 1):
        for ib in range(res):
            d0, d1 = D[ia, ib], D[ia + 1, ib]
            if d0 * d1 < 0:
                t = d0 / (d0 - d1)
                pts.append((grid[ia] + t * (grid[ia + 1] - grid[ia]), grid[ib]))
    return sorted(set((float(a), float(b)) for a, b in pts))

