"""Symmetries of the map, checked as point maps, and folding of protocol space.

A *word* is a sequence of operations written left to right and applied right
to left, as in ordinary composition.  Operations are tuples::

    ("Ry", t)   rotation about y by t        ("Rz", t)  rotation about z
    ("Syz",)    x -> -x                      ("Sxy",)   z -> -z
    ("Sxz",)    y -> -y                      ("Mz", t)  modular z-rotation
    ("M", protocol, n)   n-th power of the map (negative n: inverse)
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .geometry import geodesic_distance, random_sphere, rot_y, rot_z
from .pwi import PI, TWO_PI, Protocol, _forward, _inverse, _modular

MARGIN = 1e-6


class SymmetryId(enum.Enum):
    ReverseTime = "reverse-time"
    NegateAll = "negate-all"
    NegateGamma = "negate-gamma"
    NegateTwo = "negate-two"
    BetaGamma = "beta-gamma"
    AlphaGamma = "alpha-gamma"
    PlusMinusEquiv = "plus-minus"


def _apply_op(op, p):
    """Apply one operation; returns ``(points, margin)`` where margin tracks flip-test distances."""
    name = op[0]
    inf = np.full(p.shape[:-1], np.inf)
    if name == "Ry":
        return rot_y(p, op[1]), inf
    if name == "Rz":
        return rot_z(p, op[1]), inf
    if name in ("Syz", "Sxy", "Sxz"):
        axis = {"Syz": 0, "Sxz": 1, "Sxy": 2}[name]
        q = np.array(p, dtype=float, copy=True)
        q[..., axis] = -q[..., axis]
        return q, inf
    if name == "Mz":
        q, _, m = _modular(p, op[1])
        return q, m
    if name == "M":
        pr, n = op[1], op[2]
        margin = inf
        q = p
        for _ in range(abs(n)):
            if n > 0:
                q, _, _, m = _forward(pr, q)
            else:
                q, m = _inverse(pr, q)
            margin = np.minimum(margin, m)
        return q, margin
    raise ValueError(f"unknown operation {name!r}")


def evaluate_word(word, p):
    """Apply ``word`` to point(s) ``p``; returns ``(image, min flip-test margin)``."""
    q = np.asarray(p, dtype=float)
    margin = np.full(q.shape[:-1], np.inf)
    for op in reversed(list(word)):
        q, m = _apply_op(op, q)
        margin = np.minimum(margin, m)
    return q, margin


def apply_conjugator(word, p):
    """Apply a word of rotations, reflections and maps to point(s) ``p``."""
    return evaluate_word(word, p)[0]


def _neg(pr, a=False, b=False, g=False, g_shift=0.0):
    return Protocol(
        -pr.alpha if a else pr.alpha,
        -pr.beta if b else pr.beta,
        (-pr.gamma if g else pr.gamma) + g_shift,
    )


def identity_words(sid: SymmetryId, pr: Protocol, n=1):
    """``(left, right)`` words of the identity ``sid`` for ``n`` applications."""
    a, b, g = pr.alpha, pr.beta, pr.gamma
    lhs = [("M", pr, n)]
    if sid is SymmetryId.ReverseTime:
        c = [("Ry", g), ("Syz",)]
        return lhs, c + [("M", Protocol(b, a, g), -n)] + c
    if sid is SymmetryId.NegateAll:
        s = [("Syz",)]
        return lhs, s + [("M", _neg(pr, True, True, True), n)] + s
    if sid is SymmetryId.NegateGamma:
        s = [("Sxy",)]
        return lhs, s + [("M", _neg(pr, g=True), n)] + s
    if sid is SymmetryId.NegateTwo:
        r = [("Ry", PI)]
        return lhs, r + [("M", _neg(pr, True, True), n)] + r
    if sid is SymmetryId.BetaGamma:
        return lhs, [("M", _neg(pr, b=True, g_shift=-PI), n)]
    if sid is SymmetryId.AlphaGamma:
        r = [("Ry", PI)]
        return lhs, r + [("M", _neg(pr, a=True, g_shift=-PI), n)] + r
    if sid is SymmetryId.PlusMinusEquiv:
        l1 = [("Sxy",), ("Ry", -g), ("Mz", b), ("Ry", g), ("Syz",)]
        l2 = [("Ry", g), ("Syz",), ("Ry", g), ("Mz", a), ("Sxy",)]
        return [("M", pr, 2 * n)], l1 + [("M", pr, -2 * n + 1)] + l2
    raise ValueError(sid)


def symmetry_residual(sid: SymmetryId, pr: Protocol, n_points=1000, n_iters=5, rng=None,
                      margin=MARGIN):
    """Largest geodesic gap between the two sides of ``sid`` over random points.

    Each ``k = 1..n_iters`` is checked.  Points whose evaluation on either
    side passes within ``margin`` of a flip boundary are resampled.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    worst = 0.0
    for k in range(1, n_iters + 1):
        left, right = identity_words(sid, pr, k)
        pts = np.empty((0, 3))
        tries = 0
        while len(pts) < n_points:
            cand = random_sphere(2 * n_points, rng)
            _, m1 = evaluate_word(left, cand)
            _, m2 = evaluate_word(right, cand)
            cand = cand[(m1 > margin) & (m2 > margin)]
            pts = np.concatenate([pts, cand])[:n_points]
            tries += 1
            if tries > 50:
                raise RuntimeError(f"could not sample points away from the cuts for {sid} at {pr}")
        d = geodesic_distance(apply_conjugator(left, pts), apply_conjugator(right, pts))
        worst = max(worst, float(d.max()))
    return worst


# --------------------------------------------------------------------------
# fundamental domain
# --------------------------------------------------------------------------

def _canon(a, b, g):
    pr = Protocol(a, b, g)
    return pr.alpha, pr.beta, pr.gamma


# generators of protocol moves that leave the coverage unchanged
_MOVES = {
    "swap": lambda a, b, g: (b, a, g),
    "negate-two": lambda a, b, g: (PI - a, PI - b, g),
    "negate-gamma": lambda a, b, g: (a, b, -g),
    "beta-gamma": lambda a, b, g: (a, PI - b, g + PI),
    "alpha-gamma": lambda a, b, g: (PI - a, b, g + PI),
}

_TOL = 1e-9


def _key(t):
    return tuple(round(v / _TOL) for v in t)


def _in_wedge(a, b, g):
    return a <= PI / 2 + _TOL and b <= a + _TOL and g <= PI + _TOL


def symmetry_orbit(pr: Protocol):
    """All protocols reachable by the coverage-preserving moves, with the move word for each."""
    start = (pr.alpha, pr.beta, pr.gamma)
    seen = {_key(start): (start, ())}
    frontier = [start]
    while frontier:
        nxt = []
        for t in frontier:
            word = seen[_key(t)][1]
            for name, f in _MOVES.items():
                u = _canon(*f(*t))
                k = _key(u)
                if k not in seen:
                    seen[k] = (u, word + (name,))
                    nxt.append(u)
        frontier = nxt
    return [v for v in seen.values()]


def fold_to_fundamental(pr: Protocol):
    """Representative of ``pr`` in the wedge ``alpha <= pi/2, beta <= alpha, gamma <= pi``.

    Among the orbit members inside the wedge the one smallest in
    ``(gamma, alpha, beta)`` is returned, so the fold is idempotent and
    protocols related by a symmetry share a representative.

    Returns
    -------
    (Protocol, tuple of str)
        The folded protocol and the moves (applied left to right) that reach it.
    """
    inside = [(t, w) for t, w in symmetry_orbit(pr) if _in_wedge(*t)]
    if not inside:
        raise RuntimeError(f"no wedge representative for {pr}")
    t, w = min(inside, key=lambda tw: (_key((tw[0][2], tw[0][0], tw[0][1])), len(tw[1])))
    return Protocol(*t), w
