"""Coverage studies over protocol space.

Angles in :class:`SweepSpec` are degrees; lattices include both end points.
Protocols are evaluated in parallel across a thread pool (the kernels release
the GIL), and every result is stored by lattice index, so the output does not
depend on the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .fatline import SWEEP_PARAMS, FatParams, coverage
from .pwi import Protocol
from .symmetry import fold_to_fundamental


def lattice(start, stop, step):
    """``start, start + step, ...`` up to ``stop`` inclusive (tolerant to float drift)."""
    if step <= 0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("stop must not be below start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.array([start + i * step for i in range(n)], dtype=float)


@dataclass(frozen=True)
class SweepSpec:
    """Lattice and fat-line settings for a sweep (angles in degrees).

    For :func:`sweep_alpha_beta` the ``alpha`` and ``beta`` ranges are used;
    for :func:`sweep_symmetry_plane` the ``alpha`` and ``gamma`` ranges.
    """

    alpha: tuple = (0.0, 180.0, 10.0)
    beta: tuple = (0.0, 180.0, 10.0)
    gamma: tuple = (0.0, 180.0, 10.0)
    params: FatParams = SWEEP_PARAMS
    res: int = 300
    fold: bool = False

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            rng = tuple(float(v) for v in getattr(self, name))
            if len(rng) != 3:
                raise ValueError(f"{name} range must be (start, stop, step)")
            lo, hi = (0.0, 180.0) if name != "gamma" else (0.0, 360.0)
            if rng[0] < lo or rng[1] > hi:
                raise ValueError(f"{name} range must lie within [{lo}, {hi}] degrees")
            lattice(*rng)
            object.__setattr__(self, name, rng)
        if self.res < 2:
            raise ValueError("res must be >= 2")

    def alphas(self):
        return lattice(*self.alpha)

    def betas(self):
        return lattice(*self.beta)

    def gammas(self):
        return lattice(*self.gamma)


@dataclass
class CoverageMap:
    """``phi[i, j]`` over a lattice; ``rows``/``cols`` hold the axis values in degrees."""

    phi: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    row_name: str
    col_name: str
    spec: SweepSpec
    fixed: dict = field(default_factory=dict)
    degenerate: np.ndarray | None = None

    def value(self, row, col):
        i = int(np.argmin(np.abs(self.rows - row)))
        j = int(np.argmin(np.abs(self.cols - col)))
        return float(self.phi[i, j])

    def protocol_degrees(self, i, j):
        d = dict(self.fixed)
        d[self.row_name] = float(self.rows[i])
        d[self.col_name] = float(self.cols[j])
        if "beta" not in d:
            d["beta"] = d["alpha"]
        return d["alpha"], d["beta"], d["gamma"]


def phi_many(protocols, params: FatParams, res, threads=None, fold=False):
    """Coverage of each protocol, in input order.

    With ``fold`` set, protocols sharing a fundamental-domain representative
    are computed once, using the representative.
    """
    threads = _backend.resolve_threads(threads)
    protocols = list(protocols)
    if fold:
        reps = [fold_to_fundamental(p)[0] for p in protocols]
    else:
        reps = protocols
    unique = {}
    for r in reps:
        unique.setdefault(r, None)
    todo = list(unique)

    def job(pr):
        return coverage(pr, params, res, threads=1)

    if threads == 1 or len(todo) == 1:
        values = [coverage(pr, params, res, threads=threads) for pr in todo]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            values = list(ex.map(job, todo))
    unique = dict(zip(todo, values))
    return np.array([unique[r] for r in reps])


def sweep_alpha_beta(gamma, spec: SweepSpec, threads=None):
    """``phi[i_alpha, i_beta]`` at fixed ``gamma`` (degrees)."""
    al, be = spec.alphas(), spec.betas()
    prs = [Protocol.from_degrees(a, b, gamma) for a in al for b in be]
    phi = phi_many(prs, spec.params, spec.res, threads, spec.fold).reshape(len(al), len(be))
    deg = np.array([p.is_degenerate for p in prs]).reshape(phi.shape)
    return CoverageMap(phi, al, be, "alpha", "beta", spec, {"gamma": float(gamma)}, deg)


def sweep_symmetry_plane(spec: SweepSpec, threads=None):
    """``phi[i_gamma, i_alpha]`` along ``alpha = beta``."""
    ga, al = spec.gammas(), spec.alphas()
    prs = [Protocol.from_degrees(a, a, g) for g in ga for a in al]
    phi = phi_many(prs, spec.params, spec.res, threads, spec.fold).reshape(len(ga), len(al))
    deg = np.array([p.is_degenerate for p in prs]).reshape(phi.shape)
    return CoverageMap(phi, ga, al, "gamma", "alpha", spec, {}, deg)


def average_coverage_curve(gammas, spec: SweepSpec, threads=None):
    """``[(gamma, mean phi over the alpha-beta lattice), ...]`` (unweighted mean)."""
    out = []
    for g in gammas:
        m = sweep_alpha_beta(g, spec, threads)
        out.append((float(g), float(m.phi.mean())))
    return out


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

def heatmap(cmap: CoverageMap, scale=1):
    """Grey image of ``phi`` (0 black, 1 white); columns left to right, rows bottom to top."""
    g = np.clip(np.round(np.clip(cmap.phi, 0.0, 1.0) * 255.0), 0, 255).astype(np.uint8)
    g = g[::-1]
    if scale > 1:
        g = np.kron(g, np.ones((scale, scale), dtype=np.uint8))
    return g


def _to_pixel(cmap, scale, row_val, col_val):
    r0, r1 = cmap.rows[0], cmap.rows[-1]
    c0, c1 = cmap.cols[0], cmap.cols[-1]
    nr, nc = len(cmap.rows) * scale, len(cmap.cols) * scale
    fr = (row_val - r0) / (r1 - r0) if r1 > r0 else 0.0
    fc = (col_val - c0) / (c1 - c0) if c1 > c0 else 0.0
    y = (nr - 1) - fr * (nr - 1)
    x = fc * (nc - 1)
    return y, x


def overlay_curves(cmap: CoverageMap, curves, scale=4, color=(255, 0, 0), marker=(0, 160, 255)):
    """RGB heatmap with polylines drawn on top.

    ``curves`` holds sequences of ``(row_value, col_value)`` pairs in degrees;
    a single pair is drawn as a cross marker.  Points outside the lattice
    range are clipped.  ``cmap`` is not modified.
    """
    base = heatmap(cmap, scale)
    img = np.repeat(base[:, :, None], 3, axis=2).copy()
    h, w = base.shape

    def put(y, x, c):
        yi, xi = int(round(y)), int(round(x))
        if 0 <= yi < h and 0 <= xi < w:
            img[yi, xi] = c

    rlo, rhi = min(cmap.rows[0], cmap.rows[-1]), max(cmap.rows[0], cmap.rows[-1])
    clo, chi = min(cmap.cols[0], cmap.cols[-1]), max(cmap.cols[0], cmap.cols[-1])

    def inside(p):
        return rlo <= p[0] <= rhi and clo <= p[1] <= chi

    for curve in curves:
        pts = [tuple(map(float, p)) for p in curve]
        if len(pts) == 1:
            if inside(pts[0]):
                y, x = _to_pixel(cmap, scale, *pts[0])
                for d in range(-scale, scale + 1):
                    put(y + d, x, marker)
                    put(y, x + d, marker)
            continue
        for p, q in zip(pts[:-1], pts[1:]):
            if not (inside(p) and inside(q)):
                continue
            y0, x0 = _to_pixel(cmap, scale, *p)
            y1, x1 = _to_pixel(cmap, scale, *q)
            n = int(max(abs(y1 - y0), abs(x1 - x0))) + 2
            for t in np.linspace(0.0, 1.0, n):
                put(y0 + t * (y1 - y0), x0 + t * (x1 - x0), color)
    return img


def local_minimum(cmap: CoverageMap, row, col, radius=1):
    """True when the cell nearest ``(row, col)`` is strictly below its in-range neighbours."""
    i = int(np.argmin(np.abs(cmap.rows - row)))
    j = int(np.argmin(np.abs(cmap.cols - col)))
    v = cmap.phi[i, j]
    for di in range(-radius, radius + 1):
        for dj in range(-radius, radius + 1):
            if di == dj == 0:
                continue
            a, b = i + di, j + dj
            if 0 <= a < cmap.phi.shape[0] and 0 <= b < cmap.phi.shape[1]:
                if cmap.phi[a, b] <= v:
                    return False
    return True
