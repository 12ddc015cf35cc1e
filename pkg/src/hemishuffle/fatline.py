"""Fat-line approximation of the exceptional set.

A grid point ``x`` is marked at iteration ``n`` when ``M^-n x`` lies within
geodesic distance ``epsilon`` of the cutting arcs.  The hit set after ``N``
iterations approximates the exceptional set, and the marked fraction of the
equal-area grid is the coverage ``phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import _backend
from .geometry import SQRT2, EqualAreaGrid, equal_area_grid, lambert_project
from .pwi import (
    CutSet,
    Protocol,
    build_cut_arcs,
    full_sphere_cut_arcs,
    full_sphere_inverse,
)


@dataclass(frozen=True)
class FatParams:
    """Geodesic half-width ``epsilon`` (radians) and iteration count ``iters``."""

    epsilon: float
    iters: int

    def __post_init__(self):
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be a positive finite number")
        if self.epsilon >= math.pi / 2:
            raise ValueError("epsilon must be below pi/2")
        if int(self.iters) != self.iters or self.iters < 0:
            raise ValueError("iters must be a non-negative integer")
        object.__setattr__(self, "iters", int(self.iters))

    @property
    def sin_eps(self):
        return math.sin(self.epsilon)

    @property
    def cos_eps(self):
        return math.cos(self.epsilon)


SWEEP_PARAMS = FatParams(0.01, 500)
RENDER_PARAMS = FatParams(1e-4, 20000)


@dataclass(frozen=True)
class CoverageGrid:
    """Per-point first-hit iterations over the equal-area grid (-1 for no hit)."""

    protocol: Protocol
    params: FatParams
    grid: EqualAreaGrid
    first_hit: np.ndarray

    @property
    def res(self):
        return self.grid.res

    @property
    def hit(self):
        return self.first_hit >= 0

    @property
    def phi(self):
        return float(np.count_nonzero(self.first_hit >= 0)) / self.first_hit.size

    @property
    def last_hit(self):
        """Largest first-hit iteration, or -1 if nothing was hit."""
        return int(self.first_hit.max()) if self.first_hit.size else -1

    def hit_until(self, n):
        """Hit set after only ``n`` iterations (the marking is monotone in ``N``)."""
        return (self.first_hit >= 0) & (self.first_hit <= n)

    def raster(self):
        """8-bit image: hit black (0), miss white (255), outside the disk white."""
        img = np.where(self.hit, 0, 255).astype(np.uint8)
        return self.grid.to_raster(img, fill=255)

    def first_hit_raster(self):
        """16-bit image storing ``first_hit + 1``; 0 means not hit or outside the disk."""
        v = np.where(self.hit, self.first_hit + 1, 0).astype(np.uint16)
        return self.grid.to_raster(v, fill=0)


def _kernel_args(pr, cuts):
    if cuts is None:
        cuts = build_cut_arcs(pr)
    return pr.trig(), cuts.kernel_array()


def mark_point(p, pr: Protocol, cuts: CutSet | None, fp: FatParams):
    """First ``n <= N`` with ``M^-n p`` within ``epsilon`` of the cuts, or ``None``."""
    trig, arcs = _kernel_args(pr, cuts)
    p = np.asarray(p, dtype=float).reshape(1, 3)
    n = _backend.kernels.mark(p, trig, arcs, fp.sin_eps, fp.cos_eps, fp.iters, 1)[0]
    return None if n < 0 else int(n)


def mark_points(points, pr, fp, cuts=None, threads=None):
    """Vectorized :func:`mark_point`; returns ``int32`` first hits (-1 for none)."""
    points = np.ascontiguousarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"points must have shape (n, 3), got {points.shape}")
    trig, arcs = _kernel_args(pr, cuts)
    threads = _backend.resolve_threads(threads)
    return _backend.kernels.mark(points, trig, arcs, fp.sin_eps, fp.cos_eps, fp.iters, threads)


def render_eset(pr: Protocol, fp: FatParams = RENDER_PARAMS, res=2000, threads=None):
    """Mark every grid point and keep the first-hit iterations."""
    grid = equal_area_grid(res)
    first = mark_points(grid.points, pr, fp, threads=threads)
    return CoverageGrid(pr, fp, grid, first)


def coverage(pr: Protocol, fp: FatParams = SWEEP_PARAMS, res=500, threads=None):
    """Fraction ``phi`` of grid points marked within ``fp.iters`` iterations."""
    return render_eset(pr, fp, res, threads).phi


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of :func:`completeness_probe`.

    ``last_new_hit`` is the last iteration at which some grid point entered
    the hit set without having come within ``epsilon`` plus one grid spacing
    of the cuts at any earlier iteration, i.e. the last time the marking
    uncovered structure not already resolved at grid resolution.
    ``last_raw_hit`` is the plain maximum first-hit iteration, which also
    counts points grazing the edge of an already-found band.
    """

    complete: bool
    last_new_hit: int
    last_raw_hit: int
    window: int
    iters: int


def completeness_probe(pr: Protocol, fp: FatParams, res, window, threads=None, slack=None):
    """Heuristic completeness test for the fat-line marking.

    Complete means no new structure appeared during the final ``window``
    iterations (``iters - last_new_hit >= window``), or nothing beyond
    iteration 0 was ever found.  With ``window > iters`` the answer is
    ``False`` unless ``last_new_hit == 0``.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    grid = equal_area_grid(res)
    if slack is None:
        slack = grid.spacing
    wide = fp.epsilon + slack
    trig, arcs = _kernel_args(pr, None)
    threads = _backend.resolve_threads(threads)
    hit, near = _backend.kernels.mark_near(
        grid.points, trig, arcs, fp.sin_eps, fp.cos_eps,
        math.sin(wide), math.cos(wide), fp.iters, threads,
    )
    fresh = (hit >= 0) & (near == hit)
    last_new = int(hit[fresh].max()) if fresh.any() else 0
    last_raw = int(hit.max()) if hit.size else -1
    complete = last_new == 0 or fp.iters - last_new >= window
    return ProbeResult(complete, last_new, last_raw, int(window), fp.iters)


# --------------------------------------------------------------------------
# scalar fields
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarField:
    """One value (scalar or colour row) per in-disk grid point."""

    grid: EqualAreaGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.values) != self.grid.size:
            raise ValueError(
                f"field has {len(self.values)} values, grid has {self.grid.size} points"
            )

    def raster(self, fill=255):
        return self.grid.to_raster(self.values, fill=fill)


PALETTE = np.array(
    [[214, 39, 40], [31, 119, 180], [255, 200, 40], [44, 160, 44]], dtype=np.uint8
)


def initial_field(kind, grid: EqualAreaGrid, image=None):
    """Coloured initial condition.

    ``horizontal`` colours by the sign of ``x`` (left / right halves of the
    view), ``vertical`` by the sign of ``z`` (top / bottom), ``both`` by
    quadrant, and ``image`` samples an ``(h, w, 3)`` array over the disk.
    """
    X, Z = grid.planar[:, 0], grid.planar[:, 1]
    if kind == "horizontal":
        return ScalarField(grid, PALETTE[(X > 0).astype(int)])
    if kind == "vertical":
        return ScalarField(grid, PALETTE[(Z > 0).astype(int)])
    if kind == "both":
        return ScalarField(grid, PALETTE[(X > 0).astype(int) + 2 * (Z > 0).astype(int)])
    if kind == "image":
        if image is None:
            raise ValueError("an input image is required for kind='image'")
        img = np.asarray(image)
        if img.ndim == 2:
            img = np.repeat(img[:, :, None], 3, axis=2)
        h, w = img.shape[:2]
        col = np.clip(np.round((X + 1) / 2 * (w - 1)).astype(int), 0, w - 1)
        row = np.clip(np.round((1 - Z) / 2 * (h - 1)).astype(int), 0, h - 1)
        return ScalarField(grid, img[row, col, :3].astype(np.uint8))
    raise ValueError(f"unknown field kind {kind!r}")


def _nearest_index(grid, pts):
    tree = cKDTree(grid.planar)
    q = lambert_project(pts) / SQRT2
    return tree.query(q)[1]


def advect_field(pr: Protocol, field0: ScalarField, n, threads=None):
    """Value at ``x`` becomes ``field0`` sampled (nearest grid point) at ``M^-n x``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return ScalarField(field0.grid, field0.values.copy())
    grid = field0.grid
    threads = _backend.resolve_threads(threads)
    pts = _backend.kernels.iterate_inverse(grid.points, pr.trig(), int(n), threads)
    idx = _nearest_index(grid, pts)
    return ScalarField(grid, field0.values[idx])


def advect_checkpoints(pr, field0, checkpoints, threads=None):
    """Advected fields at each of ``checkpoints`` (each computed from the initial grid)."""
    return [(int(n), advect_field(pr, field0, int(n), threads)) for n in sorted(checkpoints)]


def x_crossing_fraction(pr: Protocol, n_points, n, rng, min_abs_x=1e-3, threads=None):
    """Fraction of random tracers (``|x| > min_abs_x``) whose sign of ``x`` differs after ``M^-n``."""
    from .geometry import random_sphere

    pts = random_sphere(4 * n_points, rng)
    pts = pts[np.abs(pts[:, 0]) > min_abs_x][:n_points]
    threads = _backend.resolve_threads(threads)
    q = _backend.kernels.iterate_inverse(pts, pr.trig(), int(n), threads)
    return float(np.mean(np.sign(q[:, 0]) != np.sign(pts[:, 0])))


# --------------------------------------------------------------------------
# full-sphere variant (numpy only; used for cross-checks)
# --------------------------------------------------------------------------

def mark_full_sphere(points, pr: Protocol, fp: FatParams):
    """Fat-line marking for the full-sphere map on arbitrary unit points."""
    from ._pykernels import RENORM_EVERY, _hits, _renorm

    arcs = np.stack([a.kernel_row() for a in full_sphere_cut_arcs(pr)])
    pts = np.array(points, dtype=float)
    out = np.full(len(pts), -1, dtype=np.int32)
    idx = np.arange(len(pts))
    for it in range(fp.iters + 1):
        if len(idx) == 0:
            break
        h = _hits(pts[:, 0], pts[:, 1], pts[:, 2], arcs, fp.sin_eps, fp.cos_eps)
        out[idx[h]] = it
        idx, pts = idx[~h], pts[~h]
        if it == fp.iters:
            break
        pts = full_sphere_inverse(pr, pts)
        if (it + 1) % RENORM_EVERY == 0:
            pts = np.stack(_renorm(pts[:, 0], pts[:, 1], pts[:, 2]), axis=1)
    return out
