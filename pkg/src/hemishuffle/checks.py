"""Invariant battery shared by ``hemishuffle verify`` and the test-suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import geodesic_distance, random_sphere
from .pwi import TWO_PI, Protocol, atom_areas, forward_margin, iterate, monte_carlo_areas
from .resonance import (
    BranchSpec,
    branch_gamma,
    branch_intersection,
    branch_residual,
    prop1_curve,
    prop1_target,
    theta_41j_brute,
    theta_41j_closed_form,
)
from .symmetry import SymmetryId, symmetry_residual


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}: {self.detail}"


def random_protocols(n, rng):
    """``n`` protocols with every angle at least 2 degrees away from a degenerate value."""
    out = []
    lo = math.radians(2.0)
    while len(out) < n:
        a, b = rng.uniform(lo, math.pi - lo, 2)
        g = rng.uniform(lo, TWO_PI - lo)
        if abs(g - math.pi) < lo:
            continue
        out.append(Protocol(a, b, g))
    return out


def check_symmetries(n_protocols=10, n_points=1000, n_iters=5, seed=0, tol=1e-9):
    rng = np.random.default_rng(seed)
    prs = random_protocols(n_protocols, rng)
    rows = []
    worst = 0.0
    for sid in SymmetryId:
        for pr in prs:
            r = symmetry_residual(sid, pr, n_points, n_iters, rng)
            rows.append((sid, pr, r))
            worst = max(worst, r)
    return CheckResult("symmetry", worst < tol, f"max residual {worst:.2e} (tol {tol:g})"), rows


def check_prop1(js=range(1, 8), n_curve=20, lattice=100, tol=1e-9):
    worst_curve = 0.0
    for j in js:
        for a, g in prop1_curve(j, n_curve):
            t = prop1_target(j)
            worst_curve = max(
                worst_curve,
                abs(theta_41j_closed_form(a, g, j) - t),
                abs(theta_41j_brute(a, g, j) - t),
            )
    axis = np.linspace(0.0, math.pi, lattice + 2)[1:-1]
    A, G = np.meshgrid(axis, axis)
    worst_lat = max(
        float(np.max(np.abs(theta_41j_brute(A, G, j) - theta_41j_closed_form(A, G, j)))) for j in js
    )
    ok = worst_curve < tol and worst_lat < tol
    return CheckResult(
        "prop1", ok, f"curve residual {worst_curve:.2e}, lattice agreement {worst_lat:.2e} (tol {tol:g})"
    )


def check_area_sums(n=1000, seed=0, tol=1e-12):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        a, b = rng.uniform(0, math.pi, 2)
        g = rng.uniform(0, TWO_PI)
        worst = max(worst, abs(atom_areas(Protocol(a, b, g)).total - TWO_PI))
    return CheckResult("area-sum", worst < tol, f"max |sum - 2 pi| {worst:.2e}")


def check_area_monte_carlo(n_protocols=20, samples=10**6, seed=0, frac_tol=0.005, sigmas=5.0):
    """Monte Carlo atom areas against the closed form.

    Each error must be below ``frac_tol`` of the hemisphere area and below
    ``sigmas`` binomial standard deviations.
    """
    rng = np.random.default_rng(seed)
    worst_frac = 0.0
    worst_sig = 0.0
    for pr in random_protocols(n_protocols, rng):
        exact = atom_areas(pr).as_array() / TWO_PI
        est = monte_carlo_areas(pr, samples, rng) / TWO_PI
        err = np.abs(est - exact)
        sd = np.sqrt(np.maximum(exact * (1 - exact), 1e-300) / samples)
        worst_frac = max(worst_frac, float(err.max()))
        worst_sig = max(worst_sig, float((err / sd).max()))
    ok = worst_frac < frac_tol and worst_sig < sigmas
    return CheckResult(
        "area-monte-carlo", ok,
        f"max error {100 * worst_frac:.3f}% of hemisphere, {worst_sig:.2f} sigma",
    )


def check_branches(tol_deg=1e-3):
    g57 = math.degrees(branch_gamma(math.radians(57), BranchSpec(2, "left")))
    a21, g21 = (math.degrees(v) for v in branch_intersection(2, 1))
    a11, g11 = (math.degrees(v) for v in branch_intersection(1, 1))
    a_tet = 2.0 * math.asin(0.5 / math.cos(math.radians(30)))
    g_tet = math.degrees(branch_gamma(a_tet, BranchSpec(1, "left")))
    g90l = math.degrees(branch_gamma(math.pi / 2, BranchSpec(1, "left")))
    g90r = math.degrees(branch_gamma(math.pi / 2, BranchSpec(1, "right")))
    ok = (
        abs(g57 - 99.2752) < tol_deg
        and abs(a21 - 63.4349) < 1e-4 and abs(g21 - 108.0) < 1e-6
        and abs(a11 - 90) < 1e-9 and abs(g11 - 90) < 1e-9
        and abs(math.degrees(a_tet) - 70.529) < 1e-3 and abs(g_tet - 60) < 1e-9
        and abs(g90l - 90) < 1e-9 and abs(g90r - 90) < 1e-9
    )
    sub = max(
        branch_residual(math.radians(57), math.radians(g57), BranchSpec(2, "left")),
        branch_residual(math.radians(a21), math.radians(g21), BranchSpec(1, "right")),
    )
    return CheckResult(
        "branches", ok and sub < 1e-12,
        f"left j=2 at 57: {g57:.4f}; (2,1) -> ({a21:.4f}, {g21:.6f}); "
        f"(1,1) -> ({a11:.4f}, {g11:.4f}); left j=1 at {math.degrees(a_tet):.3f} -> {g_tet:.4f}",
    )


def period15_protocol():
    a, g = branch_intersection(2, 1)
    return Protocol(a, a, g)


def check_period15(n_points=1000, seed=0, tol=1e-6, margin=1e-4):
    pr = period15_protocol()
    rng = np.random.default_rng(seed)
    pts = np.empty((0, 3))
    while len(pts) < n_points:
        cand = random_sphere(4 * n_points, rng)
        _, m = forward_margin(pr, cand, 15)
        pts = np.concatenate([pts, cand[m >= margin]])[:n_points]
    back = iterate(pr, pts, 15)
    d = float(geodesic_distance(back, pts).max())
    return CheckResult("period15", d < tol, f"max |M^15 p - p| {d:.2e} on {n_points} points")


CHECKS = {
    "symmetry": lambda **kw: check_symmetries(**kw)[0],
    "prop1": check_prop1,
    "areas": lambda **kw: check_area_sums(),
    "area-mc": lambda **kw: check_area_monte_carlo(samples=kw.get("samples", 200_000)),
    "branches": lambda **kw: check_branches(),
    "period15": lambda **kw: check_period15(),
}
