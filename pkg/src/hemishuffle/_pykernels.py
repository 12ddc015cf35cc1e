"""Pure numpy implementation of the hot loops.

Mirrors ``_kernels.pyx`` operation for operation so both backends give
bit-identical results.  Arc rows are ``(n, a, b, v, w)`` as produced by
:meth:`GreatArc.kernel_row`; ``trig`` is ``Protocol.trig()``.
"""

import numpy as np

RENORM_EVERY = 64


def _inverse_step(x, y, z, ca, sa, cb, sb, cg, sg):
    x1 = x * cg - z * sg
    z1 = x * sg + z * cg
    x2 = x1 * cb + y * sb
    y2 = y * cb - x1 * sb
    up = y2 > 0.0
    x2 = np.where(up, -x2, x2)
    y2 = np.where(up, -y2, y2)
    x3 = x2 * cg + z1 * sg
    z3 = z1 * cg - x2 * sg
    x4 = x3 * ca + y2 * sa
    y4 = y2 * ca - x3 * sa
    up = y4 > 0.0
    return np.where(up, -x4, x4), np.where(up, -y4, y4), z3


def _renorm(x, y, z):
    r = np.sqrt(x * x + y * y + z * z)
    return x / r, y / r, z / r


def _hits(x, y, z, arcs, sin_eps, cos_eps, sin_w=None, cos_w=None):
    hit = np.zeros(x.shape, dtype=bool)
    wide = np.zeros(x.shape, dtype=bool)
    for r in arcs:
        dn = np.abs(x * r[0] + y * r[1] + z * r[2])
        da = x * r[3] + y * r[4] + z * r[5]
        db = x * r[6] + y * r[7] + z * r[8]
        dv = x * r[9] + y * r[10] + z * r[11]
        dw = x * r[12] + y * r[13] + z * r[14]
        foot = (dv >= 0.0) & (dw >= 0.0)
        dend = np.maximum(da, db)
        hit |= np.where(foot, dn <= sin_eps, dend >= cos_eps)
        if sin_w is not None:
            wide |= np.where(foot, dn <= sin_w, dend >= cos_w)
    if sin_w is None:
        return hit
    return hit, wide | hit


def mark(points, trig, arcs, sin_eps, cos_eps, n_iters, threads=1):
    """First iteration ``n <= n_iters`` at which ``M^-n p`` is within the fat cut set, or -1."""
    points = np.asarray(points, dtype=np.float64)
    ca, sa, cb, sb, cg, sg = (float(t) for t in trig)
    out = np.full(len(points), -1, dtype=np.int32)
    idx = np.arange(len(points))
    x, y, z = points[:, 0].copy(), points[:, 1].copy(), points[:, 2].copy()
    for it in range(n_iters + 1):
        if len(idx) == 0:
            break
        h = _hits(x, y, z, arcs, sin_eps, cos_eps)
        if h.any():
            out[idx[h]] = it
            keep = ~h
            idx, x, y, z = idx[keep], x[keep], y[keep], z[keep]
        if it == n_iters:
            break
        x, y, z = _inverse_step(x, y, z, ca, sa, cb, sb, cg, sg)
        if (it + 1) % RENORM_EVERY == 0:
            x, y, z = _renorm(x, y, z)
    return out


def mark_near(points, trig, arcs, sin_eps, cos_eps, sin_w, cos_w, n_iters, threads=1):
    """Like :func:`mark`, also returning the first iteration within the wide radius."""
    points = np.asarray(points, dtype=np.float64)
    ca, sa, cb, sb, cg, sg = (float(t) for t in trig)
    hit_out = np.full(len(points), -1, dtype=np.int32)
    near_out = np.full(len(points), -1, dtype=np.int32)
    idx = np.arange(len(points))
    x, y, z = points[:, 0].copy(), points[:, 1].copy(), points[:, 2].copy()
    for it in range(n_iters + 1):
        if len(idx) == 0:
            break
        h, w = _hits(x, y, z, arcs, sin_eps, cos_eps, sin_w, cos_w)
        fresh = w & (near_out[idx] < 0)
        near_out[idx[fresh]] = it
        if h.any():
            hit_out[idx[h]] = it
            keep = ~h
            idx, x, y, z = idx[keep], x[keep], y[keep], z[keep]
        if it == n_iters:
            break
        x, y, z = _inverse_step(x, y, z, ca, sa, cb, sb, cg, sg)
        if (it + 1) % RENORM_EVERY == 0:
            x, y, z = _renorm(x, y, z)
    return hit_out, near_out


def iterate_inverse(points, trig, n_iters, threads=1):
    """Apply the inverse map ``n_iters`` times to each row of ``points``."""
    points = np.asarray(points, dtype=np.float64)
    ca, sa, cb, sb, cg, sg = (float(t) for t in trig)
    x, y, z = points[:, 0].copy(), points[:, 1].copy(), points[:, 2].copy()
    for it in range(n_iters):
        x, y, z = _inverse_step(x, y, z, ca, sa, cb, sb, cg, sg)
        if (it + 1) % RENORM_EVERY == 0:
            x, y, z = _renorm(x, y, z)
    return np.stack([x, y, z], axis=1)

