# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled marking and iteration kernels.

Same arithmetic, in the same order, as ``_pykernels``; results are
bit-identical to the numpy fallback and independent of the thread count.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport fabs, sqrt

cnp.import_array()

cdef enum:
    RENORM_EVERY = 64


cdef inline bint _near(double x, double y, double z, const double[:, ::1] arcs,
                       Py_ssize_t m, double sin_eps, double cos_eps) noexcept nogil:
    cdef Py_ssize_t k
    cdef double dn, da, db, dv, dw
    for k in range(m):
        dv = x * arcs[k, 9] + y * arcs[k, 10] + z * arcs[k, 11]
        dw = x * arcs[k, 12] + y * arcs[k, 13] + z * arcs[k, 14]
        if dv >= 0.0 and dw >= 0.0:
            dn = x * arcs[k, 0] + y * arcs[k, 1] + z * arcs[k, 2]
            if fabs(dn) <= sin_eps:
                return True
        else:
            da = x * arcs[k, 3] + y * arcs[k, 4] + z * arcs[k, 5]
            db = x * arcs[k, 6] + y * arcs[k, 7] + z * arcs[k, 8]
            if da >= cos_eps or db >= cos_eps:
                return True
    return False


cdef inline int _near2(double x, double y, double z, const double[:, ::1] arcs,
                       Py_ssize_t m, double sin_eps, double cos_eps,
                       double sin_w, double cos_w) noexcept nogil:
    # 2: within eps, 1: within the wide radius only, 0: neither
    cdef Py_ssize_t k
    cdef double dn, da, db, dv, dw
    cdef int code = 0
    for k in range(m):
        dv = x * arcs[k, 9] + y * arcs[k, 10] + z * arcs[k, 11]
        dw = x * arcs[k, 12] + y * arcs[k, 13] + z * arcs[k, 14]
        if dv >= 0.0 and dw >= 0.0:
            dn = fabs(x * arcs[k, 0] + y * arcs[k, 1] + z * arcs[k, 2])
            if dn <= sin_eps:
                return 2
            if dn <= sin_w:
                code = 1
        else:
            da = x * arcs[k, 3] + y * arcs[k, 4] + z * arcs[k, 5]
            db = x * arcs[k, 6] + y * arcs[k, 7] + z * arcs[k, 8]
            if da >= cos_eps or db >= cos_eps:
                return 2
            if da >= cos_w or db >= cos_w:
                code = 1
    return code


cdef inline void _inverse_step(double* x, double* y, double* z,
                               double ca, double sa, double cb, double sb,
                               double cg, double sg) noexcept nogil:
    cdef double x1, z1, x2, y2, x3, z3, x4, y4
    x1 = x[0] * cg - z[0] * sg
    z1 = x[0] * sg + z[0] * cg
    x2 = x1 * cb + y[0] * sb
    y2 = y[0] * cb - x1 * sb
    if y2 > 0.0:
        x2 = -x2
        y2 = -y2
    x3 = x2 * cg + z1 * sg
    z3 = z1 * cg - x2 * sg
    x4 = x3 * ca + y2 * sa
    y4 = y2 * ca - x3 * sa
    if y4 > 0.0:
        x4 = -x4
        y4 = -y4
    x[0] = x4
    y[0] = y4
    z[0] = z3


cdef inline void _renorm(double* x, double* y, double* z) noexcept nogil:
    cdef double r = sqrt(x[0] * x[0] + y[0] * y[0] + z[0] * z[0])
    x[0] = x[0] / r
    y[0] = y[0] / r
    z[0] = z[0] / r


def mark(points, trig, arcs, double sin_eps, double cos_eps, int n_iters, int threads=1):
    """First iteration ``n <= n_iters`` at which ``M^-n p`` is within the fat cut set, or -1."""
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] A = np.ascontiguousarray(arcs, dtype=np.float64).reshape(-1, 15)
    cdef double[::1] T = np.ascontiguousarray(trig, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0], m = A.shape[0], i
    cdef int it
    cdef double x, y, z
    cdef double ca = T[0], sa = T[1], cb = T[2], sb = T[3], cg = T[4], sg = T[5]
    out = np.full(n, -1, dtype=np.int32)
    cdef int[::1] O = out
    if threads < 1:
        threads = 1
    for i in prange(n, nogil=True, schedule="dynamic", chunksize=256, num_threads=threads):
        x = P[i, 0]
        y = P[i, 1]
        z = P[i, 2]
        it = 0
        while True:
            if _near(x, y, z, A, m, sin_eps, cos_eps):
                O[i] = it
                break
            if it == n_iters:
                break
            _inverse_step(&x, &y, &z, ca, sa, cb, sb, cg, sg)
            it = it + 1
            if it % RENORM_EVERY == 0:
                _renorm(&x, &y, &z)
    return out


def mark_near(points, trig, arcs, double sin_eps, double cos_eps,
              double sin_w, double cos_w, int n_iters, int threads=1):
    """Like :func:`mark`, also returning the first iteration within the wide radius."""
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] A = np.ascontiguousarray(arcs, dtype=np.float64).reshape(-1, 15)
    cdef double[::1] T = np.ascontiguousarray(trig, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0], m = A.shape[0], i
    cdef int it, code
    cdef double x, y, z
    cdef double ca = T[0], sa = T[1], cb = T[2], sb = T[3], cg = T[4], sg = T[5]
    hit = np.full(n, -1, dtype=np.int32)
    near = np.full(n, -1, dtype=np.int32)
    cdef int[::1] H = hit
    cdef int[::1] W = near
    if threads < 1:
        threads = 1
    for i in prange(n, nogil=True, schedule="dynamic", chunksize=256, num_threads=threads):
        x = P[i, 0]
        y = P[i, 1]
        z = P[i, 2]
        it = 0
        while True:
            code = _near2(x, y, z, A, m, sin_eps, cos_eps, sin_w, cos_w)
            if code > 0 and W[i] < 0:
                W[i] = it
            if code == 2:
                H[i] = it
                break
            if it == n_iters:
                break
            _inverse_step(&x, &y, &z, ca, sa, cb, sb, cg, sg)
            it = it + 1
            if it % RENORM_EVERY == 0:
                _renorm(&x, &y, &z)
    return hit, near


def iterate_inverse(points, trig, int n_iters, int threads=1):
    """Apply the inverse map ``n_iters`` times to each row of ``points``."""
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[::1] T = np.ascontiguousarray(trig, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0], i
    cdef int it
    cdef double x, y, z
    cdef double ca = T[0], sa = T[1], cb = T[2], sb = T[3], cg = T[4], sg = T[5]
    out = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] O = out
    if threads < 1:
        threads = 1
    for i in prange(n, nogil=True, schedule="static", num_threads=threads):
        x = P[i, 0]
        y = P[i, 1]
        z = P[i, 2]
        for it in range(n_iters):
            _inverse_step(&x, &y, &z, ca, sa, cb, sb, cg, sg)
            if (it + 1) % RENORM_EVERY == 0:
                _renorm(&x, &y, &z)
        O[i, 0] = x
        O[i, 1] = y
        O[i, 2] = z
    return out
