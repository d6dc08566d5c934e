# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled assembly kernels; same contracts as the numpy fallback.

The hot loops run over cells with typed memoryviews. Inputs are coerced to
contiguous float64 / intp on entry so callers may pass whatever numpy hands
them.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt

cnp.import_array()


cdef inline double _pp(double x, double p) noexcept nogil:
    if p == 2.0:
        return x * x
    return pow(fabs(x), p)


cdef inline double _ps(double x, double p) noexcept nogil:
    # |x|^(p-2) * x without a zero-division at x = 0
    if p == 2.0:
        return x
    if x == 0.0:
        return 0.0
    return pow(fabs(x), p - 2.0) * x


def _f64(arr):
    return np.ascontiguousarray(arr, dtype=np.float64)


def _idx(arr):
    return np.ascontiguousarray(arr, dtype=np.intp)


def seg_mass(u, i0, i1, qw, phi0, phi1, p):
    cdef double[::1] uv = _f64(u)
    cdef Py_ssize_t[::1] a = _idx(i0), b = _idx(i1)
    cdef double[:, ::1] w = _f64(qw)
    cdef double[::1] f0 = _f64(phi0), f1 = _f64(phi1)
    cdef double pp = p
    cdef Py_ssize_t c, q, nc = a.shape[0], nq = w.shape[1]
    cdef double total = 0.0, v
    with nogil:
        for c in range(nc):
            for q in range(nq):
                v = uv[a[c]] * f0[q] + uv[b[c]] * f1[q]
                total += w[c, q] * _pp(v, pp)
    return total


def seg_mass_grad(u, i0, i1, qw, phi0, phi1, p, grad):
    cdef double[::1] uv = _f64(u)
    cdef Py_ssize_t[::1] a = _idx(i0), b = _idx(i1)
    cdef double[:, ::1] w = _f64(qw)
    cdef double[::1] f0 = _f64(phi0), f1 = _f64(phi1)
    cdef double[::1] g = grad
    cdef double pp = p
    cdef Py_ssize_t c, q, nc = a.shape[0], nq = w.shape[1]
    cdef double total = 0.0, v, core
    with nogil:
        for c in range(nc):
            for q in range(nq):
                v = uv[a[c]] * f0[q] + uv[b[c]] * f1[q]
                total += w[c, q] * _pp(v, pp)
                core = pp * w[c, q] * _ps(v, pp)
                g[a[c]] += core * f0[q]
                g[b[c]] += core * f1[q]
    return total


def seg_grad_energy(u, i0, i1, inv_h, measure, p):
    cdef double[::1] uv = _f64(u)
    cdef Py_ssize_t[::1] a = _idx(i0), b = _idx(i1)
    cdef double[::1] ih = _f64(inv_h), ms = _f64(measure)
    cdef double pp = p
    cdef Py_ssize_t c, nc = a.shape[0]
    cdef double total = 0.0, s
    with nogil:
        for c in range(nc):
            s = (uv[b[c]] - uv[a[c]]) * ih[c]
            total += _pp(s, pp) * ms[c]
    return total


def seg_grad_energy_grad(u, i0, i1, inv_h, measure, p, eps2, grad):
    cdef double[::1] uv = _f64(u)
    cdef Py_ssize_t[::1] a = _idx(i0), b = _idx(i1)
    cdef double[::1] ih = _f64(inv_h), ms = _f64(measure)
    cdef double[::1] g = grad
    cdef double pp = p, e2 = eps2
    cdef bint reg = pp < 2.0 and e2 > 0.0
    cdef Py_ssize_t c, nc = a.shape[0]
    cdef double total = 0.0, s, core, mag
    with nogil:
        for c in range(nc):
            s = (uv[b[c]] - uv[a[c]]) * ih[c]
            total += _pp(s, pp) * ms[c]
            if reg:
                mag = sqrt(s * s + e2)
                core = pp * pow(mag, pp - 2.0) * s * ms[c] * ih[c]
            else:
                core = pp * _ps(s, pp) * ms[c] * ih[c]
            g[b[c]] += core
            g[a[c]] -= core
    return total


def tri_mass(u, tri, qw, bary, p):
    cdef double[::1] uv = _f64(u)
    cdef Py_ssize_t[:, ::1] t = _idx(tri)
    cdef double[:, ::1] w = _f64(qw), by = _f64(bary)
    cdef double pp = p
    cdef Py_ssize_t c, q, nc = t.shape[0], nq = w.shape[1]
    cdef double total = 0.0, v
    with nogil:
        for c in range(nc):
            for q in range(nq):
                v = uv[t[c, 0]] * by[q, 0] + uv[t[c, 1]] * by[q, 1] + uv[t[c, 2]] * by[q, 2]
                total += w[c, q] * _pp(v, pp)
    return total


def tri_mass_grad(u, tri, qw, bary, p, grad):
    cdef double[::1] uv = _f64(u)
    cdef Py_ssize_t[:, ::1] t = _idx(tri)
    cdef double[:, ::1] w = _f64(qw), by = _f64(bary)
    cdef double[::1] g = grad
    cdef double pp = p
    cdef Py_ssize_t c, q, k, nc = t.shape[0], nq = w.shape[1]
    cdef double total = 0.0, v, core
    with nogil:
        for c in range(nc):
            for q in range(nq):
                v = uv[t[c, 0]] * by[q, 0] + uv[t[c, 1]] * by[q, 1] + uv[t[c, 2]] * by[q, 2]
                total += w[c, q] * _pp(v, pp)
                core = pp * w[c, q] * _ps(v, pp)
                for k in range(3):
                    g[t[c, k]] += core * by[q, k]
    return total


def tri_grad_energy(u, tri, gx, gy, area, p):
    cdef double[::1] uv = _f64(u)
    cdef Py_ssize_t[:, ::1] t = _idx(tri)
    cdef double[:, ::1] bx = _f64(gx), by = _f64(gy)
    cdef double[::1] ar = _f64(area)
    cdef double pp = p
    cdef Py_ssize_t c, nc = t.shape[0]
    cdef double total = 0.0, dx, dy, sq
    with nogil:
        for c in range(nc):
            dx = uv[t[c, 0]] * bx[c, 0] + uv[t[c, 1]] * bx[c, 1] + uv[t[c, 2]] * bx[c, 2]
            dy = uv[t[c, 0]] * by[c, 0] + uv[t[c, 1]] * by[c, 1] + uv[t[c, 2]] * by[c, 2]
            sq = dx * dx + dy * dy
            if pp == 2.0:
                total += sq * ar[c]
            else:
                total += pow(sqrt(sq), pp) * ar[c]
    return total


def tri_grad_energy_grad(u, tri, gx, gy, area, p, eps2, grad):
    cdef double[::1] uv = _f64(u)
    cdef Py_ssize_t[:, ::1] t = _idx(tri)
    cdef double[:, ::1] bx = _f64(gx), by = _f64(gy)
    cdef double[::1] ar = _f64(area)
    cdef double[::1] g = grad
    cdef double pp = p, e2 = eps2
    cdef bint use_reg = pp < 2.0 and e2 > 0.0
    cdef Py_ssize_t c, k, nc = t.shape[0]
    cdef double total = 0.0, dx, dy, sq, mag, reg, coef
    with nogil:
        for c in range(nc):
            dx = uv[t[c, 0]] * bx[c, 0] + uv[t[c, 1]] * bx[c, 1] + uv[t[c, 2]] * bx[c, 2]
            dy = uv[t[c, 0]] * by[c, 0] + uv[t[c, 1]] * by[c, 1] + uv[t[c, 2]] * by[c, 2]
            sq = dx * dx + dy * dy
            if pp == 2.0:
                total += sq * ar[c]
                coef = 2.0 * ar[c]
            else:
                mag = sqrt(sq)
                total += pow(mag, pp) * ar[c]
                reg = sqrt(sq + e2) if use_reg else mag
                coef = pp * pow(reg, pp - 2.0) * ar[c] if reg > 0.0 else 0.0
            for k in range(3):
                g[t[c, k]] += coef * (dx * bx[c, k] + dy * by[c, k])
    return total
