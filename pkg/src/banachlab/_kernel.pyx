# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: weighted complex l_p norms and polynomial sup norms.

These two evaluations sit at the bottom of every multi-start search in the
package (operator norm ascent, Birkhoff-James minimisation, triangle
violation search), where they are called tens of thousands of times on
short vectors and numpy's per-call overhead dominates.  Keep the signatures
in sync with the pure twin in _kernel_py.py.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, hypot, pow, sin, sqrt

cnp.import_array()

DEF TWO_PI = 6.283185307179586476925287


def lp_norm(const double complex[::1] x, const double[::1] w, double p):
    """Weighted l_p norm of a complex vector; p <= 0 encodes the sup norm."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double acc = 0.0
    cdef double best = 0.0
    cdef double m
    if p <= 0.0:
        for i in range(n):
            m = hypot(x[i].real, x[i].imag) * w[i]
            if m > best:
                best = m
        return best
    if p == 2.0:
        for i in range(n):
            acc += (x[i].real * x[i].real + x[i].imag * x[i].imag) * w[i]
        return sqrt(acc)
    if p == 1.0:
        for i in range(n):
            acc += hypot(x[i].real, x[i].imag) * w[i]
        return acc
    for i in range(n):
        m = hypot(x[i].real, x[i].imag)
        if m > 0.0:
            acc += pow(m, p) * w[i]
    if acc == 0.0:
        return 0.0
    return pow(acc, 1.0 / p)


def poly_sup(const double complex[::1] c, Py_ssize_t grid):
    """max over the `grid` roots of unity of |sum_j c[j] z^j| (Horner)."""
    cdef Py_ssize_t j, k, d = c.shape[0]
    cdef double best = 0.0
    cdef double ang, zr, zi, vr, vi, tr, m
    if d == 0:
        return 0.0
    for k in range(grid):
        ang = TWO_PI * k / grid
        zr = cos(ang)
        zi = sin(ang)
        vr = c[d - 1].real
        vi = c[d - 1].imag
        for j in range(d - 2, -1, -1):
            tr = vr * zr - vi * zi + c[j].real
            vi = vr * zi + vi * zr + c[j].imag
            vr = tr
        m = hypot(vr, vi)
        if m > best:
            best = m
    return best
