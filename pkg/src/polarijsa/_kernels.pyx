# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled redistribution integrand kernels (see ``_kernels_py`` for the reference)."""

import numpy as np

cdef double TWO_PI = 6.283185307179586


cdef inline double complex _g(double complex z, double complex p0, double complex p1,
                              double complex c0, double complex c1) noexcept nogil:
    return (c0 / (z - p0) + c1 / (z - p1)) / TWO_PI


cdef inline double complex _conj(double complex z) noexcept nogil:
    return z.real - 1j * z.imag


def green_sum(z, poles, coeffs):
    cdef double complex[::1] zz = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef double complex p0 = poles[0], p1 = poles[1], c0 = coeffs[0], c1 = coeffs[1]
    out = np.empty(zz.shape[0], dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(zz.shape[0]):
            o[k] = _g(zz[k], p0, p1, c0, c1)
    return out.reshape(np.shape(z))


def quadrature_term1(ws, wi, x, poles, u, uc, unit):
    cdef double[::1] s = np.ascontiguousarray(ws, dtype=np.float64)
    cdef double[::1] i = np.ascontiguousarray(wi, dtype=np.float64)
    cdef double[::1] t = np.ascontiguousarray(x, dtype=np.float64)
    cdef double complex p0 = poles[0], p1 = poles[1], u0 = u[0], u1 = u[1]
    cdef double complex j = unit
    cdef double complex bip
    out = np.empty(t.shape[0], dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t k
    cdef double om
    with nogil:
        for k in range(t.shape[0]):
            om = s[k] + i[k]
            bip = -j * (u0 * u0 / (om - 2 * p0) + 2 * u0 * u1 / (om - p0 - p1)
                        + u1 * u1 / (om - 2 * p1))
            o[k] = _g(s[k], p0, p1, u0, u1) * bip * _g(t[k], p0, p1, u0, u1)
    return out


def quadrature_term2(ws, wi, x, poles, u, uc, unit):
    cdef double[::1] s = np.ascontiguousarray(ws, dtype=np.float64)
    cdef double[::1] i = np.ascontiguousarray(wi, dtype=np.float64)
    cdef double[::1] t = np.ascontiguousarray(x, dtype=np.float64)
    cdef double complex p0 = poles[0], p1 = poles[1], u0 = u[0], u1 = u[1]
    cdef double complex v0 = uc[0], v1 = uc[1]
    cdef double complex q0 = _conj(p0), q1 = _conj(p1)
    cdef double complex j = unit
    cdef double complex a, exc
    pa = np.empty(t.shape[0], dtype=np.complex128)
    ra = np.empty(t.shape[0], dtype=np.complex128)
    cdef double complex[::1] po = pa
    cdef double complex[::1] ro = ra
    cdef Py_ssize_t k
    cdef double x0
    with nogil:
        for k in range(t.shape[0]):
            x0 = t[k]
            a = (_g(s[k] - x0, q0, q1, v0, v1) - _g(s[k], p0, p1, u0, u1)) \
                * _g(i[k] + x0, p0, p1, u0, u1)
            exc = j * (u0 * v0 / (x0 - p0 + q0) + u0 * v1 / (x0 - p0 + q1)
                       + u1 * v0 / (x0 - p1 + q0) + u1 * v1 / (x0 - p1 + q1))
            po[k] = j * a
            ro[k] = a * exc
    return pa, ra
