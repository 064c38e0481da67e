"""Numpy implementations of the redistribution integrand kernels.

These mirror ``_kernels.pyx`` exactly and are used when the compiled module is
unavailable or disabled with ``POLARIJSA_BACKEND=python``.
"""

from __future__ import annotations

import numpy as np

from .greens import GreenView


def green_sum(z, poles, coeffs):
    z = np.asarray(z, dtype=complex)
    return (coeffs[0] / (z - poles[0]) + coeffs[1] / (z - poles[1])) / (2.0 * np.pi)


def quadrature_term1(ws, wi, x, poles, u, uc, unit):
    """G(ws) * Gbip(ws + wi) * G(x) for one member of the conjugate pair."""
    v = GreenView(poles, u, uc, unit)
    return v.g(ws) * v.bip(ws + wi) * v.g(x)


def quadrature_term2(ws, wi, x, poles, u, uc, unit):
    """Return (unit * A, A * Gexc(x)) with A = [G*(ws - x) - G(ws)] G(wi + x)."""
    v = GreenView(poles, u, uc, unit)
    a = (v.gc(ws - x) - v.g(ws)) * v.g(wi + x)
    return unit * a, a * v.exc(x)
