"""Two-particle coherence functions.

``bipolariton_g`` has poles at sums of polariton frequencies and
``excited_coherence_g`` at differences ``w_a - conj(w_b)``.  Both follow from
convolving single-particle Green functions; the ``*_oracle`` variants compute
that convolution by quadrature and are used to cross-check the pole forms.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularityError
from .greens import POLE_TOL, TWO_PI, PoleDecomposition
from .quadrature import QuadResult, integrate_line

WINDOW_FACTOR = 200.0


def _guard(z, poles, what):
    z = np.asarray(z)
    for p in poles:
        if np.any(np.abs(z - p) <= POLE_TOL):
            raise SingularityError(f"{what} evaluated at its pole {p}")


def bipolariton_poles(dec: PoleDecomposition) -> np.ndarray:
    p = dec.poles
    return np.array([2 * p[0], p[0] + p[1], 2 * p[1]])


def excited_coherence_poles(dec: PoleDecomposition) -> np.ndarray:
    p = dec.poles
    return np.array([a - np.conj(b) for a in p for b in p])


def bipolariton_g(omega, dec: PoleDecomposition):
    """-i * sum_ab u_a u_b / (omega - w_a - w_b)."""
    _guard(omega, bipolariton_poles(dec), "bipolariton coherence")
    return dec.view().bip(np.asarray(omega, dtype=complex))


def excited_coherence_g(omega, dec: PoleDecomposition):
    """i * sum_ab u_a u*_b / (omega - w_a + conj(w_b))."""
    if dec.is_vacuum:
        return np.zeros_like(np.asarray(omega, dtype=complex))
    _guard(omega, excited_coherence_poles(dec), "excited-state coherence")
    return dec.view().exc(np.asarray(omega, dtype=complex))


def default_window(dec: PoleDecomposition) -> float:
    widths = -dec.poles.imag
    return WINDOW_FACTOR * max(dec.gamma_c, *widths, abs(dec.pole_plus - dec.pole_minus))


def _require_broadened(dec: PoleDecomposition) -> None:
    if np.any(-dec.poles.imag <= POLE_TOL):
        raise SingularityError(
            "a polariton pole lies on the real axis; the convolution integral is singular"
        )


def _oracle(omega, dec, shift_sign, rel_tol, max_subdivisions):
    _require_broadened(dec)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    view = dec.view()
    re = dec.poles.real
    # Integrand G(shift_sign*omega' + omega) * H(omega') with H = G or G*.
    if shift_sign < 0:
        center = omega / 2.0
        marks = np.stack([np.broadcast_to(r, omega.shape) for r in re]
                         + [omega - r for r in re], axis=1)

        def f(owner, x):
            return TWO_PI * view.g(omega[owner] - x) * view.g(x)
    else:
        center = np.zeros_like(omega)
        marks = np.stack([np.broadcast_to(r, omega.shape) for r in re]
                         + [r - omega for r in re], axis=1)

        def f(owner, x):
            return TWO_PI * view.g(omega[owner] + x) * view.gc(x)

    reach = np.max(np.abs(marks - center[:, None]), axis=1)
    half = np.maximum(default_window(dec), 2.0 * reach)
    return integrate_line(
        f, center, half, marks, rel_tol=rel_tol, abs_tol=1e-300,
        max_subdivisions=max_subdivisions,
    )


def bipolariton_g_oracle(
    omega, dec: PoleDecomposition, *, rel_tol: float = 1e-10, max_subdivisions: int = 4000
) -> QuadResult:
    """2*pi * integral G(omega - x) G(x) dx over the real line (real omega)."""
    return _oracle(omega, dec, -1, rel_tol, max_subdivisions).raise_if_failed(
        "bipolariton convolution"
    )


def excited_coherence_g_oracle(
    omega, dec: PoleDecomposition, *, rel_tol: float = 1e-10, max_subdivisions: int = 4000
) -> QuadResult:
    """2*pi * integral G(omega + x) G*(x) dx over the real line (real omega)."""
    return _oracle(omega, dec, +1, rel_tol, max_subdivisions).raise_if_failed(
        "excited-state convolution"
    )
