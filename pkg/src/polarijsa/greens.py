"""Single-polariton Green functions of the Tavis-Cummings cavity.

The Green function is a two-pole rational function.  It is available both as
a sum over poles (``green_g``/``green_g_conj``) and as the direct rational
expression (``green_g_closed``/``green_g_conj_closed``); the latter serves as an
independent check of the former.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .config import ComplexFrequency, TcParams
from .errors import DegenerateSpectrumError, SingularityError, ValidationError

TWO_PI = 2.0 * np.pi
POLE_TOL = 1e-15
DEGENERACY_TOL = 1e-12


def cavity_dephasing_rate(kappa: float, n_bar: float) -> float:
    """Dressed cavity linewidth ``kappa * (1/2 + n_bar * (n_bar + 1))``."""
    return kappa * (0.5 + n_bar * (n_bar + 1.0))


def _complex_bare(params: TcParams) -> tuple[complex, complex]:
    gamma_c = cavity_dephasing_rate(params.kappa, params.n_bar)
    return complex(params.omega_c, -gamma_c), complex(params.omega_o, -params.gamma_o)


def polariton_poles(params: TcParams) -> tuple[ComplexFrequency, ComplexFrequency]:
    """Upper and lower polariton poles.

    The "+" branch uses the principal square root of the discriminant, with the
    tie at zero real part broken towards a non-negative imaginary part.
    """
    wc, wo = _complex_bare(params)
    disc = (wc - wo) ** 2 / 4.0 - params.coupling**2 * params.sigma_z_bar
    root = cmath.sqrt(disc)
    if root.real == 0.0 and root.imag < 0.0:
        root = -root
    mid = (wc + wo) / 2.0
    plus, minus = mid + root, mid - root
    for name, pole in (("pole_plus", plus), ("pole_minus", minus)):
        if pole.imag > POLE_TOL:
            raise ValidationError(name, "Im <= 0 (decaying resonance)", pole)
    return ComplexFrequency.from_complex(plus), ComplexFrequency.from_complex(minus)


@dataclass(frozen=True)
class PoleDecomposition:
    """Poles and residue weights of G (``u_*``) and of its conjugate partner G*.

    ``u_conj_*`` are the weights of the population-weighted Green function, not
    the complex conjugates of ``u_*``.
    """

    pole_plus: complex
    pole_minus: complex
    u_plus: complex
    u_minus: complex
    u_conj_plus: complex
    u_conj_minus: complex
    gamma_c: float

    @property
    def poles(self) -> np.ndarray:
        return np.array([self.pole_plus, self.pole_minus])

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.u_plus, self.u_minus])

    @property
    def conj_coeffs(self) -> np.ndarray:
        return np.array([self.u_conj_plus, self.u_conj_minus])

    @property
    def is_vacuum(self) -> bool:
        return self.u_conj_plus == 0 and self.u_conj_minus == 0

    def view(self) -> "GreenView":
        return GreenView(self.poles, self.coeffs, self.conj_coeffs, 1j)

    def partner_view(self) -> "GreenView":
        """The formal complex-conjugate partner.

        Conjugating an expression built from G, G*, the two-particle functions
        and ``1j`` amounts to evaluating the same expression with conjugated
        poles, the two coefficient sets exchanged and ``1j`` replaced by
        ``-1j``.  Input amplitudes must additionally be evaluated with their two
        arguments exchanged.
        """
        return GreenView(np.conj(self.poles), self.conj_coeffs, self.coeffs, -1j)


@dataclass(frozen=True)
class GreenView:
    """Vectorized Green functions for one member of a conjugate pair.

    ``unit`` is the imaginary unit as seen by this member (``1j`` or ``-1j``).
    No pole-proximity checks are done here; callers that need them use the
    module-level functions.
    """

    poles: np.ndarray
    u: np.ndarray
    uc: np.ndarray
    unit: complex

    def g(self, z):
        z = np.asarray(z)
        p, u = self.poles, self.u
        return (u[0] / (z - p[0]) + u[1] / (z - p[1])) / TWO_PI

    def gc(self, z):
        z = np.asarray(z)
        p, uc = np.conj(self.poles), self.uc
        return (uc[0] / (z - p[0]) + uc[1] / (z - p[1])) / TWO_PI

    def bip(self, z):
        z = np.asarray(z)
        p, u = self.poles, self.u
        total = 0
        for a in range(2):
            for b in range(2):
                total = total + u[a] * u[b] / (z - p[a] - p[b])
        return -self.unit * total

    def exc(self, z):
        z = np.asarray(z)
        p, u, uc = self.poles, self.u, self.uc
        pc = np.conj(p)
        total = 0
        for a in range(2):
            for b in range(2):
                total = total + u[a] * uc[b] / (z - p[a] + pc[b])
        return self.unit * total

    @property
    def has_conj(self) -> bool:
        return bool(np.any(self.uc != 0))

    @property
    def is_null(self) -> bool:
        return bool(np.all(self.u == 0))


def expansion_coefficients(
    params: TcParams, poles: tuple[ComplexFrequency, ComplexFrequency]
) -> PoleDecomposition:
    """Residue weights of G and G* at the two polariton poles."""
    wp, wm = poles[0].value, poles[1].value
    split = wp - wm
    if abs(split) < DEGENERACY_TOL:
        raise DegenerateSpectrumError(
            "polariton poles coincide (exceptional point); perturb the coupling slightly"
        )
    _, wo = _complex_bare(params)
    n, s = params.n_bar, params.sigma_a_bar
    u_plus = ((wp - wo) * (n + 1) + s) / split
    u_minus = -((wm - wo) * (n + 1) + s) / split
    csplit = split.conjugate()
    u_conj_plus = ((wp.conjugate() - wo.conjugate()) * n + s.conjugate()) / csplit
    u_conj_minus = -((wm.conjugate() - wo.conjugate()) * n + s.conjugate()) / csplit
    return PoleDecomposition(
        pole_plus=wp,
        pole_minus=wm,
        u_plus=u_plus,
        u_minus=u_minus,
        u_conj_plus=u_conj_plus,
        u_conj_minus=u_conj_minus,
        gamma_c=cavity_dephasing_rate(params.kappa, params.n_bar),
    )


def decompose(params: TcParams) -> PoleDecomposition:
    return expansion_coefficients(params, polariton_poles(params))


def _check_poles(z, poles, what: str) -> None:
    z = np.asarray(z)
    for p in poles:
        if np.any(np.abs(z - p) <= POLE_TOL):
            raise SingularityError(f"{what} evaluated at its pole {p}")


def green_g(omega, dec: PoleDecomposition):
    """G(omega) as a sum over polariton poles; accepts complex arguments."""
    _check_poles(omega, dec.poles, "G")
    return dec.view().g(omega)


def green_g_conj(omega, dec: PoleDecomposition):
    """Population-weighted partner G*(omega) with poles in the upper half-plane."""
    if dec.is_vacuum:
        return np.zeros_like(np.asarray(omega, dtype=complex))
    _check_poles(omega, np.conj(dec.poles), "G*")
    return dec.view().gc(omega)


def green_g_closed(omega, params: TcParams):
    """G(omega) from the rational solution of the equations of motion."""
    wc, wo = _complex_bare(params)
    return _closed(omega, wc, wo, params.n_bar + 1.0, params.sigma_a_bar, params)


def green_g_conj_closed(omega, params: TcParams):
    wc, wo = _complex_bare(params)
    return _closed(
        omega, wc.conjugate(), wo.conjugate(), params.n_bar, params.sigma_a_bar.conjugate(), params
    )


def _closed(omega, wc, wo, weight, s, params):
    z = np.asarray(omega, dtype=complex)
    den = (z - wc) * (z - wo) + params.coupling**2 * params.sigma_z_bar
    if np.any(np.abs(den) <= POLE_TOL):
        raise SingularityError("closed-form Green function denominator vanishes")
    return ((z - wo) * weight + s) / (TWO_PI * den)


def delta_sigma_correction(omega, dec: PoleDecomposition, kappa: float):
    """Radiative self-energy factor ``1 + 4*pi*i*kappa*G*(omega)``."""
    return 1.0 + 4j * np.pi * kappa * green_g_conj(omega, dec)


def delta_sigma_correction_conj(omega, dec: PoleDecomposition, kappa: float):
    """Conjugate-partner factor ``1 - 4*pi*i*kappa*G(omega)`` that multiplies G*."""
    return 1.0 - 4j * np.pi * kappa * green_g(omega, dec)


DISPERSION_COLUMNS = (
    "coupling_over_omega_o", "re_omega_plus_ev", "re_omega_minus_ev", "gamma_plus_ev",
    "gamma_minus_ev",
)
SPLITTING_THRESHOLD_EV = 1e-4


def dispersion(params: TcParams, coupling_ratios) -> np.ndarray:
    """Pole energies and linewidths versus coupling / omega_o, one row per ratio."""
    rows = []
    for ratio in np.asarray(coupling_ratios, dtype=float):
        plus, minus = polariton_poles(params.with_coupling_ratio(float(ratio)))
        rows.append((ratio, plus.energy, minus.energy, plus.linewidth, minus.linewidth))
    return np.array(rows, dtype=float).reshape(-1, len(DISPERSION_COLUMNS))


def strong_coupling_onset(table: np.ndarray, threshold: float = SPLITTING_THRESHOLD_EV):
    """First coupling ratio whose branch splitting exceeds ``threshold``, or None."""
    split = np.abs(table[:, 1] - table[:, 2])
    hits = np.flatnonzero(split > threshold)
    return float(table[hits[0], 0]) if hits.size else None
