"""Input-to-output map for a photon pair transmitted through the cavity.

The output amplitude is ``coherent + redistribution``.  The coherent part
filters each photon independently.  The redistribution part is an integral over
an exchanged frequency; it is available as

* ``redistribution_jsa_quadrature``: direct adaptive quadrature, valid for any
  input including sampled grids;
* ``redistribution_jsa_pole_sum``: the same integral closed by residues, which
  needs an input that can be evaluated at complex frequencies.  The residue
  form equals the integral only when the input does not grow in the half-plane
  used to close each contour; rational inputs with suitably placed poles
  satisfy this, Gaussian/sinc inputs do not.

"c.c." partners are evaluated through ``PoleDecomposition.partner_view`` with
the input's two arguments exchanged.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .config import ModelConfig
from .errors import ModeError, SingularityError, SymmetryDomainError
from .greens import GreenView, PoleDecomposition, decompose
from .jsa import AnalyticJsa, JsaGrid, evaluate_on_grid, load_measured_jsa
from .quadrature import QuadResult, integrate_line
from .twoparticle import default_window

PATHS = ("pole_sum", "quadrature")
BLOCK_ROWS = 8
PAIR_CONTOUR_POINTS = 48
# Upper bound on (points x starting intervals) handled per quadrature batch.
QUAD_BATCH_BUDGET = 400_000


@dataclass(frozen=True)
class EngineMode:
    path: str = "pole_sum"
    vacuum_fast_path: bool = True

    def __post_init__(self):
        if self.path not in PATHS:
            raise ModeError(f"unknown path {self.path!r}; expected one of {PATHS}")


Source = Callable  # AnalyticJsa or JsaGrid; both are callable on (ws, wi)


def _require_analytic(f_in) -> None:
    if not isinstance(f_in, AnalyticJsa):
        raise ModeError(
            "the sum-over-poles form needs an input that can be evaluated at complex "
            "frequencies; use the quadrature path for sampled (measured) inputs"
        )


# ----------------------------------------------------------------- coherent


def coherent_filter(omega, dec: PoleDecomposition, kappa: float, include_delta_sigma=False):
    """Single-photon transmission factor ``1 - 2*pi*i*kappa*[G - G*]``."""
    v = dec.view()
    g = v.g(omega)
    gc = v.gc(omega)
    if include_delta_sigma:
        g, gc = g * (1 + 4j * np.pi * kappa * gc), gc * (1 - 4j * np.pi * kappa * g)
    return 1 - 2j * np.pi * kappa * (g - gc)


def coherent_jsa(omega_s, omega_i, dec: PoleDecomposition, kappa: float, f_in,
                 include_delta_sigma: bool = False):
    ws, wi = np.broadcast_arrays(np.asarray(omega_s, float), np.asarray(omega_i, float))
    return (
        coherent_filter(ws, dec, kappa, include_delta_sigma)
        * coherent_filter(wi, dec, kappa, include_delta_sigma)
        * f_in(ws, wi)
    )


# ----------------------------------------------------------------- residue form


def _oriented(f_in, partner: bool):
    if partner:
        return lambda a, b: f_in(b, a)
    return f_in


def antisymmetric_term(ws, wi, v: GreenView, kappa, f):
    """Half-residue contribution proportional to F(ws, wi) - F(wi, ws)."""
    gi = v.g(wi)
    return 4 * np.pi**2 * kappa**2 * (v.gc(ws) * gi - v.g(ws) * gi) * (f(ws, wi) - f(wi, ws))


def _pair_divided_difference(h, a, b, width, others):
    """[h(a) - h(b)] / (a - b), via a small contour when a and b nearly coincide.

    ``others`` lists the remaining singular points of ``h``; the contour radius
    stays below half their distance so that none of them is enclosed.
    """
    diff = a - b
    m = 0.5 * (a + b)
    clearance = np.full(m.shape, 0.5 * width)
    for s in others:
        clearance = np.minimum(clearance, 0.5 * np.abs(m - s))
    near = np.abs(diff) < 0.5 * clearance
    out = np.empty(m.shape, dtype=complex)
    far = ~near
    if np.any(far):
        out[far] = (h(a[far], far) - h(b[far], far)) / diff[far]
    if np.any(near):
        theta = 2 * np.pi * (np.arange(PAIR_CONTOUR_POINTS) + 0.5) / PAIR_CONTOUR_POINTS
        ring = clearance[near][:, None] * np.exp(1j * theta)[None, :]
        z = m[near][:, None] + ring
        hz = h(z, np.nonzero(near))
        kern = ring / ((z - a[near][:, None]) * (z - b[near][:, None]))
        out[near] = np.mean(hz * kern, axis=-1)
    return out


def _pole_sum_member(ws, wi, v: GreenView, kappa, f, width, antisym: bool):
    """All residue contributions for one member of the conjugate pair."""
    j = v.unit
    omega = ws + wi
    gs = v.g(ws)
    total = antisymmetric_term(ws, wi, v, kappa, f) if antisym else np.zeros(ws.shape, complex)
    bip = v.bip(omega)
    pc = np.conj(v.poles)
    for a_idx in range(2):
        p, u = v.poles[a_idx], v.u[a_idx]
        if u == 0:
            continue
        a = p - wi
        total += 4 * np.pi * kappa**2 * u * (gs * (j * v.exc(a) - 1 / a) - j * gs * bip) * f(
            omega - p, p + 0 * wi
        )
    if not v.has_conj:
        return total

    def h(z, sel):
        s = ws[sel]
        i = wi[sel]
        if z.ndim > s.ndim:
            s = s[..., None]
            i = i[..., None]
        return (j / z + v.exc(z)) * f(s - z, i + z)

    # singular points of h besides the merged pair: 1/z and the excited-coherence poles
    others = [0.0] + [v.poles[g] - pc[d] for g in range(2) for d in range(2)
                      if v.u[g] != 0 and v.uc[d] != 0]
    for a_idx in range(2):
        for b_idx in range(2):
            u, uc = v.u[a_idx], v.uc[b_idx]
            if u == 0 or uc == 0:
                continue
            a = v.poles[a_idx] - wi
            b = ws - pc[b_idx]
            # residues of G(wi + x) and G*(ws - x) at a and b, merged
            total += 2 * j * kappa**2 * u * uc * _pair_divided_difference(h, a, b, width, others)
            shift = v.poles[a_idx] - pc[b_idx]
            total += (
                -8 * np.pi**2 * kappa**2 * u * uc
                * (gs - v.gc(ws - shift)) * v.g(shift + wi) * f(ws - shift, wi + shift)
            )
    return total


def redistribution_jsa_pole_sum(omega_s, omega_i, dec: PoleDecomposition, kappa: float, f_in,
                                *, vacuum_fast_path: bool = True, antisymmetric: bool = True):
    """Redistribution amplitude from the closed residue sum."""
    _require_analytic(f_in)
    ws, wi = np.broadcast_arrays(np.asarray(omega_s, float), np.asarray(omega_i, float))
    if kappa == 0:
        return np.zeros(ws.shape, complex)
    if vacuum_fast_path and dec.is_vacuum:
        out = redistribution_vacuum(ws, wi, dec, kappa, f_in)
        if antisymmetric:
            out = out + antisymmetric_term(ws, wi, dec.view(), kappa, f_in)
        return _finite(out)
    width = float(np.min(-dec.poles.imag))
    out = _pole_sum_member(ws, wi, dec.view(), kappa, _oriented(f_in, False), width, antisymmetric)
    partner = dec.partner_view()
    if not partner.is_null:
        out = out + _pole_sum_member(
            ws, wi, partner, kappa, _oriented(f_in, True), width, antisymmetric
        )
    return _finite(out)


def redistribution_vacuum(omega_s, omega_i, dec: PoleDecomposition, kappa: float, f_in):
    """Empty-cavity-population form: -4 pi k^2 G(ws) sum_a u_a [1/(w_a - wi) + i Gbip] F."""
    _require_analytic(f_in)
    ws, wi = np.broadcast_arrays(np.asarray(omega_s, float), np.asarray(omega_i, float))
    v = dec.view()
    omega = ws + wi
    bip = v.bip(omega)
    acc = np.zeros(ws.shape, complex)
    for p, u in zip(v.poles, v.u):
        acc += u * (1 / (p - wi) + 1j * bip) * f_in(omega - p, p + 0 * wi)
    return -4 * np.pi * kappa**2 * v.g(ws) * acc


def _finite(values):
    if not np.all(np.isfinite(values)):
        raise SingularityError("residue sum evaluated on top of a pole")
    return values


# ----------------------------------------------------------------- quadrature


def _support_window(lo_hi_pairs):
    lo = np.min([p[0] for p in lo_hi_pairs], axis=0)
    hi = np.max([p[1] for p in lo_hi_pairs], axis=0)
    return lo, hi


def _grid_lines(grid: JsaGrid, ws, wi):
    """Extents and node crossings of both integration lines for a sampled input."""
    s0, s1, i0, i1 = grid.support()
    omega = ws + wi
    # term 1: (x, omega - x) and (omega - x, x)
    t1 = [
        (np.maximum(s0, omega - i1), np.minimum(s1, omega - i0)),
        (np.maximum(i0, omega - s1), np.minimum(i1, omega - s0)),
    ]
    # term 2: (ws - x, wi + x) and (wi + x, ws - x)
    t2 = [
        (np.maximum(ws - s1, i0 - wi), np.minimum(ws - s0, i1 - wi)),
        (np.maximum(s0 - wi, ws - i1), np.minimum(s1 - wi, ws - i0)),
    ]
    as_, ai = grid.axis_s, grid.axis_i
    k1 = np.concatenate(
        [np.broadcast_to(as_, ws.shape + as_.shape), omega[:, None] - ai[None, :],
         np.broadcast_to(ai, ws.shape + ai.shape), omega[:, None] - as_[None, :]], axis=1)
    k2 = np.concatenate(
        [ws[:, None] - as_[None, :], ai[None, :] - wi[:, None],
         as_[None, :] - wi[:, None], ws[:, None] - ai[None, :]], axis=1)
    return t1, t2, k1, k2


def redistribution_jsa_quadrature(omega_s, omega_i, dec: PoleDecomposition, kappa: float, f_in,
                                  *, rel_tol: float = 1e-8, max_subdivisions: int = 4000,
                                  half_width: float | None = None,
                                  amplitude_scale: float = 0.0) -> QuadResult:
    """Redistribution amplitude by adaptive quadrature over the exchanged frequency.

    Returns a ``QuadResult`` whose ``value`` is the amplitude and ``error`` the
    absolute error estimate, both already scaled by the 4*pi*kappa^2 prefactor.
    The 1/x principal value is taken by subtracting the integrand's value at 0
    over a window symmetric about 0.  Points are converged once their error is
    below ``rel_tol`` times either their own magnitude or ``amplitude_scale``
    (typically the peak input amplitude), so far-off-peak points where the
    amplitude is negligible do not drive the refinement.
    """
    ws, wi = np.broadcast_arrays(np.asarray(omega_s, float), np.asarray(omega_i, float))
    shape = ws.shape
    ws, wi = ws.ravel(), wi.ravel()
    n = ws.size
    if kappa == 0 or n == 0:
        z = np.zeros(n)
        return QuadResult(np.zeros(shape, complex), z.reshape(shape),
                          np.ones(shape, bool), np.zeros(shape, np.int64))
    sampled = isinstance(f_in, JsaGrid)
    views = [dec.view()]
    partner = dec.partner_view()
    if not partner.is_null:
        views.append(partner)
    if sampled:
        per_point = 4 * (f_in.shape[0] + f_in.shape[1]) + 8
    else:
        per_point = 12
    chunk = max(1, QUAD_BATCH_BUDGET // per_point)
    pref = 4 * np.pi * kappa**2
    # the two integrals share the floor
    abs_tol = max(0.5 * rel_tol * amplitude_scale / pref, 1e-300)
    parts = [
        _quadrature_chunk(ws[k:k + chunk], wi[k:k + chunk], dec, views, kappa, f_in, sampled,
                          rel_tol, abs_tol, max_subdivisions, half_width)
        for k in range(0, n, chunk)
    ]
    value = np.concatenate([p.value for p in parts]).reshape(shape)
    error = np.concatenate([p.error for p in parts]).reshape(shape)
    conv = np.concatenate([p.converged for p in parts]).reshape(shape)
    subs = np.concatenate([p.subdivisions for p in parts]).reshape(shape)
    return QuadResult(value, error, conv, subs).raise_if_failed("redistribution quadrature")


def _quadrature_chunk(ws, wi, dec, views, kappa, f_in, sampled, rel_tol, abs_tol, max_sub,
                      half_width):
    n = ws.size
    omega = ws + wi
    re = dec.poles.real

    def s1(o, x):
        w = omega[o]
        return f_in(x, w - x) + f_in(w - x, x)

    def s2(o, x):
        return f_in(ws[o] - x, wi[o] + x) + f_in(wi[o] + x, ws[o] - x)

    def f1(o, x):
        k = 0
        for v in views:
            k = k + kernels.quadrature_term1(ws[o], wi[o], x, v.poles, v.u, v.uc, v.unit)
        return k * s1(o, x)

    def pr(o, x):
        p_tot = r_tot = 0
        for v in views:
            p, r = kernels.quadrature_term2(ws[o], wi[o], x, v.poles, v.u, v.uc, v.unit)
            p_tot = p_tot + p
            r_tot = r_tot + r
        return p_tot, r_tot

    own = np.arange(n)
    p0, _ = pr(own, np.zeros(n))
    pv_anchor = p0 * s2(own, np.zeros(n))

    c1 = omega / 2
    if sampled:
        t1, t2, k1, k2 = _grid_lines(f_in, ws, wi)
        lo1, hi1 = _support_window(t1)
        lo2, hi2 = _support_window(t2)
        w1 = np.maximum(np.maximum(hi1 - c1, c1 - lo1), 1e-12)
        w2 = np.maximum(np.maximum(np.abs(lo2), np.abs(hi2)), 1e-12)
        tails = False
        marks1 = np.concatenate([k1, np.broadcast_to(re, (n, 2))], axis=1)
        marks2 = np.concatenate([k2, np.zeros((n, 1))], axis=1)
    else:
        w = default_window(dec) if half_width is None else half_width
        w1 = np.full(n, w)
        w2 = np.full(n, w)
        tails = True
        split = re[0] - re[1]
        marks1 = np.broadcast_to(re, (n, 2))
        marks2 = np.stack(
            [np.zeros(n), re[0] - wi, re[1] - wi, ws - re[0], ws - re[1],
             np.full(n, split), np.full(n, -split)], axis=1)

    def f2(o, x):
        p, r = pr(o, x)
        sv = s2(o, x)
        core = np.abs(x) <= w2[o]
        num = p * sv - np.where(core, pv_anchor[o], 0)
        return num / x + r * sv

    q1 = integrate_line(f1, c1, w1, marks1, tails=tails, rel_tol=rel_tol, abs_tol=abs_tol,
                        max_subdivisions=max_sub)
    q2 = integrate_line(f2, np.zeros(n), w2, marks2, tails=tails, rel_tol=rel_tol,
                        abs_tol=abs_tol, max_subdivisions=max_sub)
    pref = 4 * np.pi * kappa**2
    return QuadResult(
        pref * (q1.value + q2.value),
        pref * (q1.error + q2.error),
        q1.converged & q2.converged,
        q1.subdivisions + q2.subdivisions,
    )


# ----------------------------------------------------------------- grids


def symmetrize(grid: JsaGrid) -> JsaGrid:
    """Average the amplitude with its transpose (exchange of the two photons)."""
    if grid.shape[0] != grid.shape[1] or not np.allclose(
        grid.axis_s, grid.axis_i, rtol=0, atol=1e-12
    ):
        raise SymmetryDomainError("symmetrization needs a square grid with identical axes")
    a = grid.amplitudes
    return grid.with_amplitudes(0.5 * (a + a.T), symmetrized="true")


def default_mode(config: ModelConfig) -> EngineMode:
    """Residue form for analytic inputs, quadrature for sampled ones."""
    if config.solver.input_jsa == "measured":
        return EngineMode(path="quadrature")
    return EngineMode(path="pole_sum")


def input_source(config: ModelConfig):
    if config.solver.input_jsa == "measured":
        return load_measured_jsa(config.solver.measured_path)
    return AnalyticJsa.spdc(config.pump)


@dataclass
class ScatteringResult:
    input: JsaGrid
    coherent: JsaGrid
    redistribution: JsaGrid
    output: JsaGrid
    mode: EngineMode
    max_quad_error: float = 0.0
    wall_time: float = 0.0
    error_grid: np.ndarray | None = field(default=None, repr=False)

    @property
    def symmetrized_output(self) -> JsaGrid:
        return symmetrize(self.output)


def scatter(config: ModelConfig, mode: EngineMode = EngineMode(), *, source=None,
            threads: int = 1, antisymmetric: bool = True) -> ScatteringResult:
    """Evaluate input, coherent, redistribution and output amplitudes on the grid.

    Rows are processed in fixed blocks, so the result does not depend on the
    number of worker threads.
    """
    start = time.perf_counter()
    f_in = input_source(config) if source is None else source
    if mode.path == "pole_sum":
        _require_analytic(f_in)
    dec = decompose(config.tc)
    kappa = config.tc.kappa
    axis = config.grid.axis()
    n = axis.size
    input_grid = evaluate_on_grid(f_in, config.grid)
    scale = float(np.max(np.abs(input_grid.amplitudes)))

    def block(r0):
        rows = slice(r0, min(r0 + BLOCK_ROWS, n))
        ws, wi = np.meshgrid(axis[rows], axis, indexing="ij")
        fc = coherent_jsa(ws, wi, dec, kappa, f_in, config.tc.include_delta_sigma)
        if mode.path == "pole_sum":
            fr = redistribution_jsa_pole_sum(ws, wi, dec, kappa, f_in,
                                             vacuum_fast_path=mode.vacuum_fast_path,
                                             antisymmetric=antisymmetric)
            err = np.zeros(ws.shape)
        else:
            q = redistribution_jsa_quadrature(ws, wi, dec, kappa, f_in,
                                              rel_tol=config.solver.quad_rel_tol,
                                              max_subdivisions=config.solver.quad_max_subdivisions,
                                              amplitude_scale=scale)
            fr, err = q.value, q.error
        return fc, fr, err

    starts = range(0, n, BLOCK_ROWS)
    workers = _worker_count(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(block, starts))
    else:
        blocks = [block(r0) for r0 in starts]
    fc = np.concatenate([b[0] for b in blocks])
    fr = np.concatenate([b[1] for b in blocks])
    err = np.concatenate([b[2] for b in blocks])

    meta = {
        "path": mode.path,
        "vacuum_fast_path": str(mode.vacuum_fast_path).lower(),
        "config_sha256": config.config_hash(),
    }
    if config.pump is not None and config.pump.theta1 != config.pump.theta2:
        meta["asymmetric_angles"] = "experimental" if mode.path == "pole_sum" else "true"
    coherent = input_grid.with_amplitudes(fc, component="coherent", **meta)
    redis = input_grid.with_amplitudes(fr, component="redistribution", **meta)
    max_err = float(err.max()) if err.size else 0.0
    output = input_grid.with_amplitudes(fc + fr, component="output",
                                        max_quad_error=f"{max_err:.3e}", **meta)
    return ScatteringResult(
        input=input_grid.with_amplitudes(input_grid.amplitudes, component="input"),
        coherent=coherent,
        redistribution=redis,
        output=output,
        mode=mode,
        max_quad_error=max_err,
        wall_time=time.perf_counter() - start,
        error_grid=err,
    )


def output_jsa(config: ModelConfig, mode: EngineMode = EngineMode(), **kwargs) -> JsaGrid:
    return scatter(config, mode, **kwargs).output


def _worker_count(threads: int) -> int:
    if threads == 0:
        import os

        return os.cpu_count() or 1
    return max(1, threads)
