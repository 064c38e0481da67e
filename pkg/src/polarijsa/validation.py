"""Self-checks run by ``polarijsa validate``.

Every check compares two independent routes to the same quantity.  The engine
cross-path check uses a rational probe input whose poles sit where closing
the residue contours is legitimate, so the two paths must agree to rounding;
the configured SPDC input is not used there because the Gaussian and sinc
factors grow off the real axis.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import engine
from .config import ModelConfig
from .entanglement import entropy_by_eigendecomposition, schmidt_decompose
from .errors import GridLoadError, NumericError
from .greens import PoleDecomposition, decompose, green_g_closed, green_g_conj_closed
from .jsa import AnalyticJsa, evaluate_on_grid
from .twoparticle import (
    bipolariton_g,
    bipolariton_g_oracle,
    excited_coherence_g,
    excited_coherence_g_oracle,
)

FAULTS = ("u_plus",)
MAX_ENTROPY_POINTS = 128


@dataclass
class CheckResult:
    name: str
    passed: bool
    metric: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.metric = float(self.metric)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        text = f"[{flag}] {self.name}: {self.metric:.3e} (limit {self.threshold:.1e})"
        return text + (f"  {self.detail}" if self.detail else "")


@dataclass
class OracleReport:
    checks: list[CheckResult] = field(default_factory=list)
    seed: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        lines = [c.line() for c in self.checks]
        lines += [f"note: {n}" for n in self.notes]
        lines.append("all checks passed" if self.passed else "validation FAILED")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "seed": self.seed,
            "notes": self.notes,
            "checks": [dataclasses.asdict(c) for c in self.checks],
        }


def probe_input(center: float) -> AnalyticJsa:
    """Rational amplitude that decays in the half-planes used by the residue form."""
    c_i, c_s = center - 0.005, center + 0.005

    def f(zs, zi):
        return 1.0 / ((zi - c_i - 0.03j) * (zs - c_s + 0.025j))

    return AnalyticJsa(f, "rational-probe")


def _rel(a, b) -> float:
    scale = np.max(np.abs(b))
    return float(np.max(np.abs(a - b)) / scale) if scale > 0 else float(np.max(np.abs(a)))


def _rel_l2(a, b) -> float:
    scale = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / scale) if scale > 0 else float(np.linalg.norm(a))


def _corrupt(dec: PoleDecomposition, fault: str | None) -> PoleDecomposition:
    if fault is None:
        return dec
    if fault == "u_plus":
        return dataclasses.replace(dec, u_plus=dec.u_plus * 1.01)
    raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")


def _timed(fn: Callable[[], CheckResult]) -> CheckResult:
    start = time.perf_counter()
    res = fn()
    res.seconds = time.perf_counter() - start
    return res


def check_green_paths(config, dec, rng) -> CheckResult:
    tc = config.tc
    spread = 10 * max(-dec.poles.imag.min(), tc.coupling, 0.01)
    z = rng.uniform(tc.omega_o - spread, tc.omega_o + spread, 64) + 1j * rng.uniform(
        -spread, spread, 64
    )
    v = dec.view()
    err = _rel(v.g(z), green_g_closed(z, tc))
    if tc.n_bar != 0 or tc.sigma_a_bar != 0:
        err = max(err, _rel(v.gc(z), green_g_conj_closed(z, tc)))
    # residue weights must reproduce the large-frequency limit of G and G*
    err = max(err, abs(dec.coeffs.sum() - (tc.n_bar + 1)) / (tc.n_bar + 1))
    if tc.n_bar:
        err = max(err, abs(dec.conj_coeffs.sum() - tc.n_bar) / tc.n_bar)
    return CheckResult("green_function_paths", err < 1e-10, err, 1e-10,
                       "pole sum vs rational form, residue sums")


def check_two_particle(config, dec, rng) -> CheckResult:
    tc = config.tc
    omega = rng.uniform(2 * tc.omega_o - 0.1, 2 * tc.omega_o + 0.1, 24)
    shift = rng.uniform(-0.1, 0.1, 24)
    err = _rel(bipolariton_g(omega, dec), bipolariton_g_oracle(omega, dec).value)
    detail = "bipolariton"
    if not dec.is_vacuum:
        err = max(err, _rel(excited_coherence_g(shift, dec),
                            excited_coherence_g_oracle(shift, dec).value))
        detail += " and excited-state coherence"
    return CheckResult("two_particle_oracle", err < 1e-6, err, 1e-6,
                       detail + " vs convolution quadrature")


def _probe_axes(config, n=12):
    c = 0.5 * (config.grid.omega_min + config.grid.omega_max)
    half = 0.5 * (config.grid.omega_max - config.grid.omega_min)
    ax = np.linspace(c - half, c + half, n)
    return c, np.meshgrid(ax, ax, indexing="ij")


def check_cross_path(config, dec, rng) -> CheckResult:
    kappa = config.tc.kappa
    c, (ws, wi) = _probe_axes(config)
    probe = probe_input(c)
    if kappa == 0:
        return CheckResult("engine_cross_path", True, 0.0, 1e-3, "kappa = 0: redistribution is zero")
    quad = engine.redistribution_jsa_quadrature(ws, wi, dec, kappa, probe,
                                                rel_tol=config.solver.quad_rel_tol)
    poles = engine.redistribution_jsa_pole_sum(ws, wi, dec, kappa, probe, vacuum_fast_path=False)
    coh = engine.coherent_jsa(ws, wi, dec, kappa, probe)

    def sym(a):
        return 0.5 * (a + a.T)

    err = _rel_l2(sym(coh + poles), sym(coh + quad.value))
    return CheckResult("engine_cross_path", err < 1e-3, err, 1e-3,
                       "residue form vs quadrature, rational probe input")


def check_vacuum_reduction(config, dec, rng) -> CheckResult:
    tc = config.tc
    vac = decompose(dataclasses.replace(tc, n_bar=0.0, sigma_a_bar=0j))
    if dec.is_vacuum:
        vac = dec
    c, (ws, wi) = _probe_axes(config)
    probe = probe_input(c)
    fast = engine.redistribution_jsa_pole_sum(ws, wi, vac, max(tc.kappa, 1e-3), probe)
    full = engine.redistribution_jsa_pole_sum(ws, wi, vac, max(tc.kappa, 1e-3), probe,
                                              vacuum_fast_path=False)
    err = _rel(fast, full)
    return CheckResult("vacuum_reduction", err < 1e-10, err, 1e-10,
                       "empty-cavity closed form vs general residue sum")


def check_entropy(config, dec, rng) -> CheckResult:
    n = min(config.grid.n_points, MAX_ENTROPY_POINTS)
    grid = evaluate_on_grid(_input_or_probe(config), dataclasses.replace(config.grid, n_points=n))
    base = schmidt_decompose(grid).entropy
    scale = complex(*rng.normal(size=2))
    errs = [
        abs(schmidt_decompose(grid.with_amplitudes(scale * grid.amplitudes)).entropy - base),
        abs(schmidt_decompose(grid.with_amplitudes(grid.amplitudes.T)).entropy - base),
        abs(entropy_by_eigendecomposition(grid.amplitudes) - base),
    ]
    err = max(errs)
    return CheckResult("entropy_invariance", err < 1e-8, err, 1e-8,
                       f"scale, transpose and eigen-oracle on the {n}x{n} input grid")


def _input_or_probe(config):
    try:
        return engine.input_source(config)
    except GridLoadError:
        c = 0.5 * (config.grid.omega_min + config.grid.omega_max)
        return probe_input(c)


CHECKS = (check_green_paths, check_two_particle, check_cross_path, check_vacuum_reduction,
          check_entropy)


def run_validation(config: ModelConfig, *, seed: int = 0, fault: str | None = None) -> OracleReport:
    rng = np.random.default_rng(seed)
    dec = _corrupt(decompose(config.tc), fault)
    report = OracleReport(seed=seed)
    if fault:
        report.notes.append(f"fault injected: {fault}")
    if config.tc.kappa == 0:
        report.notes.append("kappa = 0: the redistribution amplitude vanishes identically")
    for check in CHECKS:
        try:
            res = _timed(lambda: check(config, dec, rng))
        except NumericError as exc:
            res = CheckResult(check.__name__.removeprefix("check_"), False, float("nan"), 0.0,
                              f"numeric failure: {exc}")
        report.checks.append(res)
    return report
