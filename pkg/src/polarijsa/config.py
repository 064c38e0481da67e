"""Physical parameters and the validated run configuration.

All energies are in eV with hbar = 1.  A configuration document is plain JSON
(see ``validate_config``); ``ModelConfig.to_document`` produces a document that
validates back to an identical configuration.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError, ValidationError

HBAR_C_EV_NM = 197.3269804
NM_PER_MM = 1.0e6
ENV_PREFIX = "POLARIJSA_"
# Environment variables with the prefix that are not configuration overrides.
RESERVED_ENV = {"POLARIJSA_BACKEND"}


def _finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValidationError(name, "a finite value", value)


@dataclass(frozen=True)
class ComplexFrequency:
    """A decaying resonance ``energy - 1j * linewidth``."""

    energy: float
    linewidth: float

    def __post_init__(self):
        _finite("energy", self.energy)
        _finite("linewidth", self.linewidth)
        if self.linewidth < 0:
            raise ValidationError("linewidth", ">= 0", self.linewidth)

    @property
    def value(self) -> complex:
        return complex(self.energy, -self.linewidth)

    @classmethod
    def from_complex(cls, z: complex, *, slack: float = 1e-15) -> "ComplexFrequency":
        width = -z.imag
        if -slack <= width < 0:
            width = 0.0
        return cls(float(z.real), float(width))


@dataclass(frozen=True)
class TcParams:
    """Tavis-Cummings cavity parameters.

    ``coupling`` is the collective coupling lambda*sqrt(N).  ``sigma_a_bar`` is
    the combined eV-valued term lambda*N*<sigma a> that enters the expansion
    coefficients; it is zero for every case considered in practice.
    """

    omega_o: float
    omega_c: float
    gamma_o: float
    kappa: float
    coupling: float
    n_bar: float = 0.0
    sigma_z_bar: float = -1.0
    sigma_a_bar: complex = 0j
    include_delta_sigma: bool = False

    def __post_init__(self):
        for f in ("omega_o", "omega_c", "gamma_o", "kappa", "coupling", "n_bar", "sigma_z_bar"):
            _finite(f, getattr(self, f))
        if not (math.isfinite(self.sigma_a_bar.real) and math.isfinite(self.sigma_a_bar.imag)):
            raise ValidationError("sigma_a_bar", "a finite complex value", self.sigma_a_bar)
        for f in ("omega_o", "omega_c"):
            if getattr(self, f) <= 0:
                raise ValidationError(f, "> 0", getattr(self, f))
        for f in ("gamma_o", "kappa", "coupling", "n_bar"):
            if getattr(self, f) < 0:
                raise ValidationError(f, ">= 0", getattr(self, f))
        if not -1.0 <= self.sigma_z_bar <= 1.0:
            raise ValidationError("sigma_z_bar", "-1 <= sigma_z_bar <= 1", self.sigma_z_bar)

    @property
    def is_vacuum(self) -> bool:
        return self.n_bar == 0 and self.sigma_a_bar == 0

    def with_coupling_ratio(self, ratio: float) -> "TcParams":
        return replace(self, coupling=ratio * self.omega_o)


@dataclass(frozen=True)
class PumpParams:
    """SPDC pump and crystal parameters (angles in degrees, length in mm)."""

    omega_p: float
    sigma_p: float
    crystal_length: float
    theta1: float
    theta2: float
    refractive_index: float = 1.0
    angles_relabeled: bool = field(default=False, compare=False)

    def __post_init__(self):
        for f in ("omega_p", "sigma_p", "crystal_length", "theta1", "theta2", "refractive_index"):
            _finite(f, getattr(self, f))
        if self.sigma_p <= 0:
            raise ValidationError("sigma_p", "> 0", self.sigma_p)
        if self.crystal_length <= 0:
            raise ValidationError("crystal_length", "> 0", self.crystal_length)
        if self.refractive_index <= 0:
            raise ValidationError("refractive_index", "> 0", self.refractive_index)
        for f in ("theta1", "theta2"):
            if not 0.0 <= getattr(self, f) < 90.0:
                raise ValidationError(f, "0 <= angle < 90 degrees", getattr(self, f))

    @property
    def crystal_length_nm(self) -> float:
        return self.crystal_length * NM_PER_MM

    def relabeled(self) -> "PumpParams":
        """Order the collection angles so that cos(theta1) <= cos(theta2)."""
        if math.cos(math.radians(self.theta1)) <= math.cos(math.radians(self.theta2)):
            return self
        return replace(self, theta1=self.theta2, theta2=self.theta1, angles_relabeled=True)


@dataclass(frozen=True)
class GridSpec:
    omega_min: float = 1.75
    omega_max: float = 1.87
    n_points: int = 512

    def __post_init__(self):
        _finite("omega_min", self.omega_min)
        _finite("omega_max", self.omega_max)
        if not self.omega_min < self.omega_max:
            raise ValidationError("omega_max", "> omega_min", self.omega_max)
        if self.n_points < 2:
            raise ValidationError("n_points", ">= 2", self.n_points)

    def axis(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_points)

    @property
    def step(self) -> float:
        return (self.omega_max - self.omega_min) / (self.n_points - 1)


@dataclass(frozen=True)
class SolverSettings:
    quad_rel_tol: float = 1e-8
    quad_max_subdivisions: int = 4000
    # "spdc" or the path of a measured jsa-grid file
    input_jsa: str = "spdc"
    measured_path: str | None = None

    def __post_init__(self):
        if not 0 < self.quad_rel_tol < 1:
            raise ValidationError("quad_rel_tol", "0 < tol < 1", self.quad_rel_tol)
        if self.quad_max_subdivisions < 1:
            raise ValidationError("quad_max_subdivisions", ">= 1", self.quad_max_subdivisions)
        if self.input_jsa not in ("spdc", "measured"):
            raise ValidationError("input_jsa", "'spdc' or 'measured'", self.input_jsa)
        if self.input_jsa == "measured" and not self.measured_path:
            raise ValidationError("input_jsa.measured", "a file path", self.measured_path)


@dataclass(frozen=True)
class ModelConfig:
    tc: TcParams
    pump: PumpParams | None
    grid: GridSpec = GridSpec()
    solver: SolverSettings = SolverSettings()

    def to_document(self) -> dict:
        tc = self.tc
        doc: dict[str, Any] = {
            "tc": {
                "omega_o_ev": tc.omega_o,
                "omega_c_ev": tc.omega_c,
                "gamma_o_ev": tc.gamma_o,
                "kappa_ev": tc.kappa,
                "coupling_ev": tc.coupling,
                "n_bar": tc.n_bar,
                "sigma_z_bar": tc.sigma_z_bar,
                "sigma_a_bar": [tc.sigma_a_bar.real, tc.sigma_a_bar.imag],
                "include_delta_sigma": tc.include_delta_sigma,
            },
            "grid": {
                "omega_min_ev": self.grid.omega_min,
                "omega_max_ev": self.grid.omega_max,
                "n_points": self.grid.n_points,
            },
            "solver": {
                "quad_rel_tol": self.solver.quad_rel_tol,
                "quad_max_subdivisions": self.solver.quad_max_subdivisions,
                "input_jsa": "spdc"
                if self.solver.input_jsa == "spdc"
                else {"measured": self.solver.measured_path},
            },
        }
        if self.pump is not None:
            p = self.pump
            doc["pump"] = {
                "omega_p_ev": p.omega_p,
                "sigma_p_ev": p.sigma_p,
                "crystal_length_mm": p.crystal_length,
                "theta1_deg": p.theta1,
                "theta2_deg": p.theta2,
                "refractive_index": p.refractive_index,
            }
        return doc

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def with_tc(self, **changes) -> "ModelConfig":
        return replace(self, tc=replace(self.tc, **changes))

    def with_grid(self, **changes) -> "ModelConfig":
        return replace(self, grid=replace(self.grid, **changes))


# ---------------------------------------------------------------- schema

_TC_KEYS = {
    "omega_o_ev", "omega_c_ev", "gamma_o_ev", "kappa_ev", "coupling_ev",
    "coupling_over_omega_o", "n_bar", "sigma_z_bar", "sigma_a_bar", "include_delta_sigma",
}
_TC_REQUIRED = ("omega_o_ev", "omega_c_ev", "gamma_o_ev", "kappa_ev", "n_bar", "sigma_z_bar")
_PUMP_KEYS = ("omega_p_ev", "sigma_p_ev", "crystal_length_mm", "theta1_deg", "theta2_deg", "refractive_index")
_GRID_KEYS = ("omega_min_ev", "omega_max_ev", "n_points")
_SOLVER_KEYS = {"quad_rel_tol", "quad_max_subdivisions", "input_jsa"}


def _section(raw: Mapping, name: str, allowed, required: bool) -> dict | None:
    if name not in raw:
        if required:
            raise ConfigError(name, "missing required section")
        return None
    sec = raw[name]
    if not isinstance(sec, Mapping):
        raise ConfigError(name, "must be an object")
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"{name}.{key}", "unknown key")
    return dict(sec)


def _number(sec: Mapping, section: str, key: str, default=None) -> float:
    if key not in sec:
        if default is None:
            raise ConfigError(f"{section}.{key}", "missing required key")
        return default
    value = sec[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}", f"expected a number, got {type(value).__name__}")
    return float(value)


def _integer(sec: Mapping, section: str, key: str, default: int) -> int:
    if key not in sec:
        return default
    value = sec[key]
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(f"{section}.{key}", "expected an integer")
    return value


def validate_config(raw: Mapping) -> ModelConfig:
    """Check a parsed configuration document and build a ``ModelConfig``.

    Schema problems (unknown or missing keys, wrong types) raise
    ``ConfigError``; physically invalid values raise ``ValidationError``.
    """
    if not isinstance(raw, Mapping):
        raise ConfigError("<root>", "configuration must be a JSON object")
    for key in raw:
        if key not in ("tc", "pump", "grid", "solver"):
            raise ConfigError(key, "unknown key")

    tc_raw = _section(raw, "tc", _TC_KEYS, required=True)
    has_abs = "coupling_ev" in tc_raw
    has_rel = "coupling_over_omega_o" in tc_raw
    if has_abs == has_rel:
        raise ConfigError("tc.coupling_ev", "exactly one of coupling_ev / coupling_over_omega_o is required")
    for key in _TC_REQUIRED:
        if key not in tc_raw:
            raise ConfigError(f"tc.{key}", "missing required key")
    omega_o = _number(tc_raw, "tc", "omega_o_ev")
    coupling = (
        _number(tc_raw, "tc", "coupling_ev")
        if has_abs
        else _number(tc_raw, "tc", "coupling_over_omega_o") * omega_o
    )
    sa = tc_raw.get("sigma_a_bar", [0.0, 0.0])
    if (
        not isinstance(sa, (list, tuple))
        or len(sa) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in sa)
    ):
        raise ConfigError("tc.sigma_a_bar", "expected [re, im]")
    ids = tc_raw.get("include_delta_sigma", False)
    if not isinstance(ids, bool):
        raise ConfigError("tc.include_delta_sigma", "expected a boolean")
    tc = TcParams(
        omega_o=omega_o,
        omega_c=_number(tc_raw, "tc", "omega_c_ev"),
        gamma_o=_number(tc_raw, "tc", "gamma_o_ev"),
        kappa=_number(tc_raw, "tc", "kappa_ev"),
        coupling=coupling,
        n_bar=_number(tc_raw, "tc", "n_bar"),
        sigma_z_bar=_number(tc_raw, "tc", "sigma_z_bar"),
        sigma_a_bar=complex(float(sa[0]), float(sa[1])),
        include_delta_sigma=ids,
    )

    solver_raw = _section(raw, "solver", _SOLVER_KEYS, required=False) or {}
    input_jsa = solver_raw.get("input_jsa", "spdc")
    measured = None
    if isinstance(input_jsa, Mapping):
        if set(input_jsa) != {"measured"} or not isinstance(input_jsa["measured"], str):
            raise ConfigError("solver.input_jsa", 'expected "spdc" or {"measured": path}')
        measured = input_jsa["measured"]
        input_jsa = "measured"
    elif input_jsa != "spdc":
        raise ConfigError("solver.input_jsa", 'expected "spdc" or {"measured": path}')
    defaults = SolverSettings()
    solver = SolverSettings(
        quad_rel_tol=_number(solver_raw, "solver", "quad_rel_tol", defaults.quad_rel_tol),
        quad_max_subdivisions=_integer(
            solver_raw, "solver", "quad_max_subdivisions", defaults.quad_max_subdivisions
        ),
        input_jsa=input_jsa,
        measured_path=measured,
    )

    pump_raw = _section(raw, "pump", set(_PUMP_KEYS), required=input_jsa == "spdc")
    pump = None
    if pump_raw is not None:
        pump = PumpParams(
            omega_p=_number(pump_raw, "pump", "omega_p_ev"),
            sigma_p=_number(pump_raw, "pump", "sigma_p_ev"),
            crystal_length=_number(pump_raw, "pump", "crystal_length_mm"),
            theta1=_number(pump_raw, "pump", "theta1_deg"),
            theta2=_number(pump_raw, "pump", "theta2_deg"),
            refractive_index=_number(pump_raw, "pump", "refractive_index", 1.0),
        ).relabeled()

    grid_raw = _section(raw, "grid", set(_GRID_KEYS), required=False) or {}
    gd = GridSpec()
    grid = GridSpec(
        omega_min=_number(grid_raw, "grid", "omega_min_ev", gd.omega_min),
        omega_max=_number(grid_raw, "grid", "omega_max_ev", gd.omega_max),
        n_points=_integer(grid_raw, "grid", "n_points", gd.n_points),
    )
    return ModelConfig(tc=tc, pump=pump, grid=grid, solver=solver)


def load_config(path: str | os.PathLike | None, environ: Mapping[str, str] | None = None):
    """Read a JSON config file, apply environment overrides, and validate.

    Without a path the built-in reference configuration is the starting point.
    Returns ``(config, overrides)`` where ``overrides`` lists the applied
    ``section.key=value`` strings.
    """
    if path is None:
        raw = reference_config().to_document()
    else:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(str(path), "configuration file not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(str(path), f"invalid JSON ({exc})") from None
    raw, applied = apply_env_overrides(raw, os.environ if environ is None else environ)
    return validate_config(raw), applied


def apply_env_overrides(raw: Mapping, environ: Mapping[str, str]):
    """Overlay ``POLARIJSA_<SECTION>_<KEY>=<json value>`` variables onto ``raw``.

    ``POLARIJSA_TC_N_BAR=1`` sets ``tc.n_bar``.  Values are parsed as JSON and
    fall back to plain strings.
    """
    doc = json.loads(json.dumps(raw))
    applied = []
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX) or name in RESERVED_ENV:
            continue
        rest = name[len(ENV_PREFIX):].lower()
        section, _, key = rest.partition("_")
        if section not in ("tc", "pump", "grid", "solver") or not key:
            raise ConfigError(name, "unrecognized override variable")
        text = environ[name]
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        sec = doc.setdefault(section, {})
        if section == "tc" and key in ("coupling_ev", "coupling_over_omega_o"):
            sec.pop("coupling_ev", None)
            sec.pop("coupling_over_omega_o", None)
        sec[key] = value
        applied.append(f"{section}.{key}={text}")
    return doc, applied


def reference_config(coupling_ratio: float = 0.0, n_bar: float = 0.0) -> ModelConfig:
    """Reference configuration used throughout the examples and tests."""
    return validate_config(
        {
            "tc": {
                "omega_o_ev": 1.81,
                "omega_c_ev": 1.81,
                "gamma_o_ev": 0.020,
                "kappa_ev": 0.025,
                "coupling_over_omega_o": coupling_ratio,
                "n_bar": n_bar,
                "sigma_z_bar": -1.0,
                "sigma_a_bar": [0.0, 0.0],
            },
            "pump": {
                "omega_p_ev": 3.62,
                "sigma_p_ev": 0.010,
                "crystal_length_mm": 0.1,
                "theta1_deg": 3.5,
                "theta2_deg": 3.5,
                "refractive_index": 1.0,
            },
        }
    )


__all__ = [
    "HBAR_C_EV_NM",
    "ComplexFrequency",
    "TcParams",
    "PumpParams",
    "GridSpec",
    "SolverSettings",
    "ModelConfig",
    "validate_config",
    "load_config",
    "apply_env_overrides",
    "reference_config",
]
