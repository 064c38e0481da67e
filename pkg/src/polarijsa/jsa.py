"""Input joint spectral amplitudes: the analytic SPDC model and sampled grids.

Grids are exchanged as ``jsa-grid v1`` CSV files::

    # jsa-grid v1
    # axis_s_ev: 1.75,1.76,...
    # axis_i_ev: 1.75,1.76,...
    1.0+0.5j,0.25-1e-3j,...      <- one row per signal frequency

Floats are written with 17 significant digits, so a write/read round trip is
exact.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .config import HBAR_C_EV_NM, GridSpec, PumpParams
from .errors import (
    GridFileNotFound,
    MalformedGridHeader,
    ModeError,
    NonFiniteAmplitudeError,
    NonUniformAxisError,
)

HEADER = "# jsa-grid v1"
AXIS_REL_TOL = 1e-9
SINC_SERIES_RADIUS = 1e-4


# ----------------------------------------------------------------- grids


@dataclass(frozen=True)
class JsaGrid:
    """Complex amplitudes on a uniform (signal, idler) grid, indexed ``[s, i]``."""

    axis_s: np.ndarray
    axis_i: np.ndarray
    amplitudes: np.ndarray
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        axis_s = np.array(self.axis_s, dtype=float)
        axis_i = np.array(self.axis_i, dtype=float)
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (axis_s.size, axis_i.size):
            raise ValueError(
                f"amplitude shape {amps.shape} does not match axes ({axis_s.size}, {axis_i.size})"
            )
        for name, axis in (("axis_s", axis_s), ("axis_i", axis_i)):
            check_uniform_axis(axis, name)
        if not np.all(np.isfinite(amps)):
            raise NonFiniteAmplitudeError("grid contains non-finite amplitudes")
        for arr in (axis_s, axis_i, amps):
            arr.setflags(write=False)
        object.__setattr__(self, "axis_s", axis_s)
        object.__setattr__(self, "axis_i", axis_i)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def shape(self) -> tuple[int, int]:
        return self.amplitudes.shape

    def with_amplitudes(self, amplitudes, **meta) -> "JsaGrid":
        return JsaGrid(self.axis_s, self.axis_i, amplitudes, {**self.metadata, **meta})

    def support(self) -> tuple[float, float, float, float]:
        return self.axis_s[0], self.axis_s[-1], self.axis_i[0], self.axis_i[-1]

    def __call__(self, zs, zi):
        if np.iscomplexobj(zs) and np.any(np.imag(zs) != 0) or (
            np.iscomplexobj(zi) and np.any(np.imag(zi) != 0)
        ):
            raise ModeError("a sampled JSA cannot be evaluated at complex frequencies")
        return sample_jsa(self, np.real(zs), np.real(zi))


def check_uniform_axis(axis: np.ndarray, name: str = "axis") -> None:
    if axis.ndim != 1 or axis.size < 2:
        raise NonUniformAxisError(f"{name} needs at least two points")
    steps = np.diff(axis)
    if np.any(steps <= 0):
        raise NonUniformAxisError(f"{name} is not strictly increasing")
    step = (axis[-1] - axis[0]) / (axis.size - 1)
    if np.max(np.abs(steps - step)) > AXIS_REL_TOL * max(abs(step), np.max(np.abs(axis))):
        raise NonUniformAxisError(f"{name} is not uniformly spaced")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_grid(grid: JsaGrid, path) -> None:
    lines = [
        HEADER,
        "# axis_s_ev: " + ",".join(_fmt(v) for v in grid.axis_s),
        "# axis_i_ev: " + ",".join(_fmt(v) for v in grid.axis_i),
    ]
    for row in grid.amplitudes:
        lines.append(",".join(f"{c.real:.17g}{c.imag:+.17g}j" for c in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_axis(line: str, label: str, path) -> np.ndarray:
    prefix = f"# {label}:"
    if not line.startswith(prefix):
        raise MalformedGridHeader(f"{path}: expected '{prefix}' line")
    try:
        return np.array([float(v) for v in line[len(prefix):].split(",")])
    except ValueError:
        raise MalformedGridHeader(f"{path}: unreadable {label} values") from None


def load_measured_jsa(path) -> JsaGrid:
    """Read a jsa-grid v1 CSV file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise GridFileNotFound(f"{path}: no such file") from None
    lines = raw.decode("utf-8").splitlines()
    if len(lines) < 3 or lines[0].strip() != HEADER:
        raise MalformedGridHeader(f"{path}: missing '{HEADER}' header")
    axis_s = _parse_axis(lines[1], "axis_s_ev", path)
    axis_i = _parse_axis(lines[2], "axis_i_ev", path)
    rows = [ln for ln in lines[3:] if ln.strip()]
    if len(rows) != axis_s.size:
        raise MalformedGridHeader(f"{path}: {len(rows)} rows for {axis_s.size} signal nodes")
    amps = np.empty((axis_s.size, axis_i.size), dtype=complex)
    for k, row in enumerate(rows):
        cells = row.split(",")
        if len(cells) != axis_i.size:
            raise MalformedGridHeader(f"{path}: row {k} has {len(cells)} cells")
        try:
            amps[k] = [complex(c.strip()) for c in cells]
        except ValueError:
            raise MalformedGridHeader(f"{path}: unreadable amplitude in row {k}") from None
    if not np.all(np.isfinite(amps)):
        raise NonFiniteAmplitudeError(f"{path}: NaN or infinite amplitude")
    check_uniform_axis(axis_s, "axis_s_ev")
    check_uniform_axis(axis_i, "axis_i_ev")
    meta = {"source": str(path), "sha256": hashlib.sha256(raw).hexdigest(), "kind": "measured"}
    return JsaGrid(axis_s, axis_i, amps, meta)


def sample_jsa(grid: JsaGrid, omega_s, omega_i):
    """Bilinear interpolation inside the grid's bounding box, zero outside."""
    ws = np.asarray(omega_s, dtype=float)
    wi = np.asarray(omega_i, dtype=float)
    ws, wi = np.broadcast_arrays(ws, wi)
    out = np.zeros(ws.shape, dtype=complex)
    s0, s1, i0, i1 = grid.support()
    inside = (ws >= s0) & (ws <= s1) & (wi >= i0) & (wi <= i1)
    if not np.any(inside):
        return out
    ns, ni = grid.shape
    fs = (ws[inside] - s0) / (s1 - s0) * (ns - 1)
    fi = (wi[inside] - i0) / (i1 - i0) * (ni - 1)
    # snap coordinates that sit on a node up to rounding
    fs = np.where(np.abs(fs - np.rint(fs)) < 1e-9, np.rint(fs), fs)
    fi = np.where(np.abs(fi - np.rint(fi)) < 1e-9, np.rint(fi), fi)
    ks = np.clip(np.floor(fs).astype(np.intp), 0, ns - 2)
    ki = np.clip(np.floor(fi).astype(np.intp), 0, ni - 2)
    ts = fs - ks
    ti = fi - ki
    a = grid.amplitudes
    val = (
        (1 - ts) * (1 - ti) * a[ks, ki]
        + ts * (1 - ti) * a[ks + 1, ki]
        + (1 - ts) * ti * a[ks, ki + 1]
        + ts * ti * a[ks + 1, ki + 1]
    )
    # exact node hits return the stored value untouched
    on_node = (ts == 0) & (ti == 0)
    val[on_node] = a[ks[on_node], ki[on_node]]
    out[inside] = val
    return out


# ----------------------------------------------------------------- SPDC model


def sinc(z):
    """sin(z)/z for complex arrays, with a series near the origin."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SINC_SERIES_RADIUS
    safe = np.where(small, 1.0, z)
    z2 = z * z
    return np.where(small, 1.0 - z2 / 6.0 + z2 * z2 / 120.0, np.sin(safe) / safe)


def wavevector_mismatch(omega_s, omega_i, pump: PumpParams):
    """Longitudinal and transverse phase mismatch in 1/nm."""
    n = pump.refractive_index
    t1, t2 = math.radians(pump.theta1), math.radians(pump.theta2)
    ws = np.asarray(omega_s)
    wi = np.asarray(omega_i)
    dk_par = (n * pump.omega_p - n * (ws * math.cos(t1) + wi * math.cos(t2))) / HBAR_C_EV_NM
    dk_perp = n * (ws * math.sin(t1) - wi * math.sin(t2)) / HBAR_C_EV_NM
    return dk_par, dk_perp


def pump_envelope(omega, pump: PumpParams):
    return np.exp(-((np.asarray(omega) - pump.omega_p) ** 2) / (4.0 * pump.sigma_p**2))


def spdc_jsa(omega_s, omega_i, pump: PumpParams):
    """Gaussian pump envelope times the two phase-matching sinc factors."""
    ws = np.asarray(omega_s)
    wi = np.asarray(omega_i)
    dk_par, dk_perp = wavevector_mismatch(ws, wi, pump)
    half_len = 0.5 * pump.crystal_length_nm
    return pump_envelope(ws + wi, pump) * sinc(dk_par * half_len) * sinc(dk_perp * half_len)


@dataclass(frozen=True)
class AnalyticJsa:
    """An input amplitude that can be continued to complex frequencies.

    ``func`` takes two broadcastable (possibly complex) arrays.  Use
    ``AnalyticJsa.spdc`` for the down-conversion model.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str = "analytic"
    pump: PumpParams | None = None

    @classmethod
    def spdc(cls, pump: PumpParams) -> "AnalyticJsa":
        pump = pump.relabeled()
        return cls(lambda zs, zi: spdc_jsa(zs, zi, pump), "spdc", pump)

    @classmethod
    def constant(cls, value: complex) -> "AnalyticJsa":
        return cls(
            lambda zs, zi: np.full(np.broadcast(np.asarray(zs), np.asarray(zi)).shape, value, complex),
            f"constant({value})",
        )

    def __call__(self, zs, zi):
        return np.asarray(self.func(zs, zi), dtype=complex)

    def support(self):
        return None


JsaSource = AnalyticJsa | JsaGrid


def evaluate_on_grid(source: JsaSource, spec: GridSpec) -> JsaGrid:
    """Tabulate a source on the square uniform grid described by ``spec``."""
    axis = spec.axis()
    ws, wi = np.meshgrid(axis, axis, indexing="ij")
    if isinstance(source, JsaGrid):
        values = sample_jsa(source, ws, wi)
        meta = {"kind": "resampled", **{f"source_{k}": v for k, v in source.metadata.items()}}
    else:
        values = source(ws, wi)
        meta = {"kind": source.label}
        if source.pump is not None and source.pump.angles_relabeled:
            meta["angles_relabeled"] = "true"
    return JsaGrid(axis, axis.copy(), values, meta)
