"""Schmidt decomposition of sampled joint spectral amplitudes.

The Schmidt coefficients of a discretized amplitude are the singular values of
its matrix.  Entropies are in nats.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .config import ModelConfig
from .engine import EngineMode, default_mode, input_source, scatter, symmetrize
from .errors import UndefinedEntropyError
from .jsa import JsaGrid, evaluate_on_grid

TRUNCATION_RATIO = 1e-14


def entropy_from_weights(weights: np.ndarray) -> float:
    """-sum p ln p over positive weights that already sum to one."""
    p = np.asarray(weights, dtype=float)
    p = p[p > 0]
    return float(max(-np.sum(p * np.log(p)), 0.0))


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Singular-value spectrum of an amplitude grid.

    ``coefficients`` are the raw singular values (descending) that survived
    truncation; ``normalized`` are rescaled so their squares sum to one.
    """

    coefficients: np.ndarray
    normalized: np.ndarray
    entropy: float
    truncation_count: int
    grid_meta: Mapping[str, str] = field(default_factory=dict)
    signal_modes: np.ndarray | None = field(default=None, repr=False)
    idler_modes: np.ndarray | None = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return self.coefficients.size

    @property
    def schmidt_number(self) -> float:
        """Effective number of modes, 1 / sum(r^4)."""
        return float(1.0 / np.sum(self.normalized**4))


def schmidt_decompose(grid: JsaGrid, keep_basis: bool = False) -> SchmidtSpectrum:
    if grid.shape[0] != grid.shape[1]:
        raise ValueError(f"Schmidt decomposition expects a square grid, got {grid.shape}")
    amps = grid.amplitudes
    if not np.any(amps):
        raise UndefinedEntropyError("amplitude grid is identically zero")
    if keep_basis:
        left, sv, right_h = np.linalg.svd(amps)
    else:
        sv = np.linalg.svd(amps, compute_uv=False)
    keep = sv >= TRUNCATION_RATIO * sv[0]
    raw = sv[keep]
    normalized = raw / np.sqrt(np.sum(raw**2))
    meta = {
        **grid.metadata,
        "n_points": str(grid.shape[0]),
        "omega_min_ev": repr(float(grid.axis_s[0])),
        "omega_max_ev": repr(float(grid.axis_s[-1])),
        "truncation_ratio": repr(TRUNCATION_RATIO),
    }
    return SchmidtSpectrum(
        coefficients=raw,
        normalized=normalized,
        entropy=entropy_from_weights(normalized**2),
        truncation_count=int(sv.size - raw.size),
        grid_meta=meta,
        signal_modes=left[:, keep] if keep_basis else None,
        idler_modes=right_h[keep].T if keep_basis else None,
    )


def entropy_by_eigendecomposition(amplitudes: np.ndarray) -> float:
    """Entropy from the eigenvalues of F F^H (the reduced density matrix).

    Uses the same relative truncation as ``schmidt_decompose``, applied to the
    squared spectrum.
    """
    a = np.asarray(amplitudes, dtype=complex)
    rho = a @ a.conj().T
    ev = scipy.linalg.eigh(rho, eigvals_only=True)[::-1]
    if ev[0] <= 0:
        raise UndefinedEntropyError("amplitude grid is identically zero")
    ev = ev[ev >= TRUNCATION_RATIO**2 * ev[0]]
    return entropy_from_weights(ev / ev.sum())


def entropy(grid: JsaGrid) -> float:
    return schmidt_decompose(grid).entropy


# ----------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepRow:
    coupling_over_omega_o: float
    entropy_in_nats: float
    entropy_out_nats: float
    n_points: int
    truncation_count: int

    def as_tuple(self):
        return (self.coupling_over_omega_o, self.entropy_in_nats, self.entropy_out_nats,
                self.n_points, self.truncation_count)


SWEEP_COLUMNS = tuple(SweepRow.__dataclass_fields__)


def prepare_couplings(values: Sequence[float]) -> np.ndarray:
    """Sort and deduplicate coupling ratios, warning when either was needed."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("no coupling values given")
    out = np.unique(arr)
    if out.size != arr.size:
        warnings.warn(f"dropped {arr.size - out.size} duplicate coupling value(s)", stacklevel=2)
    if np.any(np.diff(arr) < 0):
        warnings.warn("coupling values were not increasing; sorted them", stacklevel=2)
    return out


def entropy_sweep(config: ModelConfig, couplings: Sequence[float], mode: EngineMode | None = None,
                  *, threads: int = 1, source=None) -> list[SweepRow]:
    """Input and symmetrized-output entropy for each coupling ratio.

    ``couplings`` are values of coupling / omega_o.
    """
    couplings = prepare_couplings(couplings)
    mode = default_mode(config) if mode is None else mode
    f_in = input_source(config) if source is None else source
    s_in = schmidt_decompose(symmetrize(evaluate_on_grid(f_in, config.grid))).entropy
    rows = []
    for ratio in couplings:
        cfg = config.with_tc(coupling=float(ratio) * config.tc.omega_o)
        result = scatter(cfg, mode, source=f_in, threads=threads)
        spec = schmidt_decompose(result.symmetrized_output)
        rows.append(SweepRow(float(ratio), s_in, spec.entropy, config.grid.n_points,
                             spec.truncation_count))
    return rows
