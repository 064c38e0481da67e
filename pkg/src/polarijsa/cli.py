"""Command-line interface: ``polarijsa {dispersion,jsa,entropy-sweep,validate}``.

Every run writes its artifacts plus a ``manifest.json`` into ``--out``.
Exit codes: 0 success, 1 usage error, 2 invalid input or failed validation,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import load_config
from .engine import EngineMode, default_mode, scatter
from .entanglement import SWEEP_COLUMNS, entropy_sweep, prepare_couplings
from .errors import (
    ConfigError,
    GridLoadError,
    ModeError,
    NumericError,
    PolariJsaError,
    SymmetryDomainError,
    UndefinedEntropyError,
    ValidationError,
)
from .greens import DISPERSION_COLUMNS, dispersion, strong_coupling_onset
from .jsa import write_grid
from .validation import FAULTS, run_validation

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(PolariJsaError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_globals(parser, suppress: bool):
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--config", metavar="PATH", default=default(None),
                        help="JSON configuration (default: built-in reference setup)")
    parser.add_argument("--out", metavar="DIR", default=default("."), help="output directory")
    parser.add_argument("--threads", type=int, metavar="N", default=default(0),
                        help="worker threads, 0 = one per CPU")
    parser.add_argument("--seed", type=int, default=default(0),
                        help="seed for randomized validation sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polarijsa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dispersion", help="polariton energies and linewidths vs coupling")
    _add_globals(p, suppress=True)
    p.add_argument("--range", nargs=2, type=float, default=(0.0, 0.01), metavar=("START", "STOP"),
                   help="coupling / omega_o range")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--n-bar", type=_float_list, default=None,
                   help="comma-separated cavity populations (default: from config)")

    p = sub.add_parser("jsa", help="input, coherent, redistribution and output amplitudes")
    _add_globals(p, suppress=True)
    p.add_argument("--path", choices=("pole_sum", "quadrature"), default=None,
                   help="evaluation path (default: pole_sum for SPDC, quadrature for measured)")
    p.add_argument("--no-vacuum-fast-path", action="store_true")
    p.add_argument("--heatmaps", action="store_true", help="also write |F| PNG heatmaps")

    p = sub.add_parser("entropy-sweep", help="entanglement entropy vs coupling")
    _add_globals(p, suppress=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--couplings", type=_float_list, help="comma-separated coupling / omega_o")
    group.add_argument("--coupling-range", nargs=3, type=float, metavar=("START", "STOP", "N"))
    p.add_argument("--n-bar", type=_float_list, default=None)
    p.add_argument("--path", choices=("pole_sum", "quadrature"), default=None)

    p = sub.add_parser("validate", help="run the built-in cross-checks")
    _add_globals(p, suppress=True)
    p.add_argument("--inject-fault", choices=FAULTS, default=None, help=argparse.SUPPRESS)
    return parser


# ----------------------------------------------------------------- output


class Run:
    """Collects written artifacts and emits the manifest."""

    def __init__(self, args, config, overrides):
        self.args = args
        self.config = config
        self.overrides = list(overrides)
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self.max_quad_error = 0.0
        self.start = time.perf_counter()

    def path(self, name: str) -> Path:
        p = self.out / name
        self.outputs.append(str(p))
        return p

    def write_csv(self, name, header, rows):
        with self.path(name).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                                 for v in row])

    def finish(self, **extra) -> Path:
        manifest = {
            "version": __version__,
            "subcommand": self.args.command,
            "config_sha256": self.config.config_hash(),
            "config": self.config.to_document(),
            "overrides": self.overrides,
            "outputs": self.outputs,
            "wall_time_s": time.perf_counter() - self.start,
            "max_quad_error": self.max_quad_error,
            "threads": self.args.threads,
            "seed": self.args.seed,
            **extra,
        }
        path = self.out / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        return path


def _label(n_bar: float) -> str:
    return f"{n_bar:g}".replace(".", "p")


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


# ----------------------------------------------------------------- commands


def cmd_dispersion(args, run: Run) -> int:
    start, stop = args.range
    if args.points < 1 or stop < start or (args.points > 1 and stop == start):
        raise UsageError("dispersion: empty coupling range")
    ratios = np.linspace(start, stop, args.points)
    n_bars = args.n_bar if args.n_bar else [run.config.tc.n_bar]
    onsets = {}
    for n_bar in n_bars:
        tc = run.config.with_tc(n_bar=n_bar).tc
        table = dispersion(tc, ratios)
        name = "dispersion.csv" if len(n_bars) == 1 else f"dispersion_nbar{_label(n_bar)}.csv"
        run.write_csv(name, DISPERSION_COLUMNS, table)
        onset = strong_coupling_onset(table)
        onsets[f"{n_bar:g}"] = onset
        text = "no splitting in range" if onset is None else f"{onset:.6g}"
        print(f"n_bar={n_bar:g}: strong-coupling onset (coupling/omega_o) = {text}")
    run.finish(strong_coupling_onset=onsets)
    return EXIT_OK


def _write_heatmap(grid, path: Path) -> None:
    try:
        from PIL import Image
    except ImportError:
        raise UsageError("--heatmaps needs Pillow (pip install 'artifact[heatmap]')") from None
    mag = np.abs(grid.amplitudes)
    peak = mag.max()
    scaled = np.zeros(mag.shape) if peak == 0 else mag / peak
    # rows of the image run from high to low signal frequency
    pixels = np.rint(255 * scaled[::-1]).astype(np.uint8)
    Image.fromarray(pixels, mode="L").save(path)


def cmd_jsa(args, run: Run) -> int:
    config = run.config
    mode = default_mode(config) if args.path is None else EngineMode(args.path)
    mode = EngineMode(mode.path, vacuum_fast_path=not args.no_vacuum_fast_path)
    result = scatter(config, mode, threads=args.threads)
    run.max_quad_error = result.max_quad_error
    grids = {
        "input": result.input,
        "coherent": result.coherent,
        "redistribution": result.redistribution,
        "output": result.output,
        "output_sym": result.symmetrized_output,
    }
    for name, grid in grids.items():
        write_grid(grid, run.path(f"jsa_{name}.csv"))
    if args.heatmaps:
        for name in ("input", "output", "output_sym"):
            _write_heatmap(grids[name], run.path(f"jsa_{name}_abs.png"))
    sym = np.abs(grids["output_sym"].amplitudes)
    peak = np.unravel_index(np.argmax(sym), sym.shape)
    axis = config.grid.axis()
    print(f"path={mode.path} max|F_out,sym| at ({axis[peak[0]]:.4f}, {axis[peak[1]]:.4f}) eV")
    run.finish(path=mode.path, vacuum_fast_path=mode.vacuum_fast_path)
    return EXIT_OK


def _sweep_couplings(args) -> np.ndarray:
    if args.couplings is not None:
        return np.asarray(args.couplings)
    if args.coupling_range is not None:
        start, stop, count = args.coupling_range
        if count < 1 or count != int(count):
            raise UsageError("entropy-sweep: N must be a positive integer")
        return np.linspace(start, stop, int(count))
    return np.linspace(0.0, 0.01, 11)


def cmd_entropy_sweep(args, run: Run) -> int:
    couplings = _sweep_couplings(args)
    if couplings.size == 0:
        raise UsageError("entropy-sweep: no coupling values")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        couplings = prepare_couplings(couplings)
    for w in caught:
        _warn(str(w.message))
    n_bars = args.n_bar if args.n_bar else [run.config.tc.n_bar]
    if len(set(n_bars)) != len(n_bars):
        _warn("duplicate n_bar values dropped")
        n_bars = sorted(set(n_bars), key=n_bars.index)
    mode = None if args.path is None else EngineMode(args.path)
    for n_bar in n_bars:
        cfg = run.config.with_tc(n_bar=n_bar)
        rows = entropy_sweep(cfg, couplings, mode, threads=args.threads)
        run.write_csv(f"entropy_sweep_nbar{_label(n_bar)}.csv", SWEEP_COLUMNS,
                      [r.as_tuple() for r in rows])
        for r in rows:
            print(f"n_bar={n_bar:g} coupling={r.coupling_over_omega_o:.5g} "
                  f"S_in={r.entropy_in_nats:.6f} S_out={r.entropy_out_nats:.6f}")
    run.finish(n_bar=list(n_bars))
    return EXIT_OK


def cmd_validate(args, run: Run) -> int:
    report = run_validation(run.config, seed=args.seed, fault=args.inject_fault)
    print(report.text())
    path = run.path("validation_report.json")
    path.write_text(json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8")
    run.finish(passed=report.passed)
    return EXIT_OK if report.passed else EXIT_INVALID


COMMANDS = {
    "dispersion": cmd_dispersion,
    "jsa": cmd_jsa,
    "entropy-sweep": cmd_entropy_sweep,
    "validate": cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 0:
            raise UsageError("--threads must be >= 0")
        config, overrides = load_config(args.config, os.environ)
        run = Run(args, config, overrides)
        return COMMANDS[args.command](args, run)
    except (UsageError, ModeError, SymmetryDomainError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ValidationError, GridLoadError, UndefinedEntropyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
