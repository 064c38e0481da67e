"""Compare the compiled quadrature kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--points N] [--repeat R]

Both backends are loaded side by side, checked for agreement, then timed on
the same random batch of integrand evaluations.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from polarijsa import _kernels_py
from polarijsa.config import reference_config
from polarijsa.greens import decompose

try:
    from polarijsa import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def _batch(n, rng):
    ws = rng.uniform(1.75, 1.87, n)
    wi = rng.uniform(1.75, 1.87, n)
    x = rng.normal(0.0, 0.2, n)
    return ws, wi, x


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    view = decompose(reference_config(0.0065, 1.0).tc).view()
    ws, wi, x = _batch(args.points, np.random.default_rng(0))
    backends = {"numpy": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    else:
        print("compiled extension not available; timing the numpy fallback only")

    calls = {
        "green_sum": lambda k: k.green_sum(x, view.poles, view.u),
        "quadrature_term1": lambda k: k.quadrature_term1(ws, wi, x, view.poles, view.u, view.uc,
                                                         view.unit),
        "quadrature_term2": lambda k: k.quadrature_term2(ws, wi, x, view.poles, view.u, view.uc,
                                                         view.unit),
    }
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name in backends) + "     speedup")
    for label, call in calls.items():
        if len(backends) > 1:
            ref = np.asarray(call(_kernels_py))
            got = np.asarray(call(_kernels_c))
            scale = np.max(np.abs(ref))
            assert np.max(np.abs(got - ref)) <= 1e-13 * scale, f"{label}: backends disagree"
        times = {
            name: min(timeit.repeat(lambda: call(mod), number=1, repeat=args.repeat))
            for name, mod in backends.items()
        }
        row = f"{label:<18}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
        if "cython" in times:
            row += f"{times['numpy'] / times['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
