"""Select the compiled kernels when available, the numpy reference otherwise.

Set ``POLARIJSA_BACKEND=python`` to force the numpy implementation.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("POLARIJSA_BACKEND", "auto").lower() != "python":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if os.environ.get("POLARIJSA_BACKEND", "").lower() == "cython":
            raise

green_sum = _impl.green_sum
quadrature_term1 = _impl.quadrature_term1
quadrature_term2 = _impl.quadrature_term2

__all__ = ["BACKEND", "green_sum", "quadrature_term1", "quadrature_term2"]
