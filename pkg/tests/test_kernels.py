import os
import subprocess
import sys

import numpy as np
import pytest

from polarijsa import _kernels_py
from polarijsa.config import reference_config
from polarijsa.greens import decompose

compiled = pytest.importorskip("polarijsa._kernels")


@pytest.fixture(params=[0.0, 1.0], ids=["vacuum", "occupied"])
def views(request):
    dec = decompose(reference_config(0.0065, request.param).tc)
    out = [dec.view()]
    if not dec.partner_view().is_null:
        out.append(dec.partner_view())
    return out


def args(rng, n=200):
    ws = rng.uniform(1.7, 1.9, n)
    wi = rng.uniform(1.7, 1.9, n)
    x = rng.uniform(-2, 2, n)
    return ws, wi, x


def test_green_sum_agrees(views):
    z = np.random.default_rng(0).uniform(1.6, 2.0, 300) + 0.001j
    for v in views:
        a = compiled.green_sum(z, v.poles, v.u)
        b = _kernels_py.green_sum(z, v.poles, v.u)
        np.testing.assert_allclose(a, b, rtol=1e-13)


@pytest.mark.parametrize("name", ["quadrature_term1", "quadrature_term2"])
def test_quadrature_terms_agree(views, name):
    ws, wi, x = args(np.random.default_rng(1))
    for v in views:
        a = getattr(compiled, name)(ws, wi, x, v.poles, v.u, v.uc, v.unit)
        b = getattr(_kernels_py, name)(ws, wi, x, v.poles, v.u, v.uc, v.unit)
        for left, right in zip(np.atleast_2d(a), np.atleast_2d(b)):
            np.testing.assert_allclose(left, right, rtol=1e-13, atol=1e-300)


def backend_in_subprocess(value):
    env = {**os.environ, "POLARIJSA_BACKEND": value}
    code = "from polarijsa import kernels; print(kernels.BACKEND)"
    return subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                          check=True).stdout.strip()


def test_backend_selection():
    assert backend_in_subprocess("python") == "python"
    assert backend_in_subprocess("auto") == "cython"
