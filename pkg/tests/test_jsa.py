import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from polarijsa.config import HBAR_C_EV_NM, GridSpec, PumpParams, reference_config
from polarijsa.errors import (
    GridFileNotFound,
    MalformedGridHeader,
    ModeError,
    NonFiniteAmplitudeError,
    NonUniformAxisError,
)
from polarijsa.jsa import (
    AnalyticJsa,
    JsaGrid,
    evaluate_on_grid,
    load_measured_jsa,
    pump_envelope,
    sample_jsa,
    sinc,
    spdc_jsa,
    wavevector_mismatch,
    write_grid,
)

PUMP = reference_config().pump


def test_degenerate_mismatch():
    dk_par, dk_perp = wavevector_mismatch(1.81, 1.81, PUMP)
    assert dk_perp == 0.0
    expected = 3.62 * (1 - math.cos(math.radians(3.5))) / HBAR_C_EV_NM
    assert dk_par == pytest.approx(expected, rel=1e-14)
    # about 3.42e-5 per nm with hbar*c = 197.327 eV nm
    assert dk_par == pytest.approx(3.4217e-5, rel=1e-4)


def test_swap_flips_transverse_mismatch():
    par1, perp1 = wavevector_mismatch(1.80, 1.83, PUMP)
    par2, perp2 = wavevector_mismatch(1.83, 1.80, PUMP)
    assert perp1 == pytest.approx(-perp2, rel=1e-14) and par1 == pytest.approx(par2, rel=1e-14)


def test_degenerate_amplitude():
    value = spdc_jsa(1.81, 1.81, PUMP)
    dk_par, _ = wavevector_mismatch(1.81, 1.81, PUMP)
    half = 0.5 * dk_par * PUMP.crystal_length_nm
    assert half == pytest.approx(1.71, abs=0.01)
    assert value == pytest.approx(math.sin(half) / half, rel=1e-14)
    assert abs(value) == pytest.approx(0.5788, abs=1e-3)


def test_envelope_at_two_sigma():
    assert pump_envelope(3.62 + 2 * 0.010, PUMP) == pytest.approx(math.exp(-1), rel=1e-14)
    assert pump_envelope(3.62, PUMP) == 1.0


def test_sinc_series_branch():
    z = np.array([0.0, 1e-5, 5e-5, 1e-4 * (1 - 1e-9), 1e-3 + 1e-3j])
    exact = np.array([1.0] + [complex(np.sin(v) / v) for v in z[1:]])
    np.testing.assert_allclose(sinc(z), exact, rtol=3e-16, atol=0)


def test_spdc_peaks_on_antidiagonal():
    grid = evaluate_on_grid(AnalyticJsa.spdc(PUMP), GridSpec(n_points=121))
    mag = np.abs(grid.amplitudes)
    rows = np.argmax(mag, axis=1)
    axis = grid.axis_s
    step = axis[1] - axis[0]
    sums = axis[30:91] + axis[rows[30:91]]
    # the ridge follows a line of constant total energy, offset from the pump centre by phase matching
    assert np.ptp(sums) <= 1.5 * step
    assert abs(sums.mean() - 3.62) < 0.01


@given(st.lists(st.tuples(*[st.floats(-0.05, 0.05)] * 4), min_size=1, max_size=50))
def test_schwarz_reflection(points):
    p = np.array(points)
    zs = 1.81 + p[:, 0] + 1j * p[:, 1]
    zi = 1.81 + p[:, 2] + 1j * p[:, 3]
    np.testing.assert_allclose(spdc_jsa(np.conj(zs), np.conj(zi), PUMP),
                               np.conj(spdc_jsa(zs, zi, PUMP)), rtol=1e-12, atol=1e-300)


@given(st.floats(1.7, 1.9), st.floats(1.7, 1.9))
def test_exchange_symmetry_equal_angles(ws, wi):
    assert abs(spdc_jsa(ws, wi, PUMP)) == pytest.approx(abs(spdc_jsa(wi, ws, PUMP)), rel=1e-12,
                                                          abs=1e-300)


@given(st.floats(1.6, 2.0), st.floats(13.0, 40.0), st.booleans())
def test_support_bound(ws, n_sigma, above):
    total = 3.62 + (1 if above else -1) * n_sigma * 0.010
    assert abs(spdc_jsa(ws, total - ws, PUMP)) < 1e-8


def test_relabeling_applied():
    pump = PumpParams(3.62, 0.01, 0.1, 2.0, 5.0)
    src = AnalyticJsa.spdc(pump)
    assert src.pump.theta1 == 5.0 and src.pump.angles_relabeled
    grid = evaluate_on_grid(src, GridSpec(n_points=4))
    assert grid.metadata["angles_relabeled"] == "true"


def small_grid(values=None):
    axis = np.array([1.80, 1.81, 1.82])
    amps = np.arange(9).reshape(3, 3) + 1j * np.arange(9).reshape(3, 3)[::-1] if values is None else values
    return JsaGrid(axis, axis.copy(), amps)


def test_sampling_rules():
    grid = small_grid()
    assert sample_jsa(grid, 1.81, 1.82) == grid.amplitudes[1, 2]
    ws, wi = np.meshgrid(grid.axis_s, grid.axis_i, indexing="ij")
    assert np.array_equal(sample_jsa(grid, ws, wi), grid.amplitudes)
    assert sample_jsa(grid, 1.79, 1.81) == 0 and sample_jsa(grid, 1.81, 1.83) == 0
    const = small_grid(np.full((3, 3), 2 - 1j))
    assert sample_jsa(const, 1.805, 1.815) == pytest.approx(2 - 1j, abs=1e-15)
    mid = sample_jsa(grid, 1.805, 1.80)
    assert mid == pytest.approx(0.5 * (grid.amplitudes[0, 0] + grid.amplitudes[1, 0]), abs=1e-12)


def test_sampled_grid_refuses_complex_arguments():
    with pytest.raises(ModeError):
        small_grid()(1.81 + 0.01j, 1.81)


def test_resampling_onto_itself_is_identity():
    spec = GridSpec(1.75, 1.87, 25)
    grid = evaluate_on_grid(AnalyticJsa.spdc(PUMP), spec)
    again = evaluate_on_grid(grid, spec)
    assert np.array_equal(again.amplitudes, grid.amplitudes)


def test_constant_source():
    grid = evaluate_on_grid(AnalyticJsa.constant(0.5j), GridSpec(n_points=5))
    assert np.all(grid.amplitudes == 0.5j)


def test_grid_invariants():
    axis = np.array([1.80, 1.81, 1.82])
    with pytest.raises(ValueError):
        JsaGrid(axis, axis, np.zeros((2, 3)))
    with pytest.raises(NonUniformAxisError):
        JsaGrid(np.array([1.80, 1.81, 1.83]), axis, np.zeros((3, 3)))
    with pytest.raises(NonFiniteAmplitudeError):
        JsaGrid(axis, axis, np.full((3, 3), np.nan))
    grid = small_grid()
    with pytest.raises(ValueError):
        grid.amplitudes[0, 0] = 1


amplitudes = hnp.arrays(
    np.complex128, st.tuples(st.integers(2, 6), st.integers(2, 6)),
    elements=st.complex_numbers(max_magnitude=1e300, allow_nan=False, allow_infinity=False),
)


@given(amplitudes, st.floats(-1e3, 1e3), st.floats(1e-6, 1e2))
def test_write_read_round_trip(tmp_path_factory, amps, start, step):
    axis_s = start + step * np.arange(amps.shape[0])
    axis_i = start + step * np.arange(amps.shape[1])
    grid = JsaGrid(axis_s, axis_i, amps)
    path = tmp_path_factory.mktemp("rt") / "grid.csv"
    write_grid(grid, path)
    back = load_measured_jsa(path)
    assert np.array_equal(back.axis_s, grid.axis_s) and np.array_equal(back.axis_i, grid.axis_i)
    assert np.array_equal(back.amplitudes.view(float), grid.amplitudes.view(float))
    assert back.metadata["kind"] == "measured" and len(back.metadata["sha256"]) == 64


def write_text(tmp_path, text):
    path = tmp_path / "g.csv"
    path.write_text(text)
    return path


def test_loader_errors(tmp_path):
    with pytest.raises(GridFileNotFound):
        load_measured_jsa(tmp_path / "nope.csv")
    with pytest.raises(MalformedGridHeader):
        load_measured_jsa(write_text(tmp_path, "# jsa-grid v2\n# axis_s_ev: 1,2\n# axis_i_ev: 1,2\n1,2\n3,4\n"))
    with pytest.raises(MalformedGridHeader):
        load_measured_jsa(write_text(tmp_path, "# jsa-grid v1\n# axis_s_ev: 1,2\n# axis_i_ev: 1,2\n1,2\n"))
    with pytest.raises(MalformedGridHeader):
        load_measured_jsa(write_text(tmp_path, "# jsa-grid v1\n# axis_s_ev: 1,2\n# axis_i_ev: 1,2\n1,x\n3,4\n"))
    with pytest.raises(NonUniformAxisError):
        load_measured_jsa(write_text(tmp_path, "# jsa-grid v1\n# axis_s_ev: 2,1,3\n# axis_i_ev: 1,2\n1,2\n3,4\n5,6\n"))
    with pytest.raises(NonFiniteAmplitudeError):
        load_measured_jsa(write_text(tmp_path, "# jsa-grid v1\n# axis_s_ev: 1,2\n# axis_i_ev: 1,2\nnan,0\n3,4\n"))
