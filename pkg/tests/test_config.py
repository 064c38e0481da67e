import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarijsa.config import (
    HBAR_C_EV_NM,
    ComplexFrequency,
    apply_env_overrides,
    load_config,
    reference_config,
    validate_config,
)
from polarijsa.errors import ConfigError, ValidationError


def baseline_doc():
    return reference_config(0.0065).to_document()


def test_baseline_accepted():
    cfg = reference_config()
    assert cfg.tc.omega_o == cfg.tc.omega_c == 1.81
    assert cfg.tc.gamma_o == 0.020 and cfg.tc.kappa == 0.025
    assert cfg.tc.sigma_z_bar == -1 and cfg.tc.sigma_a_bar == 0
    assert cfg.grid.n_points == 512 and cfg.solver.quad_rel_tol == 1e-8


def test_negative_population_rejected():
    doc = baseline_doc()
    doc["tc"]["n_bar"] = -0.5
    with pytest.raises(ValidationError) as info:
        validate_config(doc)
    assert info.value.field == "n_bar"


def test_delta_sigma_defaults_off():
    doc = baseline_doc()
    del doc["tc"]["include_delta_sigma"]
    assert validate_config(doc).tc.include_delta_sigma is False


@pytest.mark.parametrize(
    "mutate, key",
    [
        (lambda d: d.update(extra={}), "extra"),
        (lambda d: d["tc"].update(colour=1), "tc.colour"),
        (lambda d: d["tc"].update(coupling_over_omega_o=0.001), "tc.coupling_ev"),
        (lambda d: d["tc"].pop("coupling_ev"), "tc.coupling_ev"),
        (lambda d: d["tc"].pop("kappa_ev"), "tc.kappa_ev"),
        (lambda d: d.pop("pump"), "pump"),
        (lambda d: d["tc"].update(kappa_ev="0.1"), "tc.kappa_ev"),
        (lambda d: d["tc"].update(sigma_a_bar=[0.0]), "tc.sigma_a_bar"),
        (lambda d: d["solver"].update(input_jsa="other"), "solver.input_jsa"),
    ],
)
def test_schema_errors_name_the_key(mutate, key):
    doc = baseline_doc()
    mutate(doc)
    with pytest.raises(ConfigError) as info:
        validate_config(doc)
    assert info.value.key == key


@pytest.mark.parametrize(
    "section, key, value",
    [
        ("tc", "omega_o_ev", 0.0),
        ("tc", "sigma_z_bar", 1.5),
        ("tc", "kappa_ev", -0.1),
        ("pump", "sigma_p_ev", 0.0),
        ("pump", "theta1_deg", 90.0),
        ("grid", "n_points", 1),
        ("grid", "omega_max_ev", 1.70),
        ("solver", "quad_rel_tol", 0.0),
    ],
)
def test_invariant_violations(section, key, value):
    doc = baseline_doc()
    doc[section][key] = value
    with pytest.raises(ValidationError):
        validate_config(doc)


def test_measured_input_needs_no_pump(tmp_path):
    doc = baseline_doc()
    del doc["pump"]
    doc["solver"]["input_jsa"] = {"measured": str(tmp_path / "grid.csv")}
    cfg = validate_config(doc)
    assert cfg.pump is None and cfg.solver.input_jsa == "measured"


def test_relative_coupling_converted():
    doc = baseline_doc()
    del doc["tc"]["coupling_ev"]
    doc["tc"]["coupling_over_omega_o"] = 0.0065
    assert validate_config(doc).tc.coupling == pytest.approx(0.0065 * 1.81, rel=1e-15)


def test_angles_relabeled_so_cosines_are_ordered():
    doc = baseline_doc()
    doc["pump"]["theta1_deg"], doc["pump"]["theta2_deg"] = 2.0, 5.0
    pump = validate_config(doc).pump
    assert (pump.theta1, pump.theta2) == (5.0, 2.0) and pump.angles_relabeled
    assert math.cos(math.radians(pump.theta1)) <= math.cos(math.radians(pump.theta2))


def test_hash_deterministic_and_sensitive():
    a, b = reference_config(0.0065), reference_config(0.0065)
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != reference_config(0.0066).config_hash()


def test_env_overrides():
    doc, applied = apply_env_overrides(
        baseline_doc(),
        {"POLARIJSA_TC_N_BAR": "2", "POLARIJSA_GRID_N_POINTS": "64", "HOME": "/x",
         "POLARIJSA_BACKEND": "python"},
    )
    cfg = validate_config(doc)
    assert cfg.tc.n_bar == 2 and cfg.grid.n_points == 64
    assert applied == ["grid.n_points=64", "tc.n_bar=2"]


def test_env_override_of_coupling_replaces_other_form():
    doc, _ = apply_env_overrides(baseline_doc(), {"POLARIJSA_TC_COUPLING_OVER_OMEGA_O": "0.001"})
    assert validate_config(doc).tc.coupling == pytest.approx(0.00181)


def test_unknown_env_section_rejected():
    with pytest.raises(ConfigError):
        apply_env_overrides(baseline_doc(), {"POLARIJSA_FOO_BAR": "1"})


def test_load_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(baseline_doc()))
    cfg, applied = load_config(path, {"POLARIJSA_TC_KAPPA_EV": "0.01"})
    assert cfg.tc.kappa == 0.01 and applied == ["tc.kappa_ev=0.01"]
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json", {})
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.json", {})


def test_load_config_without_file_uses_reference():
    cfg, applied = load_config(None, {})
    assert cfg == reference_config() and applied == []


def test_hbar_c():
    assert HBAR_C_EV_NM == 197.3269804


def test_complex_frequency():
    z = ComplexFrequency(1.8, 0.01)
    assert z.value == complex(1.8, -0.01)
    assert ComplexFrequency.from_complex(1.8 - 0.01j) == z
    with pytest.raises(ValidationError):
        ComplexFrequency(1.8, -0.01)
    with pytest.raises(ValidationError):
        ComplexFrequency(math.inf, 0.01)


finite = st.floats(allow_nan=False, allow_infinity=False)


@given(
    omega=st.floats(0.5, 3.0),
    gamma_o=st.floats(0.0, 0.1),
    kappa=st.floats(0.0, 0.1),
    ratio=st.floats(0.0, 0.05),
    n_bar=st.floats(0.0, 3.0),
    sigma_z=st.floats(-1.0, 1.0),
    sa=st.tuples(st.floats(-0.01, 0.01), st.floats(-0.01, 0.01)),
    delta=st.booleans(),
    n_points=st.integers(2, 1024),
    theta=st.tuples(st.floats(0.0, 89.0), st.floats(0.0, 89.0)),
)
def test_round_trip(omega, gamma_o, kappa, ratio, n_bar, sigma_z, sa, delta, n_points, theta):
    doc = baseline_doc()
    doc["tc"].update(omega_o_ev=omega, gamma_o_ev=gamma_o, kappa_ev=kappa,
                     coupling_ev=ratio * omega, n_bar=n_bar, sigma_z_bar=sigma_z,
                     sigma_a_bar=list(sa), include_delta_sigma=delta)
    doc["grid"]["n_points"] = n_points
    doc["pump"]["theta1_deg"], doc["pump"]["theta2_deg"] = theta
    cfg = validate_config(doc)
    again = validate_config(json.loads(json.dumps(cfg.to_document())))
    assert again == cfg
    assert again.config_hash() == cfg.config_hash()
