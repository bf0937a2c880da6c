import math
import textwrap

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sps_fdia import (AttackSpec, FaultSpec, IntegratorConfig, ParseError, RelayConfig, Scenario, Target,
                      TimeVaryingTerm, ValidationError, default_model, fixture_names, fixture_path, load_scenario,
                      parse_scenario, serialize, with_parameter)
from sps_fdia.scenario import InitialCondition

MINIMAL = """\
name: tiny
units:
  vdc: pu
integrator: {dt: 1.0e-3, t_end: 2.0}
"""


def test_nominal_fixture_has_no_events():
    sc = load_scenario(fixture_path("nominal"))
    assert sc.name == "nominal"
    assert sc.attacks == () and sc.faults == ()
    assert sc.model.vdc_unit == "pu"


def test_all_fixtures_parse():
    assert set(fixture_names()) == {"nominal", "fault", "governor_attack", "exciter_attack"}
    for name in fixture_names():
        assert load_scenario(fixture_path(name)).name == name


def test_minimal_document_takes_defaults():
    sc = parse_scenario(MINIMAL)
    assert sc.model == default_model()
    assert sc.relays == RelayConfig()
    assert sc.integrator == IntegratorConfig(dt=1e-3, t_end=2.0)
    assert sc.initial.mode == "equilibrium"


def test_exponent_written_without_dot_is_a_number():
    sc = parse_scenario(MINIMAL.replace("1.0e-3", "1e-3"))
    assert sc.integrator.dt == 1e-3


def _errors(text):
    with pytest.raises(ValidationError) as info:
        parse_scenario(text)
    return info.value.errors


def test_reversed_attack_window_names_the_field():
    text = MINIMAL + textwrap.dedent("""\
        attacks:
          - channel: delta_omega
            machine: 1
            gamma: 0.01
            t_start: 1.5
            t_end: 0.5
        """)
    [(path, line, msg)] = _errors(text)
    assert (path, line) == ("attacks[0].t_end", 10)
    assert "t_start < t_end" in msg


def test_missing_vdc_unit_is_reported():
    errors = _errors("name: x\nintegrator: {t_end: 1.0}\n")
    assert ("units", 1, "missing required key 'units'") in errors
    errors = _errors("name: x\nunits: {}\n")
    assert any(path == "units.vdc" for path, _, _ in errors)


def test_every_problem_is_reported_with_its_line():
    text = textwrap.dedent("""\
        name: broken
        units: {vdc: kV}
        load_current: -1
        attacks:
          - channel: torque
            machine: 1
            gamma: abc
        integrator: {dt: 0, t_end: 1}
        outputs: [timeseries, plots]
        """)
    errors = _errors(text)
    lines = {path: line for path, line, _ in errors}
    assert lines["units.vdc"] == 2
    assert lines["attacks[0].channel"] == 5
    assert lines["attacks[0].gamma"] == 7
    assert lines["integrator"] == 8
    assert lines["load_current"] == 3
    assert lines["outputs[1]"] == 9


def test_attack_outside_horizon_rejected():
    text = MINIMAL + "attacks:\n  - {channel: P_e, machine: 2, gamma: 0.1, t_start: 3.0}\n"
    assert any(p == "attacks[0].t_start" for p, _, _ in _errors(text))


def test_unknown_machine_rejected():
    text = MINIMAL + "attacks:\n  - {channel: v_bd, machine: 3, gamma: 0.1, t_start: 0.5}\n"
    assert any(p == "attacks[0].machine" for p, _, _ in _errors(text))


def test_overlapping_attacks_rejected():
    text = MINIMAL + ("attacks:\n  - {channel: v_bd, machine: 1, gamma: 0.1, t_start: 0.0, t_end: 1.0}\n"
                      "  - {channel: v_bd, machine: 1, alpha: 0.1, t_start: 0.5, t_end: 1.5}\n")
    assert any(p == "attacks" for p, _, _ in _errors(text))


def test_malformed_yaml_is_a_parse_error():
    with pytest.raises(ParseError, match="line"):
        parse_scenario("name: x\nunits: [vdc: pu\n")
    with pytest.raises(ParseError):
        parse_scenario("")


def test_explicit_state_needs_dc_voltage():
    text = MINIMAL + "initial:\n  mode: explicit\n  state: {theta: [0.0, 0.0]}\n"
    assert any(p == "initial.state.V_DC" for p, _, _ in _errors(text))


def test_explicit_state_is_applied():
    text = MINIMAL + "initial:\n  mode: explicit\n  state: {delta_omega: [0.01, 0.0], V_DC: 1.05}\n"
    st0 = parse_scenario(text).initial.state(2, 0.3)
    assert st0.delta_omega.tolist() == [0.01, 0.0] and st0.V_DC == 1.05 and st0.i_l == 0.3


def test_infinite_attack_end_accepted():
    text = MINIMAL + "attacks:\n  - {channel: delta_omega, machine: 1, gamma: 0.1, t_start: 0.5, t_end: .inf}\n"
    assert math.isinf(parse_scenario(text).attacks[0].t_end)


def test_with_parameter_edits_a_copy():
    sc = load_scenario(fixture_path("governor_attack"))
    edited = with_parameter(sc, "attacks[0].gamma", 0.05)
    assert edited.attacks[0].gamma == 0.05 and sc.attacks[0].gamma == 0.02
    with pytest.raises(ValidationError):
        with_parameter(sc, "attacks[3].gamma", 0.05)
    with pytest.raises(ValidationError):
        with_parameter(sc, "attacks[0].t_start", 99.0)


@pytest.mark.parametrize("name", ["nominal", "fault", "governor_attack", "exciter_attack"])
def test_fixture_round_trip(name):
    sc = load_scenario(fixture_path(name))
    assert parse_scenario(serialize(sc)) == sc


coef = st.floats(-0.5, 0.5, allow_nan=False)
betas = st.one_of(st.just(TimeVaryingTerm()), st.builds(TimeVaryingTerm.ramp, coef),
                  st.builds(TimeVaryingTerm.sinusoid, coef, st.floats(0, 5), st.floats(-3, 3)))


@st.composite
def scenarios(draw):
    horizon = draw(st.sampled_from([1.0, 2.0, 5.0]))
    attacks = []
    for target in draw(st.lists(st.sampled_from(list(Target)), max_size=4, unique=True)):
        t0 = draw(st.floats(0, horizon / 2))
        t1 = draw(st.one_of(st.just(math.inf), st.floats(t0 + 1e-3, horizon)))
        attacks.append(AttackSpec(target, draw(st.integers(1, 2)), alpha=draw(coef), gamma=draw(coef),
                                  beta=draw(betas), t_start=t0, t_end=t1))
    faults = []
    if draw(st.booleans()):
        t0 = draw(st.floats(0, horizon / 2))
        faults.append(FaultSpec(t0, draw(st.floats(t0 + 1e-3, horizon)), i_l_scale=draw(st.floats(0.1, 5)),
                                G_entries=[(1, 2, draw(st.floats(0.1, 3)))]))
    outputs = draw(st.lists(st.sampled_from(["timeseries", "phase_portrait", "omega_theta_portrait", "trip_log",
                                             "analytic_overlay"]), min_size=1, unique=True))
    initial = InitialCondition()
    if draw(st.booleans()):
        initial = InitialCondition("explicit", (("delta_omega", (draw(coef), 0.0)), ("V_DC", 1.0)))
    return Scenario(
        name=draw(st.text("abcdefgh_", min_size=1, max_size=10)),
        model=default_model(shared_sensor=draw(st.booleans())),
        load_current=draw(st.floats(0, 2)),
        initial=initial,
        attacks=attacks,
        faults=faults,
        integrator=IntegratorConfig(dt=1e-3, t_end=horizon, record_every=draw(st.integers(1, 20))),
        relays=RelayConfig(dwell=draw(st.floats(0, 0.5)), rocof_limit=draw(st.floats(0.01, 1))),
        open_breaker=draw(st.booleans()),
        outputs=outputs,
        portrait_machine=draw(st.integers(1, 2)),
        description=draw(st.text(max_size=30)),
    )


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_serialize_parse_round_trip(sc):
    assert parse_scenario(serialize(sc)) == sc
