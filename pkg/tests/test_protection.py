import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sps_fdia import (Alarm, InsufficientSamples, IntegratorConfig, MissingColumn, Relay, RelayConfig, TimeSeries,
                      classify_portrait, default_model, evaluate_alarms, evaluate_relays, find_equilibrium,
                      phase_portrait, rocof_estimate, rolling_rocof, simulate)


def synthetic(times, freq1, vdc=None, freq2=None):
    times = np.asarray(times, dtype=float)
    cols = {"freq_1": np.broadcast_to(freq1, times.shape)}
    if freq2 is not None:
        cols["freq_2"] = np.broadcast_to(freq2, times.shape)
    cols["V_DC"] = np.broadcast_to(1.0 if vdc is None else vdc, times.shape)
    return TimeSeries(times, cols, meta={"f_nominal": [60.0, 60.0], "V_DC_ref": 1.0})


GRID = np.round(np.arange(0, 2001) * 1e-3, 12)


# -- ROCOF ---------------------------------------------------------------------------------

def test_rocof_of_constant_frequency_is_zero():
    t = np.linspace(0, 0.1, 11)
    assert rocof_estimate(t, np.full_like(t, 60.0)) == 0.0


def test_rocof_of_exact_ramp():
    t = np.linspace(0, 0.1, 11)
    assert rocof_estimate(t, 60.0 + 0.1 * t) == pytest.approx(0.1, abs=1e-12)


def test_rocof_rejects_alternating_noise():
    t = np.linspace(0, 0.1, 101)
    f = 60.0 + 0.05 * t + 1e-6 * (-1.0) ** np.arange(t.size)
    est = rocof_estimate(t, f)
    assert est == pytest.approx(0.05, abs=1e-4)
    assert est == pytest.approx(np.polyfit(t, f, 1)[0], rel=1e-9)


def test_rocof_needs_two_distinct_samples():
    with pytest.raises(InsufficientSamples):
        rocof_estimate([0.0], [60.0])
    with pytest.raises(InsufficientSamples):
        rocof_estimate([1.0, 1.0], [60.0, 61.0])


def test_rolling_rocof_uniform_and_irregular_paths_agree():
    rng = np.random.default_rng(0)
    t = np.arange(300) * 1e-3
    f = 60 + np.sin(7 * t) + 1e-4 * rng.normal(size=t.size)
    fast = rolling_rocof(t, f, 0.05)
    # same window evaluated sample by sample
    ref = np.array([np.polyfit(t[max(0, k - 50):k + 1], f[max(0, k - 50):k + 1], 1)[0] if k >= 1
                    else np.polyfit(t[:2], f[:2], 1)[0] for k in range(t.size)])
    assert np.allclose(fast, ref, rtol=1e-8, atol=1e-8)
    t2 = t.copy()
    t2[1::2] += 1e-5
    slow = rolling_rocof(t2, 60 + 0.3 * t2, 0.05)
    assert np.allclose(slow, 0.3, rtol=1e-9)


# -- relays --------------------------------------------------------------------------------

def test_sustained_overfrequency_trips_after_dwell():
    events = evaluate_relays(synthetic(GRID, np.where(GRID < 1.0, 63.5, 60.0)))
    freq = [e for e in events if e.relay in (Relay.OverFreq, Relay.UnderFreq)]
    assert len(freq) == 1
    e = freq[0]
    assert e.relay is Relay.OverFreq and e.target == "1"
    assert e.t_trip == pytest.approx(0.1, abs=1e-12)
    assert e.value == 63.5 and e.threshold == pytest.approx(63.0)


def test_sustained_undervoltage_trips():
    events = evaluate_relays(synthetic(GRID, 60.0, vdc=0.85))
    assert [(e.relay, e.target) for e in events] == [(Relay.UnderVdc, "dc")]
    assert events[0].threshold == pytest.approx(0.9) and events[0].value == 0.85


def test_short_excursion_does_not_trip():
    f = np.where((GRID >= 0.5) & (GRID < 0.55), 64.0, 60.0)
    assert not [e for e in evaluate_relays(synthetic(GRID, f)) if e.relay is Relay.OverFreq]


def test_interrupted_violation_restarts_dwell():
    f = np.where(((GRID >= 0.2) & (GRID < 0.28)) | (GRID >= 0.3), 56.5, 60.0)
    events = [e for e in evaluate_relays(synthetic(GRID, f)) if e.relay is Relay.UnderFreq]
    assert events[0].t_trip == pytest.approx(0.4, abs=1e-12)


def test_zero_dwell_trips_on_first_violating_sample():
    f = np.where(GRID >= 0.437, 56.5, 60.0)
    events = evaluate_relays(synthetic(GRID, f), RelayConfig(dwell=0.0, rocof_limit=1e6))
    assert [e.t_trip for e in events if e.relay is Relay.UnderFreq] == [pytest.approx(0.437)]


def test_rocof_trip_carries_signed_threshold():
    f = 60.0 - 0.5 * GRID
    events = [e for e in evaluate_relays(synthetic(GRID, f)) if e.relay is Relay.Rocof]
    assert len(events) == 1 and events[0].threshold == -0.02 and events[0].value == pytest.approx(-0.5)


def test_each_machine_reported_separately():
    events = evaluate_relays(synthetic(GRID, 63.5, freq2=56.0))
    assert {(e.relay, e.target) for e in events} == {(Relay.OverFreq, "1"), (Relay.UnderFreq, "2")}
    assert events == sorted(events, key=lambda e: (e.t_trip, e.relay.value, e.target))


def test_missing_columns():
    with pytest.raises(MissingColumn):
        evaluate_relays(TimeSeries(GRID, {"V_DC": np.ones_like(GRID)}))
    with pytest.raises(MissingColumn):
        evaluate_relays(TimeSeries(GRID, {"freq_1": np.full_like(GRID, 60.0)}))
    with pytest.raises(MissingColumn):
        phase_portrait(TimeSeries(GRID, {"freq_1": np.full_like(GRID, 60.0)}))


def test_tight_band_raises_alarm_without_trip():
    f = np.full_like(GRID, 60.4)
    assert evaluate_relays(synthetic(GRID, f)) == []
    alarms = evaluate_alarms(synthetic(GRID, f))
    assert [(a.alarm, a.target) for a in alarms] == [(Alarm.OverFreqAlarm, "1")]
    assert alarms[0].threshold == pytest.approx(60.3)


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        RelayConfig(rocof_limit=0.0)
    with pytest.raises(ValueError):
        RelayConfig(dwell=-0.1)


trajectory = st.lists(st.floats(54.0, 66.0), min_size=40, max_size=40)
vdc_traj = st.lists(st.floats(0.8, 1.2), min_size=40, max_size=40)


@settings(max_examples=60, deadline=None)
@given(trajectory, vdc_traj, st.floats(1.0, 3.0), st.floats(1.0, 3.0), st.floats(1.0, 3.0))
def test_widening_bands_never_adds_trips(f, v, kf, kr, kv):
    t = np.arange(40) * 0.01
    s = synthetic(t, np.array(f), vdc=np.array(v))
    base = RelayConfig(dwell=0.02)
    wide = RelayConfig(freq_band_pct=5.0 * kf, rocof_limit=0.02 * kr, vdc_band_pct=10.0 * kv, dwell=0.02)
    narrow = {(e.relay, e.target) for e in evaluate_relays(s, base)}
    assert {(e.relay, e.target) for e in evaluate_relays(s, wide)} <= narrow


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-30, 30)), min_size=1, max_size=50), st.randoms())
def test_portrait_classification_is_pointwise(points, rnd):
    r, v = map(np.array, zip(*points))
    perm = list(range(len(points)))
    rnd.shuffle(perm)
    assert np.array_equal(classify_portrait(r, v)[perm], classify_portrait(r[perm], v[perm]))


def test_portrait_axes():
    assert classify_portrait([0.05, 0.0, 0.0, 0.02], [0.0, -12.0, 0.0, 10.0]).tolist() == [False, False, True, True]


def test_equilibrium_run_is_quiet():
    m = default_model()
    ts = simulate(find_equilibrium(m, load=1.0), m, integ=IntegratorConfig(t_end=3.0))
    assert evaluate_relays(ts) == []
    assert evaluate_alarms(ts) == []
    p = phase_portrait(ts)
    assert p.fraction_inside == 1.0 and len(p.rocof) == len(ts)
