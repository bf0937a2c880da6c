"""Scenario execution and file emission."""
from __future__ import annotations

import csv
import io
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analytic import piecewise_rotor_response
from .attacks import Target
from .dynamics import TimeSeries, find_equilibrium, simulate, state_at
from .errors import MissingColumn, SpsError
from .model import electrical_power
from .protection import (PhasePortrait, Relay, evaluate_alarms, evaluate_relays, phase_portrait)
from .scenario import Scenario, load_scenario, with_parameter

_MACHINE_RELAYS = (Relay.OverFreq, Relay.UnderFreq, Relay.Rocof)


def fixture_path(name: str) -> Path:
    """Path of a shipped scenario such as ``"nominal"`` or ``"fault.scenario"``."""
    if not name.endswith(".scenario"):
        name += ".scenario"
    path = Path(str(resources.files("sps_fdia.scenarios") / name))
    if not path.is_file():
        raise FileNotFoundError(f"no shipped scenario named {name!r}")
    return path


def fixture_names():
    root = Path(str(resources.files("sps_fdia.scenarios")))
    return sorted(p.stem for p in root.glob("*.scenario"))


# -- file emission -------------------------------------------------------------

def _num(x) -> str:
    return format(float(x), ".17g")


def _label(x) -> str:
    # shortest round-trip form, for values that double as labels
    return x if isinstance(x, str) else repr(float(x))


def _header(scenario_name: str, extra: str = "") -> str:
    tail = f" {extra}" if extra else ""
    return f"# sps_fdia {__version__} scenario={scenario_name}{tail}\n"


def write_atomic(path, text: str) -> Path:
    """Write ``text`` to a temporary sibling and rename it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _table(scenario_name: str, header: Sequence[str], rows, extra: str = "") -> str:
    buf = io.StringIO()
    buf.write(_header(scenario_name, extra))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else _num(v) for v in row])
    return buf.getvalue()


def timeseries_csv(series: TimeSeries, scenario_name: str) -> str:
    names = series.names
    header = ["t[s]"] + [f"{n}[{series.units.get(n, '')}]" for n in names]
    data = np.column_stack([series.times] + [series[n] for n in names])
    return _table(scenario_name, header, data, f"vdc_unit={series.meta.get('vdc_unit', 'pu')}")


def trip_log_csv(trips, scenario_name: str) -> str:
    rows = [(e.relay.value, e.target, e.t_trip, e.value, e.threshold) for e in trips]
    return _table(scenario_name, ["relay", "target", "t_trip", "value", "threshold"], rows)


def alarm_log_csv(alarms, scenario_name: str) -> str:
    rows = [(a.alarm.value, a.target, a.t_alarm, a.value, a.threshold) for a in alarms]
    return _table(scenario_name, ["alarm", "target", "t_alarm", "value", "threshold"], rows)


def portrait_csv(portrait: PhasePortrait, scenario_name: str) -> str:
    rows = ((r, d, "1" if ok else "0") for r, d, ok in zip(portrait.rocof, portrait.dvdc_pct, portrait.inside))
    return _table(scenario_name, ["rocof[Hz/s]", "dvdc_pct[%]", "inside"], rows)


def emit_omega_theta_portrait(series: TimeSeries, machine: int, path, scenario_name: str = "") -> Path:
    """Write ``theta`` (rad) against absolute speed ``omega_s + delta_omega`` (pu)."""
    for name in (f"theta_{machine}", f"delta_omega_{machine}"):
        if name not in series:
            raise MissingColumn(f"series has no {name!r} column")
    ws = series.meta.get("omega_s", 1.0)
    ws = float(ws[machine - 1]) if isinstance(ws, (list, tuple)) else float(ws)
    rows = np.column_stack([series[f"theta_{machine}"], ws + series[f"delta_omega_{machine}"]])
    return write_atomic(path, _table(scenario_name, ["theta[rad]", "omega[pu]"], rows, f"machine={machine}"))


# -- orchestration -------------------------------------------------------------

@dataclass
class RunReport:
    scenario: str
    paths: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    trips: list = field(default_factory=list)
    alarms: list = field(default_factory=list)
    series: Optional[TimeSeries] = None
    portrait: Optional[PhasePortrait] = None
    overlay: Optional[TimeSeries] = None


def initial_state(sc: Scenario):
    if sc.initial.mode == "equilibrium":
        return find_equilibrium(sc.model, load=sc.load_current)
    return sc.initial.state(sc.model.N, sc.load_current)


def analytic_overlay(sc: Scenario, times=None, state=None) -> TimeSeries:
    """Closed-form rotor trajectories of every machine under the scenario's attacks.

    Each machine is treated as a single machine with its electrical power held
    at the initial value, so the overlay tracks the simulation exactly only in
    that linear setting.
    """
    state = initial_state(sc) if state is None else state
    if times is None:
        step = sc.integrator.dt * sc.integrator.record_every
        nrec = int(round(sc.integrator.t_end / step))
        times = state.t + step * np.arange(nrec + 1)
        if times[-1] < state.t + sc.integrator.t_end:
            times = np.append(times, state.t + sc.integrator.t_end)
    pe0 = electrical_power(state.theta, sc.model.network, state.v_int)
    if sc.model.pe_mode == "frozen" and sc.model.pe_frozen is not None:
        pe0 = np.asarray(sc.model.pe_frozen, dtype=float)
    cols, units = {}, {}
    for i, gen in enumerate(sc.model.generators):
        has_pe_gain = any(a.target is Target.ElectricalPower and a.machine == gen.index and a.alpha
                          for a in sc.attacks)
        pe_traj = (lambda t, p=float(pe0[i]): np.full_like(np.asarray(t, dtype=float), p)) if has_pe_gain else None
        dw, th = piecewise_rotor_response(gen, sc.attacks, times, float(state.delta_omega[i]),
                                          float(state.theta[i]), t0=float(state.t), Pe_traj=pe_traj)
        cols[f"delta_omega_{i + 1}"], units[f"delta_omega_{i + 1}"] = dw, "pu"
        cols[f"theta_{i + 1}"], units[f"theta_{i + 1}"] = th, "rad"
    return TimeSeries(times, cols, units, {"vdc_unit": sc.model.vdc_unit})


def _simulate_with_breakers(sc: Scenario, state):
    """Simulate, opening a machine's breaker at its first machine-relay trip when enabled.

    Returns the (possibly spliced) series and the ``(machine, t_trip)`` pairs
    opened.  Once every breaker is open the series stops at the last trip.
    """
    model = sc.model
    series = simulate(state, model, sc.attacks, sc.integrator, sc.faults)
    if not sc.open_breaker:
        return series, ()
    opened = []
    t_end = state.t + sc.integrator.t_end
    while True:
        splice_after = opened[-1][1] if opened else -np.inf
        pending = [e for e in evaluate_relays(series, sc.relays)
                   if e.relay in _MACHINE_RELAYS and e.t_trip >= splice_after
                   and model.connected[int(e.target) - 1] and e.t_trip < t_end]
        if not pending:
            return series, tuple(opened)
        event = pending[0]
        machine = int(event.target)
        k = int(np.searchsorted(series.times, event.t_trip))
        restart = state_at(series, k, model.N)
        model = model.disconnect(machine)
        opened.append((machine, event.t_trip))
        if not any(model.connected):
            # nothing left to feed the DC link: the run ends at the last trip
            return series.slice(0, k + 1), tuple(opened)
        remaining = t_end - restart.t
        integ = type(sc.integrator)(sc.integrator.method, sc.integrator.dt, remaining, sc.integrator.record_every)
        tail = simulate(restart, model, sc.attacks, integ, sc.faults)
        series = TimeSeries.concat([series.slice(0, k + 1), tail.slice(1)])


def summarize(series: TimeSeries, trips, alarms, portrait: PhasePortrait) -> dict:
    n = int(series.meta["n_machines"])
    vref = float(series.meta["V_DC_ref"])
    dw = max(float(np.max(np.abs(series[f"delta_omega_{i + 1}"]))) for i in range(n))
    return {
        "max_abs_delta_omega": dw,
        "max_abs_dvdc_rel": float(np.max(np.abs(series["V_DC"] - vref)) / vref),
        "trip_count": len(trips),
        "alarm_count": len(alarms),
        "fraction_inside": portrait.fraction_inside,
        "attack_success": len(trips) > 0,
    }


def run(sc: Scenario, out_dir=None) -> RunReport:
    """Execute a scenario and, when ``out_dir`` is given, write its requested files.

    Numerical errors propagate with the scenario name prefixed to the message.
    """
    try:
        state = initial_state(sc)
        series, opened = _simulate_with_breakers(sc, state)
        trips = evaluate_relays(series, sc.relays)
        alarms = evaluate_alarms(series, sc.relays)
        portrait = phase_portrait(series, sc.relays, sc.portrait_machine)
        overlay = analytic_overlay(sc, series.times, state) if "analytic_overlay" in sc.outputs else None
    except SpsError as exc:
        if exc.args:
            exc.args = (f"scenario {sc.name!r}: {exc.args[0]}",) + exc.args[1:]
        raise
    summary = summarize(series, trips, alarms, portrait)
    summary["breakers_opened"] = ";".join(f"{m}@{_label(t)}" for m, t in opened)
    summary["blackout"] = len(opened) == sc.model.N
    report = RunReport(sc.name, {}, summary, trips, alarms, series, portrait, overlay)
    if out_dir is not None:
        report.paths = _emit(sc, report, Path(out_dir))
    return report


def _emit(sc: Scenario, report: RunReport, out: Path) -> dict:
    name = sc.name
    paths = {}
    if "timeseries" in sc.outputs:
        paths["timeseries"] = write_atomic(out / f"{name}_timeseries.csv", timeseries_csv(report.series, name))
    if "trip_log" in sc.outputs:
        paths["trip_log"] = write_atomic(out / f"{name}_trips.csv", trip_log_csv(report.trips, name))
        paths["alarm_log"] = write_atomic(out / f"{name}_alarms.csv", alarm_log_csv(report.alarms, name))
    if "phase_portrait" in sc.outputs:
        paths["phase_portrait"] = write_atomic(out / f"{name}_phase_portrait.csv",
                                               portrait_csv(report.portrait, name))
    if "omega_theta_portrait" in sc.outputs:
        paths["omega_theta_portrait"] = emit_omega_theta_portrait(
            report.series, sc.portrait_machine, out / f"{name}_omega_theta.csv", name)
    if "analytic_overlay" in sc.outputs:
        paths["analytic_overlay"] = write_atomic(out / f"{name}_analytic.csv",
                                                 timeseries_csv(report.overlay, name))
    paths["summary"] = write_atomic(out / f"{name}_summary.csv", summary_csv([report.summary], name))
    return paths


SUMMARY_FIELDS = ("max_abs_delta_omega", "max_abs_dvdc_rel", "trip_count", "alarm_count", "fraction_inside",
                  "attack_success", "breakers_opened", "blackout")


def summary_csv(rows, scenario_name: str, lead: Sequence[str] = ()) -> str:
    header = list(lead) + list(SUMMARY_FIELDS)

    def cell(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, str):
            return v
        return _num(v)

    return _table(scenario_name, header, ([cell(r[k]) for k in header] for r in rows))


def run_analytic(sc: Scenario, out_dir) -> Path:
    """Write closed-form trajectories only (no simulation)."""
    overlay = analytic_overlay(sc)
    return write_atomic(Path(out_dir) / f"{sc.name}_analytic.csv", timeseries_csv(overlay, sc.name))


def _sweep_one(args):
    sc, param, value = args
    report = run(with_parameter(sc, param, value))
    row = dict(report.summary)
    row["param"] = param
    row["value"] = _label(value)
    return row


def sweep(sc: Scenario, param: str, values: Sequence, out_dir=None, workers: int = 1):
    """Run ``sc`` once per value of ``param``; return one summary row per value.

    With ``workers > 1`` the runs go to a process pool; row order always
    follows ``values``.
    """
    for v in values:
        with_parameter(sc, param, v)  # fail fast on a bad path or value
    jobs = [(sc, param, v) for v in values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    if out_dir is not None:
        write_atomic(Path(out_dir) / f"{sc.name}_sweep.csv", summary_csv(rows, sc.name, lead=("param", "value")))
    return rows


def run_file(path, out_dir=None) -> RunReport:
    return run(load_scenario(path), out_dir)
