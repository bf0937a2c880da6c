"""Nonlinear time-domain simulation of the PGMs, converters and DC link.

Physical equations always see true values; corrupted measurements enter only
the swing damping/power terms, the governor and exciter errors and the
converter power terms of the DC-link equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernel
from .attacks import AttackSpec, attack_table, check_overlaps
from .errors import DimensionError, NoConvergence, NonfiniteState, NonpositiveVdc
from .model import (
    MACHINE_FIELDS, MACHINE_UNITS, NetworkModel, PowerSystemModel,
    SystemState, converter_vector, electrical_power, generator_table, state_size,
)

METHODS = ("RK4", "Euler")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "RK4"
    dt: float = 1e-4
    t_end: float = 10.0
    record_every: int = 10

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if not self.dt > 0 or not self.t_end > 0:
            raise ValueError("dt and t_end must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be an integer >= 1")


@dataclass(frozen=True)
class FaultSpec:
    """Window-scoped disturbance.

    Within ``[t_start, t_end)`` the DC load current is multiplied by
    ``i_l_scale`` and the listed network entries by their scale.  Entries are
    ``(i, k, scale)`` with 1-based machine ids and are applied symmetrically.
    """

    t_start: float
    t_end: float
    i_l_scale: float = 1.0
    G_entries: tuple = ()
    B_entries: tuple = ()

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"fault window requires t_start < t_end (got {self.t_start}, {self.t_end})")
        for name in ("G_entries", "B_entries"):
            entries = tuple((int(i), int(k), float(s)) for i, k, s in getattr(self, name))
            object.__setattr__(self, name, entries)

    def active(self, t) -> bool:
        return self.t_start <= t < self.t_end

    def scale_matrices(self, n: int):
        gs, bs = np.ones((n, n)), np.ones((n, n))
        for mat, entries in ((gs, self.G_entries), (bs, self.B_entries)):
            for i, k, s in entries:
                mat[i - 1, k - 1] = s
                mat[k - 1, i - 1] = s
        return gs, bs


@dataclass(frozen=True)
class FaultView:
    network: NetworkModel
    i_l: float


def inject_fault(model: PowerSystemModel, fault: FaultSpec, t: float, i_l: float) -> FaultView:
    """Network and load seen at ``t`` with ``fault`` applied (unchanged outside its window)."""
    return effective_view(model, [fault], t, i_l)


def effective_view(model: PowerSystemModel, faults: Sequence[FaultSpec], t: float, i_l: float) -> FaultView:
    net = model.network
    G, B = net.G_array, net.B_array
    load = i_l
    for f in faults:
        if f.active(t):
            gs, bs = f.scale_matrices(net.N)
            G, B, load = G * gs, B * bs, load * f.i_l_scale
    off = [i for i, c in enumerate(model.connected) if not c]
    if off:
        G, B = G.copy(), B.copy()
        G[off, :] = G[:, off] = 0.0
        B[off, :] = B[:, off] = 0.0
    return FaultView(NetworkModel(G=G, B=B, V_mag=net.V_mag), load)


class TimeSeries:
    """Sampled trajectory: ``times`` plus named, equal-length columns.

    Arrays are read-only.  ``units`` maps column name to unit string and
    ``meta`` carries nominal values the protection module needs.
    """

    def __init__(self, times, columns: dict, units: Optional[dict] = None, meta: Optional[dict] = None):
        self.times = np.asarray(times, dtype=float)
        self.times.flags.writeable = False
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be a strictly increasing vector")
        self.columns = {}
        for name, values in columns.items():
            arr = np.asarray(values, dtype=float)
            if arr.shape != self.times.shape:
                raise DimensionError(f"column {name!r} has shape {arr.shape}, expected {self.times.shape}")
            arr.flags.writeable = False
            self.columns[name] = arr
        self.units = dict(units or {})
        self.meta = dict(meta or {})

    def __getitem__(self, name) -> np.ndarray:
        return self.columns[name]

    def __contains__(self, name) -> bool:
        return name in self.columns

    def __len__(self) -> int:
        return len(self.times)

    @property
    def names(self):
        return list(self.columns)

    def slice(self, start: int, stop: Optional[int] = None) -> "TimeSeries":
        return TimeSeries(self.times[start:stop], {k: v[start:stop] for k, v in self.columns.items()},
                          self.units, self.meta)

    @classmethod
    def concat(cls, parts: Sequence["TimeSeries"]) -> "TimeSeries":
        first = parts[0]
        times = np.concatenate([p.times for p in parts])
        cols = {k: np.concatenate([p[k] for p in parts]) for k in first.names}
        return cls(times, cols, first.units, first.meta)


def _pe_frozen(model: PowerSystemModel, state: SystemState) -> np.ndarray:
    if model.pe_frozen is not None:
        pe = np.asarray(model.pe_frozen, dtype=float)
        if pe.shape != (model.N,):
            raise DimensionError("pe_frozen needs one value per machine")
        return pe
    return electrical_power(state.theta, model.network, state.v_int)


def _snap(edge: float, t0: float, dt: Optional[float]) -> float:
    # edges within rounding of a step boundary land exactly on it
    if dt is None or not math.isfinite(edge):
        return edge
    k = round((edge - t0) / dt)
    grid = t0 + k * dt
    return grid if abs(grid - edge) <= 1e-9 * dt else edge


def _kernel_args(model: PowerSystemModel, state: SystemState, attacks, faults, dt=None):
    n = model.N
    if state.N != n:
        raise DimensionError(f"state has {state.N} machines, model has {n}")
    net = model.network
    gp = generator_table(model.generators)
    cp = converter_vector(model.converter)
    opts = np.array([model.pe_mode == "frozen", model.pm_mode == "fixed", model.shared_sensor], dtype=float)
    pe_frozen = _pe_frozen(model, state) if model.pe_mode == "frozen" else np.zeros(n)
    connected = np.array(model.connected, dtype=np.bool_)
    atk = attack_table(attacks)
    for row in atk:
        row[8], row[9] = _snap(row[8], state.t, dt), _snap(row[9], state.t, dt)
    for a in attacks:
        if not 1 <= a.machine <= n:
            raise DimensionError(f"attack targets machine {a.machine} of {n}")
    k = len(faults)
    flt_win = np.zeros((k, 2))
    flt_il = np.ones(k)
    flt_G = np.ones((k, n, n))
    flt_B = np.ones((k, n, n))
    for r, f in enumerate(faults):
        flt_win[r] = _snap(f.t_start, state.t, dt), _snap(f.t_end, state.t, dt)
        flt_il[r] = f.i_l_scale
        flt_G[r], flt_B[r] = f.scale_matrices(n)
    return (n, gp, net.G_array, net.B_array, cp, opts, pe_frozen, connected, float(state.i_l), atk,
            flt_win, flt_il, flt_G, flt_B)


def _raise_status(status, t):
    if status == _kernel.ERR_VDC:
        raise NonpositiveVdc(f"V_DC became nonpositive at t={t:.6g} s", t=t)
    if status == _kernel.ERR_NONFINITE:
        raise NonfiniteState(f"non-finite state at t={t:.6g} s", t=t)


def state_derivative(state: SystemState, model: PowerSystemModel, attacks: Sequence[AttackSpec] = (),
                     t: Optional[float] = None, faults: Sequence[FaultSpec] = ()) -> SystemState:
    """Time derivative of every state field, returned as a :class:`SystemState`.

    ``t`` defaults to ``state.t``.  Raises :class:`NonpositiveVdc` or
    :class:`NonfiniteState`.
    """
    t = state.t if t is None else float(t)
    args = _kernel_args(model, state, attacks, faults)
    y = state.to_vector()
    if not np.all(np.isfinite(y)):
        raise NonfiniteState(f"non-finite state at t={t:.6g} s", t=t)
    dy = np.empty_like(y)
    aux = np.empty((_kernel.N_AUX, model.N))
    _raise_status(_kernel.rhs(t, t, y, *args, dy, aux), t)
    return SystemState.from_vector(dy, model.N, t=t, i_l=state.i_l)


def _columns(model: PowerSystemModel, Y, AUX, times, faults, i_l):
    n = model.N
    cols, units = {}, {}
    for k, name in enumerate(MACHINE_FIELDS):
        for i in range(n):
            cols[f"{name}_{i + 1}"] = Y[:, k * n + i]
            units[f"{name}_{i + 1}"] = MACHINE_UNITS[name]
    vunit = model.vdc_unit
    cols["phi_V"], units["phi_V"] = Y[:, -2], f"{vunit}*s"
    cols["V_DC"], units["V_DC"] = Y[:, -1], vunit
    vref = model.converter.V_DC_ref
    cols["dV_DC_pct"], units["dV_DC_pct"] = 100.0 * (Y[:, -1] - vref) / vref, "%"
    cols["i_l"] = np.array([effective_view(model, faults, t, i_l).i_l for t in times]) if faults \
        else np.full(len(times), i_l)
    units["i_l"] = "A" if vunit == "V" else "pu"
    for row, name, unit in ((_kernel.A_PE, "P_e", "pu"), (_kernel.A_PF, "P_f", "pu"),
                            (_kernel.A_EF, "E_f", "pu"), (_kernel.A_PC, "P_c", "pu")):
        for i in range(n):
            cols[f"{name}_{i + 1}"] = AUX[:, row, i]
            units[f"{name}_{i + 1}"] = unit
    for i, gen in enumerate(model.generators):
        scale = gen.f_nominal / gen.omega_s
        cols[f"freq_{i + 1}"] = gen.f_nominal + scale * Y[:, n * 1 + i]
        units[f"freq_{i + 1}"] = "Hz"
        cols[f"rocof_{i + 1}"] = scale * AUX[:, _kernel.A_DDW, i]
        units[f"rocof_{i + 1}"] = "Hz/s"
    return cols, units


def simulate(initial: SystemState, model: PowerSystemModel, attacks: Sequence[AttackSpec] = (),
             integ: IntegratorConfig = IntegratorConfig(), faults: Sequence[FaultSpec] = ()) -> TimeSeries:
    """Integrate from ``initial`` over ``integ.t_end`` seconds with a fixed step.

    Runs from ``initial.t`` to ``initial.t + integ.t_end``.  Output is
    deterministic: identical inputs give bit-identical columns.
    """
    if not initial.is_finite():
        raise NonfiniteState("initial state is not finite", t=initial.t)
    if not initial.V_DC > 0:
        raise NonpositiveVdc("initial V_DC must be positive", t=initial.t)
    check_overlaps(list(attacks))
    args = _kernel_args(model, initial, attacks, faults, integ.dt)
    nsteps = int(round(integ.t_end / integ.dt))
    if nsteps < 1 or abs(nsteps * integ.dt - integ.t_end) > 1e-9 * integ.t_end:
        raise ValueError(f"t_end={integ.t_end} is not a whole number of dt={integ.dt} steps")
    method = METHODS.index(integ.method)
    times, Y, AUX, status, step = _kernel.integrate(
        initial.to_vector(), float(initial.t), float(integ.dt), nsteps, int(integ.record_every), method, *args)
    _raise_status(status, initial.t + step * integ.dt)
    cols, units = _columns(model, Y, AUX, times, faults, initial.i_l)
    meta = {
        "f_nominal": [g.f_nominal for g in model.generators],
        "omega_s": [g.omega_s for g in model.generators],
        "V_DC_ref": model.converter.V_DC_ref,
        "vdc_unit": model.vdc_unit,
        "n_machines": model.N,
        "dt": integ.dt,
        "i_l0": float(initial.i_l),
    }
    return TimeSeries(times, cols, units, meta)


def state_at(series: TimeSeries, index: int, n: int) -> SystemState:
    """Rebuild the :class:`SystemState` recorded at row ``index``."""
    y = np.empty(state_size(n))
    for k, name in enumerate(MACHINE_FIELDS):
        for i in range(n):
            y[k * n + i] = series[f"{name}_{i + 1}"][index]
    y[-2] = series["phi_V"][index]
    y[-1] = series["V_DC"][index]
    return SystemState.from_vector(y, n, t=series.times[index], i_l=float(series.meta.get("i_l0", 0.0)))


# -- equilibrium -------------------------------------------------------------

def _ac_side(model: PowerSystemModel, i_od: float, i_oq: float):
    """Steady AC-side solution for given output currents.

    Returns (v_int, i_sd, i_sq, v_bd, v_bq) with |v_b| = v_b_ref, or None when
    no positive internal voltage achieves the reference.
    """
    conv = model.converter
    gen = model.generators[0]
    w = gen.phi
    xl, bc, rs = w * conv.L_s, w * conv.C_s, conv.r_s
    # unknowns (i_sd, i_sq, v_bd, v_bq); rhs affine in v_int
    A = np.array([
        [-rs, xl, -1.0, 0.0],
        [-xl, -rs, 0.0, -1.0],
        [1.0, 0.0, 0.0, bc],
        [0.0, 1.0, -bc, 0.0],
    ])
    x0 = np.linalg.solve(A, [0.0, 0.0, i_od, i_oq])
    x1 = np.linalg.solve(A, [-1.0, 0.0, 0.0, 0.0])
    vref = gen.v_b_ref
    # |(x0 + x1 v)[2:]|^2 = vref^2
    a = x1[2] ** 2 + x1[3] ** 2
    b = 2.0 * (x0[2] * x1[2] + x0[3] * x1[3])
    c = x0[2] ** 2 + x0[3] ** 2 - vref ** 2
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return None
    v = (-b + math.sqrt(disc)) / (2.0 * a)
    if v <= 0:
        return None
    x = x0 + x1 * v
    return v, x[0], x[1], x[2], x[3]


def _converter_power(model: PowerSystemModel, i_od: float):
    conv = model.converter
    i_oq = conv.i_oq_ref
    ac = _ac_side(model, i_od, i_oq)
    if ac is None:
        return None, None
    _, _, _, vbd, vbq = ac
    n_on = sum(model.connected)
    pc = 1.5 * (i_od * (vbd - conv.r_f * i_od) + i_oq * (vbq - conv.r_f * i_oq))
    return conv.S_c * n_on * pc, ac


def find_equilibrium(model: PowerSystemModel, load: float = 0.0, tol: float = 1e-9,
                     max_iter: int = 500) -> SystemState:
    """Attack-free operating point for DC load current ``load``.

    Solves the DC power balance for the shared d-axis output current by damped
    Newton iteration, fills every other state from its steady-state relation
    and checks that the infinity norm of the state derivative is at most
    ``tol``.  Raises :class:`NoConvergence` otherwise.
    """
    gens = model.generators
    if len({(g.phi, g.v_b_ref) for g in gens}) != 1:
        raise NoConvergence("equilibrium search assumes a common frequency and bus-voltage reference")
    conv = model.converter
    target = conv.V_DC_ref * load

    i_od, resid = 0.0, math.inf
    for _ in range(max_iter):
        p, ac = _converter_power(model, i_od)
        if p is None:
            raise NoConvergence(f"no AC operating point for i_od={i_od:.6g}", residual=resid)
        resid = p - target
        if abs(resid) <= 1e-13 * max(1.0, abs(target)):
            break
        h = 1e-7 * max(1.0, abs(i_od))
        p_h, _ = _converter_power(model, i_od + h)
        if p_h is None:
            raise NoConvergence("load beyond converter capability", residual=resid)
        slope = (p_h - p) / h
        if slope <= 0:
            raise NoConvergence("load beyond converter capability", residual=resid)
        step = -resid / slope
        # damping keeps the iterate on the low-current branch
        limit = 0.5 * max(1.0, abs(i_od))
        i_od += max(-limit, min(limit, step))
    else:
        raise NoConvergence(f"power balance did not converge in {max_iter} iterations", residual=resid)

    n = model.N
    v_int, i_sd, i_sq, v_bd, v_bq = ac
    i_oq = conv.i_oq_ref
    on = np.array(model.connected, dtype=float)
    state = SystemState.zeros(n, V_DC=conv.V_DC_ref)
    state.i_l = float(load)
    state.v_int[:] = v_int
    state.i_sd[:] = i_sd * on
    state.i_sq[:] = i_sq * on
    state.v_bd[:] = v_bd
    state.v_bq[:] = v_bq
    state.i_od[:] = i_od * on
    state.i_oq[:] = i_oq * on
    if conv.Kid_i:
        state.phi_d[:] = conv.r_f * i_od / conv.Kid_i * on
    if conv.Kiq_i:
        state.phi_q[:] = conv.r_f * i_oq / conv.Kiq_i * on
    state.phi_V = i_od / conv.Ki_V if conv.Ki_V else 0.0
    for i, g in enumerate(gens):
        state.x_exc[i] = v_int / g.ki_exc if g.ki_exc else 0.0
    pe = _pe_frozen(model, state) if model.pe_mode == "frozen" else \
        electrical_power(state.theta, effective_view(model, (), 0.0, load).network, state.v_int)
    state.P_m[:] = pe
    for i, g in enumerate(gens):
        if g.ki_gov:
            state.x_gov[i] = pe[i] / g.ki_gov
        elif model.pm_mode == "governor" and pe[i] != 0.0:
            raise NoConvergence(f"machine {g.index}: governor without integral action cannot hold P_m = P_e")

    deriv = state_derivative(state, model).to_vector()
    res = float(np.max(np.abs(deriv)))
    if res > tol:
        state, res = _polish(state, model, tol, max_iter)
    if res > tol:
        raise NoConvergence(f"equilibrium residual {res:.3e} exceeds {tol:.1e}", residual=res)
    return state


def _polish(state: SystemState, model: PowerSystemModel, tol: float, max_iter: int):
    """Least-squares Newton refinement on the full derivative."""
    n = model.N
    y = state.to_vector()

    def f(v):
        return state_derivative(SystemState.from_vector(v, n, state.t, state.i_l), model).to_vector()

    r = f(y)
    res = float(np.max(np.abs(r)))
    for _ in range(min(max_iter, 50)):
        if res <= tol:
            break
        J = np.empty((y.size, y.size))
        for j in range(y.size):
            h = 1e-7 * max(1.0, abs(y[j]))
            yp = y.copy()
            yp[j] += h
            J[:, j] = (f(yp) - r) / h
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        y = y + step
        r = f(y)
        res = float(np.max(np.abs(r)))
    return SystemState.from_vector(y, n, state.t, state.i_l), res
