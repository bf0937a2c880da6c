"""Physical parameters, network model and state vector of the shipboard system.

All AC quantities are per unit on machine base and time is in seconds.  The
DC link is either per unit or physical volts, as declared by ``vdc_unit``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError

# per-machine state fields, in layout order
MACHINE_FIELDS = (
    "theta", "delta_omega", "x_gov", "x_exc", "P_m", "v_int",
    "i_sd", "i_sq", "v_bd", "v_bq", "i_od", "i_oq", "phi_d", "phi_q",
)
N_MACHINE_FIELDS = len(MACHINE_FIELDS)
FIELD_INDEX = {name: k for k, name in enumerate(MACHINE_FIELDS)}

MACHINE_UNITS = {
    "theta": "rad", "delta_omega": "pu", "x_gov": "pu*s", "x_exc": "pu*s",
    "P_m": "pu", "v_int": "pu", "i_sd": "pu", "i_sq": "pu", "v_bd": "pu",
    "v_bq": "pu", "i_od": "pu", "i_oq": "pu", "phi_d": "pu*s", "phi_q": "pu*s",
}

PE_MODES = ("network", "frozen")
PM_MODES = ("governor", "fixed")
VDC_UNITS = ("pu", "V")

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GeneratorParams:
    """Synchronous machine and controller constants for one PGM.

    ``index`` is the 1-based machine id used in scenario files and column
    names.  ``T_m`` and ``T_v`` close the fuel-index -> mechanical-power and
    field-voltage -> internal-voltage paths with first-order lags.
    """

    index: int = 1
    H: float = 3.0
    D: float = 2.0
    omega_s: float = 1.0
    f_nominal: float = 60.0
    kp_gov: float = 10.0
    ki_gov: float = 5.0
    kp_exc: float = 1.0
    ki_exc: float = 5.0
    v_b_ref: float = 1.0
    T_m: float = 0.5
    T_v: float = 0.3

    @property
    def phi(self) -> float:
        """Angle-rate constant 2*pi*f in rad/s."""
        return _TWO_PI * self.f_nominal


def _as_matrix(value) -> tuple:
    arr = np.atleast_2d(np.asarray(value, dtype=float))
    return tuple(tuple(float(x) for x in row) for row in arr)


@dataclass(frozen=True)
class NetworkModel:
    """Kron-reduced machine-to-machine network.

    Matrices are stored as nested tuples so instances stay hashable and
    comparable; use :attr:`G_array` / :attr:`B_array` for arithmetic.
    """

    G: tuple
    B: tuple
    V_mag: tuple

    def __post_init__(self):
        object.__setattr__(self, "G", _as_matrix(self.G))
        object.__setattr__(self, "B", _as_matrix(self.B))
        object.__setattr__(self, "V_mag", tuple(float(v) for v in np.atleast_1d(self.V_mag)))

    @property
    def N(self) -> int:
        return len(self.V_mag)

    @property
    def G_array(self) -> np.ndarray:
        return np.array(self.G, dtype=float)

    @property
    def B_array(self) -> np.ndarray:
        return np.array(self.B, dtype=float)


@dataclass(frozen=True)
class ConverterParams:
    """Source-side filter, current controller and DC-voltage regulator.

    Inductances and capacitances are in per-unit seconds (X/omega_base), so
    ``omega * L_s`` is the per-unit reactance at the instantaneous electrical
    speed.  ``i_oq_ref`` is the q-axis output-current reference.
    """

    r_s: float = 0.01
    L_s: float = 0.1 / (_TWO_PI * 60.0)
    C_s: float = 0.1 / (_TWO_PI * 60.0)
    r_f: float = 0.01
    L_f: float = 0.05 / (_TWO_PI * 60.0)
    Kpd_i: float = 0.5
    Kid_i: float = 50.0
    Kpq_i: float = 0.5
    Kiq_i: float = 50.0
    Kp_V: float = 5.0
    Ki_V: float = 100.0
    C_DC: float = 0.05
    S_c: float = 1.0
    V_DC_ref: float = 1.0
    i_oq_ref: float = 0.0


@dataclass(frozen=True)
class PowerSystemModel:
    """Everything the simulator needs apart from the load and the events.

    ``pe_mode='frozen'`` replaces the network power with ``pe_frozen`` (or the
    value at the initial state when ``None``); ``pm_mode='fixed'`` holds the
    mechanical power at its initial value.  Together they give the linear
    single-machine setting in which the closed-form rotor solutions are exact.
    """

    generators: tuple
    network: NetworkModel
    converter: ConverterParams = field(default_factory=ConverterParams)
    pe_mode: str = "network"
    pm_mode: str = "governor"
    shared_sensor: bool = True
    pe_frozen: Optional[tuple] = None
    vdc_unit: str = "pu"
    connected: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.pe_frozen is not None:
            object.__setattr__(self, "pe_frozen", tuple(float(p) for p in self.pe_frozen))
        if self.connected is None:
            object.__setattr__(self, "connected", (True,) * len(self.generators))
        else:
            object.__setattr__(self, "connected", tuple(bool(c) for c in self.connected))

    @property
    def N(self) -> int:
        return len(self.generators)

    def disconnect(self, machine: int) -> "PowerSystemModel":
        """Return a copy with breaker of ``machine`` (1-based) opened."""
        conn = list(self.connected)
        conn[machine - 1] = False
        return replace(self, connected=tuple(conn))


def default_model(n_machines: int = 2, **overrides) -> PowerSystemModel:
    """Desk-scale two-PGM model: H=3 s, D=2, 60 Hz, symmetric network."""
    if n_machines == 2:
        net = NetworkModel(G=[[0.2, 0.8], [0.8, 0.2]], B=[[-4.0, 4.0], [4.0, -4.0]], V_mag=[1.0, 1.0])
    elif n_machines == 1:
        net = NetworkModel(G=[[1.0]], B=[[0.0]], V_mag=[1.0])
    else:
        raise ValueError("default_model ships 1- and 2-machine layouts only")
    gens = tuple(GeneratorParams(index=i + 1) for i in range(n_machines))
    return PowerSystemModel(generators=gens, network=net, **overrides)


@dataclass
class SystemState:
    """Full dynamic state at time ``t``.

    Per-machine fields are length-N arrays.  ``v_int`` is the internal voltage
    magnitude |V_i| produced by the field-voltage lag; the field voltage
    itself is algebraic (see :func:`derived_inputs`).  ``i_l`` is the
    exogenous DC load current in force at ``t``.
    """

    t: float
    theta: np.ndarray
    delta_omega: np.ndarray
    x_gov: np.ndarray
    x_exc: np.ndarray
    P_m: np.ndarray
    v_int: np.ndarray
    i_sd: np.ndarray
    i_sq: np.ndarray
    v_bd: np.ndarray
    v_bq: np.ndarray
    i_od: np.ndarray
    i_oq: np.ndarray
    phi_d: np.ndarray
    phi_q: np.ndarray
    phi_V: float
    V_DC: float
    i_l: float = 0.0

    @property
    def N(self) -> int:
        return len(self.theta)

    def to_vector(self) -> np.ndarray:
        n = self.N
        y = np.empty(N_MACHINE_FIELDS * n + 2)
        for k, name in enumerate(MACHINE_FIELDS):
            y[k * n:(k + 1) * n] = getattr(self, name)
        y[-2] = self.phi_V
        y[-1] = self.V_DC
        return y

    @classmethod
    def from_vector(cls, y, n: int, t: float = 0.0, i_l: float = 0.0) -> "SystemState":
        y = np.asarray(y, dtype=float)
        if y.shape != (N_MACHINE_FIELDS * n + 2,):
            raise DimensionError(f"state vector of length {y.shape} does not fit {n} machines")
        kw = {name: y[k * n:(k + 1) * n].copy() for k, name in enumerate(MACHINE_FIELDS)}
        return cls(t=float(t), phi_V=float(y[-2]), V_DC=float(y[-1]), i_l=float(i_l), **kw)

    @classmethod
    def zeros(cls, n: int, V_DC: float = 1.0) -> "SystemState":
        return cls.from_vector(np.r_[np.zeros(N_MACHINE_FIELDS * n + 1), V_DC], n)

    def copy(self) -> "SystemState":
        return SystemState.from_vector(self.to_vector(), self.N, self.t, self.i_l)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.to_vector())))


def state_size(n: int) -> int:
    return N_MACHINE_FIELDS * n + 2


def validate_model(generators: Sequence[GeneratorParams], network: NetworkModel,
                   converter: ConverterParams) -> list:
    """Return the list of violated model invariants (empty when valid)."""
    report = []
    for gen in generators:
        tag = f"machine {gen.index}"
        for name in ("H", "D", "T_m", "T_v"):
            if not getattr(gen, name) > 0:
                report.append(f"{tag}: {name} > 0 violated ({getattr(gen, name)!r})")
        if gen.f_nominal not in (50, 60):
            report.append(f"{tag}: f_nominal must be 50 or 60 Hz ({gen.f_nominal!r})")
    G, B = network.G_array, network.B_array
    n = network.N
    if G.shape != (n, n) or B.shape != (n, n):
        report.append(f"network: G and B must be {n}x{n} (got {G.shape}, {B.shape})")
    else:
        if not np.array_equal(G, G.T):
            report.append("network: G symmetry G[i][k] = G[k][i] violated")
        if not np.array_equal(B, B.T):
            report.append("network: B symmetry B[i][k] = B[k][i] violated")
    if any(not v > 0 for v in network.V_mag):
        report.append("network: V_mag[i] > 0 violated")
    if len(generators) != n:
        report.append(f"network has {n} machines but {len(generators)} generators are defined")
    for name in ("L_s", "L_f", "C_s", "C_DC", "S_c", "V_DC_ref"):
        if not getattr(converter, name) > 0:
            report.append(f"converter: {name} > 0 violated ({getattr(converter, name)!r})")
    return report


def electrical_power(theta, network: NetworkModel, V_mag=None) -> np.ndarray:
    """Kron-reduced electrical power of every machine.

    P_e[i] = sum_k |V_i||V_k| (G_ik cos(theta_i - theta_k) + B_ik sin(theta_i - theta_k))

    ``V_mag`` overrides the network's stored magnitudes (the simulator passes
    the dynamic internal voltages).
    """
    theta = np.asarray(theta, dtype=float)
    V = np.asarray(network.V_mag if V_mag is None else V_mag, dtype=float)
    if theta.shape != (network.N,) or V.shape != (network.N,):
        raise DimensionError(f"expected {network.N} angles and magnitudes, got {theta.shape}, {V.shape}")
    diff = theta[:, None] - theta[None, :]
    terms = network.G_array * np.cos(diff) + network.B_array * np.sin(diff)
    return V * (terms @ V)


def derived_inputs(state: SystemState, gen: GeneratorParams, measurements=None):
    """Algebraic controller outputs of machine ``gen.index``.

    Returns ``(P_f, E_f, v_sd, v_sq)``.  ``measurements`` is a
    :class:`~sps_fdia.attacks.MeasurementSet`; without one the true state is
    used.  The governor reads the speed-deviation measurement and the exciter
    the bus-voltage measurements.
    """
    i = gen.index - 1
    if measurements is None:
        dw, vbd, vbq = state.delta_omega[i], state.v_bd[i], state.v_bq[i]
    else:
        dw = measurements.delta_omega[i]
        vbd, vbq = measurements.v_bd[i], measurements.v_bq[i]
    P_f = gen.kp_gov * (-dw) + gen.ki_gov * state.x_gov[i]
    v_b = math.hypot(vbd, vbq)
    E_f = gen.kp_exc * (gen.v_b_ref - v_b) + gen.ki_exc * state.x_exc[i]
    return P_f, E_f, float(state.v_int[i]), 0.0


def generator_table(generators: Sequence[GeneratorParams]) -> np.ndarray:
    """Pack generator parameters into an (N, 12) float array for the kernel."""
    cols = ("H", "D", "omega_s", "f_nominal", "kp_gov", "ki_gov", "kp_exc", "ki_exc",
            "v_b_ref", "T_m", "T_v")
    out = np.empty((len(generators), len(cols) + 1))
    for r, gen in enumerate(generators):
        out[r, :-1] = [getattr(gen, c) for c in cols]
        out[r, -1] = gen.phi
    return out


GEN_COLUMNS = ("H", "D", "omega_s", "f_nominal", "kp_gov", "ki_gov", "kp_exc", "ki_exc",
               "v_b_ref", "T_m", "T_v", "phi")
CONV_COLUMNS = tuple(f.name for f in fields(ConverterParams))


def converter_vector(conv: ConverterParams) -> np.ndarray:
    return np.array([getattr(conv, name) for name in CONV_COLUMNS], dtype=float)
