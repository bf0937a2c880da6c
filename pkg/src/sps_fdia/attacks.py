"""False-data-injection attacks on measurement channels.

A corrupted measurement is ``x_hat = x + alpha*x + beta(t - t_start) + gamma``
while ``t_start <= t < t_end`` and ``x`` otherwise.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import OverlappingAttacks


class Target(enum.Enum):
    RotorSpeedDeviation = "RotorSpeedDeviation"
    ElectricalPower = "ElectricalPower"
    BusVoltageD = "BusVoltageD"
    BusVoltageQ = "BusVoltageQ"

    @property
    def code(self) -> int:
        return _TARGET_CODES[self]


_TARGET_CODES = {
    Target.RotorSpeedDeviation: 0,
    Target.ElectricalPower: 1,
    Target.BusVoltageD: 2,
    Target.BusVoltageQ: 3,
}

BETA_KINDS = ("zero", "ramp", "sinusoid")


@dataclass(frozen=True)
class TimeVaryingTerm:
    """Time-varying attack term evaluated on time since attack onset.

    ``zero``: 0; ``ramp``: ``slope * u``;
    ``sinusoid``: ``amplitude * sin(2*pi*frequency*u + phase)``.
    """

    kind: str = "zero"
    slope: float = 0.0
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in BETA_KINDS:
            raise ValueError(f"unknown beta kind {self.kind!r}; expected one of {BETA_KINDS}")

    @classmethod
    def ramp(cls, slope):
        return cls("ramp", slope=slope)

    @classmethod
    def sinusoid(cls, amplitude, frequency, phase=0.0):
        return cls("sinusoid", amplitude=amplitude, frequency=frequency, phase=phase)

    @property
    def is_zero(self) -> bool:
        if self.kind == "ramp":
            return self.slope == 0.0
        if self.kind == "sinusoid":
            return self.amplitude == 0.0
        return True

    def __call__(self, u):
        if self.kind == "ramp":
            return self.slope * np.asarray(u, dtype=float) if np.ndim(u) else self.slope * float(u)
        if self.kind == "sinusoid":
            w = 2.0 * math.pi * self.frequency
            return self.amplitude * np.sin(w * np.asarray(u, dtype=float) + self.phase)
        return np.zeros_like(u, dtype=float) if np.ndim(u) else 0.0

    def params(self) -> tuple:
        """(kind code, p0, p1, p2) as consumed by the integration kernel."""
        if self.kind == "ramp":
            return 1, self.slope, 0.0, 0.0
        if self.kind == "sinusoid":
            return 2, self.amplitude, self.frequency, self.phase
        return 0, 0.0, 0.0, 0.0


@dataclass(frozen=True)
class AttackSpec:
    """One FDIA on one channel of one machine (1-based ``machine`` id)."""

    target: Target
    machine: int = 1
    alpha: float = 0.0
    gamma: float = 0.0
    beta: TimeVaryingTerm = field(default_factory=TimeVaryingTerm)
    t_start: float = 0.0
    t_end: float = math.inf

    def __post_init__(self):
        if not isinstance(self.target, Target):
            object.__setattr__(self, "target", Target(self.target))
        if not self.t_start < self.t_end:
            raise ValueError(f"attack window requires t_start < t_end (got {self.t_start}, {self.t_end})")

    def active(self, t) -> bool:
        return self.t_start <= t < self.t_end

    def overlaps(self, other: "AttackSpec") -> bool:
        return (self.target is other.target and self.machine == other.machine
                and self.t_start < other.t_end and other.t_start < self.t_end)


def apply_fdia(true_value, spec: AttackSpec, t: float):
    """Corrupt ``true_value`` with ``spec`` at time ``t`` (identity outside the window)."""
    if not spec.active(t):
        return true_value
    return true_value + spec.alpha * true_value + spec.beta(t - spec.t_start) + spec.gamma


@dataclass
class MeasurementSet:
    """Measured values seen by the controllers, one entry per machine."""

    delta_omega: np.ndarray
    P_e: Optional[np.ndarray]
    v_bd: np.ndarray
    v_bq: np.ndarray

    @property
    def v_b(self) -> np.ndarray:
        return np.hypot(self.v_bd, self.v_bq)


_CHANNEL_FIELD = {
    Target.RotorSpeedDeviation: "delta_omega",
    Target.ElectricalPower: "P_e",
    Target.BusVoltageD: "v_bd",
    Target.BusVoltageQ: "v_bq",
}


def check_overlaps(attacks: Sequence[AttackSpec]) -> None:
    """Raise :class:`OverlappingAttacks` if two windows on one channel intersect."""
    for a_idx, a in enumerate(attacks):
        for b in attacks[a_idx + 1:]:
            if a.overlaps(b):
                raise OverlappingAttacks(
                    f"two attacks on ({a.target.value}, machine {a.machine}) overlap in time")


def corrupted_measurements(state, attacks: Sequence[AttackSpec], t: float, P_e=None) -> MeasurementSet:
    """Measurements of ``state`` at ``t`` after applying every active attack.

    ``P_e`` carries the true electrical powers; it may be omitted when no
    attack targets the power channel.
    """
    active = [a for a in attacks if a.active(t)]
    seen = set()
    for a in active:
        key = (a.target, a.machine)
        if key in seen:
            raise OverlappingAttacks(f"two attacks on ({a.target.value}, machine {a.machine}) active at t={t}")
        seen.add(key)

    meas = MeasurementSet(
        delta_omega=np.array(state.delta_omega, dtype=float),
        P_e=None if P_e is None else np.array(P_e, dtype=float),
        v_bd=np.array(state.v_bd, dtype=float),
        v_bq=np.array(state.v_bq, dtype=float),
    )
    for a in active:
        values = getattr(meas, _CHANNEL_FIELD[a.target])
        if values is None:
            raise ValueError("an ElectricalPower attack needs the true P_e values")
        i = a.machine - 1
        values[i] = apply_fdia(values[i], a, t)
    return meas


def attack_table(attacks: Sequence[AttackSpec]) -> np.ndarray:
    """Pack attacks into an (M, 10) float array for the integration kernel.

    Columns: target code, machine index (0-based), alpha, gamma, beta kind,
    beta p0..p2, t_start, t_end.
    """
    table = np.zeros((len(attacks), 10))
    for r, a in enumerate(attacks):
        kind, p0, p1, p2 = a.beta.params()
        table[r] = (a.target.code, a.machine - 1, a.alpha, a.gamma, kind, p0, p1, p2, a.t_start, a.t_end)
    return table
