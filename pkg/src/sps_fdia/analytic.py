"""Closed-form rotor transients under FDIA, DC-link attack increment and the
rotor-speed / DC-voltage relation.

The rotor model is the first-order swing equation with ``P_m = P_e`` and the
attack terms folded into

    d(dw)/dt = (l1 + l2) * dw + l3 + l4(t)

with l1 = -D*ws/(2H), l2 = -D*a1*ws/(2H), l3 = -(D*g1 + g2)*ws/(2H) and
l4(t) = -(D*b1(t) + b2(t) + a2*P_e(t))*ws/(2H).  Solutions are written in the
elapsed time ``t - t_o`` so they hold for any start time.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .attacks import AttackSpec, Target, TimeVaryingTerm
from .errors import DegenerateEigenvalue, InvalidVoltage, NonpositiveVdc, UnstableAmplification
from .model import ConverterParams, GeneratorParams

QUAD_RTOL = 1e-9


@dataclass(frozen=True)
class Lambda4:
    """Time-varying forcing term.

    ``terms`` holds ``(weight, beta, t_ref)`` triples contributing
    ``weight * beta(t - t_ref)``; ``pe_gain * pe_traj(t)`` adds the
    power-amplification part.  Plain callables are accepted as ``beta`` but
    force quadrature.
    """

    terms: tuple = ()
    pe_gain: float = 0.0
    pe_traj: Optional[Callable] = None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for weight, beta, t_ref in self.terms:
            out = out + weight * np.asarray(beta(t - t_ref), dtype=float)
        if self.pe_gain:
            out = out + self.pe_gain * np.asarray(self.pe_traj(t), dtype=float)
        return out if out.ndim else float(out)

    @property
    def is_zero(self) -> bool:
        return self.pe_gain == 0.0 and all(
            w == 0.0 or (isinstance(b, TimeVaryingTerm) and b.is_zero) for w, b, _ in self.terms)

    @property
    def has_exact_form(self) -> bool:
        return self.pe_gain == 0.0 and all(isinstance(b, TimeVaryingTerm) for _, b, _ in self.terms)


@dataclass(frozen=True)
class LambdaCoefficients:
    lambda1: float
    lambda2: float = 0.0
    lambda3: float = 0.0
    lambda4: Lambda4 = field(default_factory=Lambda4)

    @property
    def rate(self) -> float:
        """Closed-loop eigenvalue lambda1 + lambda2."""
        return self.lambda1 + self.lambda2


def _as_term(beta):
    if beta is None:
        return TimeVaryingTerm()
    if isinstance(beta, (int, float)):
        if beta:
            raise TypeError("beta must be a TimeVaryingTerm or callable; put constants in gamma")
        return TimeVaryingTerm()
    return beta


def lambda_coefficients(gen: GeneratorParams, attack_coeffs=(0.0, None, 0.0, 0.0, None, 0.0),
                        Pe_traj: Optional[Callable] = None, t_ref: float = 0.0) -> LambdaCoefficients:
    """Lambda coefficients of ``gen`` under ``(a1, b1, g1, a2, b2, g2)``.

    ``b1``/``b2`` are :class:`TimeVaryingTerm` (or callables) evaluated at
    ``t - t_ref``; pass a pair to give the two channels different onsets.
    ``Pe_traj`` is required when ``a2 != 0``.
    """
    a1, b1, g1, a2, b2, g2 = attack_coeffs
    if not gen.H > 0:
        raise ValueError("H must be positive")
    inv = -gen.omega_s / (2.0 * gen.H)
    if a2 and Pe_traj is None:
        raise ValueError("an electrical-power amplification needs a P_e trajectory")
    refs = (t_ref, t_ref) if np.ndim(t_ref) == 0 else tuple(t_ref)
    terms = tuple((inv * w, _as_term(b), r) for w, b, r in ((gen.D, b1, refs[0]), (1.0, b2, refs[1]))
                  if b is not None and not (isinstance(b, (int, float)) and b == 0))
    lam4 = Lambda4(terms=terms, pe_gain=inv * a2 if a2 else 0.0, pe_traj=Pe_traj if a2 else None)
    return LambdaCoefficients(
        lambda1=inv * gen.D,
        lambda2=inv * gen.D * a1,
        lambda3=inv * (gen.D * g1 + g2),
        lambda4=lam4,
    )


def attack_coefficients(attacks: Sequence[AttackSpec], machine: int, t: float):
    """Collect ``(a1, b1, g1, a2, b2, g2)`` and per-channel onset for attacks active at ``t``.

    Returns ``(coeffs, t_refs)`` where ``t_refs`` are the onsets of the speed
    and power attacks (used as beta time origins).
    """
    a1 = g1 = a2 = g2 = 0.0
    b1 = b2 = None
    ref1 = ref2 = 0.0
    for a in attacks:
        if a.machine != machine or not a.active(t):
            continue
        if a.target is Target.RotorSpeedDeviation:
            a1, b1, g1, ref1 = a.alpha, a.beta, a.gamma, a.t_start
        elif a.target is Target.ElectricalPower:
            a2, b2, g2, ref2 = a.alpha, a.beta, a.gamma, a.t_start
    return (a1, b1, g1, a2, b2, g2), (ref1, ref2)


# -- convolution integrals --------------------------------------------------

def _exp_kernel_exact(term: TimeVaryingTerm, s: float, T, u0: float):
    """int_0^T term(v + u0) * exp(s*(T - v)) dv, vectorised over T."""
    T = np.asarray(T, dtype=float)
    if term.is_zero:
        return np.zeros_like(T)
    if term.kind == "ramp":
        k = term.slope
        em1 = np.expm1(s * T)
        return k * ((em1 - s * T) / s ** 2 + u0 * em1 / s)
    w = 2.0 * math.pi * term.frequency
    psi = term.phase + w * u0
    z = 1j * w - s
    vals = cmath.exp(1j * psi) * (np.exp(1j * w * T) - np.exp(s * T)) / z
    return term.amplitude * vals.imag


def _plain_exact(term: TimeVaryingTerm, T, u0: float):
    """int_0^T term(v + u0) dv, vectorised over T."""
    T = np.asarray(T, dtype=float)
    if term.is_zero:
        return np.zeros_like(T)
    if term.kind == "ramp":
        return term.slope * (0.5 * T ** 2 + u0 * T)
    w = 2.0 * math.pi * term.frequency
    psi = term.phase + w * u0
    if w == 0.0:
        return term.amplitude * math.sin(psi) * T
    return term.amplitude * (math.cos(psi) - np.cos(w * T + psi)) / w


def _quad(f, a, b, rtol):
    if b <= a:
        return 0.0
    # sinusoid integrals can cancel to ~0 where epsrel alone is unattainable;
    # floor the absolute tolerance at rounding level for the integrand's size
    scale = max(abs(f(x)) for x in np.linspace(a, b, 9)) * (b - a)
    val, _ = integrate.quad(f, a, b, epsabs=1e3 * np.finfo(float).eps * scale, epsrel=rtol, limit=500)
    return val


def convolution(lc: LambdaCoefficients, t_o: float, t, method: str = "auto", rtol: float = QUAD_RTOL):
    """Return ``(I, P)``: int lambda4(tau) exp(s(t - tau)) and int lambda4(tau) over [t_o, t]."""
    t = np.asarray(t, dtype=float)
    T = t - t_o
    lam4 = lc.lambda4
    s = lc.rate
    if lam4.is_zero:
        return np.zeros_like(T), np.zeros_like(T)
    use_exact = method == "exact" or (method == "auto" and lam4.has_exact_form)
    if use_exact:
        if not lam4.has_exact_form:
            raise ValueError("exact convolution needs TimeVaryingTerm betas and no power amplification")
        I = np.zeros_like(T)
        P = np.zeros_like(T)
        for weight, term, t_ref in lam4.terms:
            u0 = t_o - t_ref
            I = I + weight * _exp_kernel_exact(term, s, T, u0)
            P = P + weight * _plain_exact(term, T, u0)
        return I, P
    flat = np.atleast_1d(t)
    I = np.array([_quad(lambda tau, tt=tt: lam4(tau) * math.exp(s * (tt - tau)), t_o, tt, rtol) for tt in flat])
    P = np.array([_quad(lambda tau: lam4(tau), t_o, tt, rtol) for tt in flat])
    return I.reshape(t.shape), P.reshape(t.shape)


def _check_rate(lc: LambdaCoefficients) -> float:
    s = lc.rate
    if s == 0.0:
        raise DegenerateEigenvalue("lambda1 + lambda2 = 0: the closed form is singular")
    return s


def delta_omega_closed_form(lc: LambdaCoefficients, t_o: float, dw0: float, t, method: str = "auto",
                            rtol: float = QUAD_RTOL):
    """Rotor-speed deviation at ``t`` (scalar or array, ``t >= t_o``)."""
    s = _check_rate(lc)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < t_o):
        raise ValueError("closed form requires t >= t_o")
    T = t_arr - t_o
    I, _ = convolution(lc, t_o, t_arr, method, rtol)
    e = np.exp(s * T)
    out = dw0 * e + I + lc.lambda3 / s * np.expm1(s * T)
    return out if out.ndim else float(out)


def theta_closed_form(lc: LambdaCoefficients, t_o: float, th0: float, dw0: float, phi: float, t,
                      method: str = "auto", rtol: float = QUAD_RTOL):
    """Rotor angle at ``t``; its time derivative is ``phi * delta_omega``."""
    s = _check_rate(lc)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < t_o):
        raise ValueError("closed form requires t >= t_o")
    T = t_arr - t_o
    I, P = convolution(lc, t_o, t_arr, method, rtol)
    c = (dw0 * s + lc.lambda3) / s ** 2
    out = th0 + c * phi * np.expm1(s * T) - lc.lambda3 * phi * T / s + phi / s * (I - P)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class TransientSolution:
    """Closed-form trajectories from one initial condition.

    ``steady_state_delta_omega`` is ``None`` when no finite limit exists
    (unstable rate, ramp forcing, or persistent oscillation).
    """

    delta_omega: Callable
    theta: Callable
    steady_state_delta_omega: Optional[float]
    steady_state_theta_rate: float


def transient_solution(lc: LambdaCoefficients, t_o: float, dw0: float, th0: float, phi: float,
                       method: str = "auto") -> TransientSolution:
    s = _check_rate(lc)
    dw_ss = None
    rate = 0.0
    if s < 0 and lc.lambda4.is_zero:
        dw_ss = -lc.lambda3 / s
        rate = phi * dw_ss
    elif s > 0:
        rate = math.inf
    return TransientSolution(
        delta_omega=lambda t: delta_omega_closed_form(lc, t_o, dw0, t, method),
        theta=lambda t: theta_closed_form(lc, t_o, th0, dw0, phi, t, method),
        steady_state_delta_omega=dw_ss,
        steady_state_theta_rate=rate,
    )


class Case(enum.Enum):
    Nominal = "Nominal"
    ConstantBias = "ConstantBias"
    Amplification = "Amplification"


@dataclass(frozen=True)
class CaseSteadyState:
    dw_ss: float
    theta_limit: Optional[float]
    theta_rate: float
    description: str


def case_steady_state(case: Case, gen: GeneratorParams, coeff: float = 0.0, dw0: float = 0.0,
                      th0: float = 0.0) -> CaseSteadyState:
    """Limits of the three textbook cases.

    ``coeff`` is the bias ``gamma1`` for :attr:`Case.ConstantBias` and the
    amplification ``alpha1`` for :attr:`Case.Amplification`.  A constant bias
    leaves a speed offset and a linearly drifting angle; an amplification with
    ``alpha1 > -1`` only rescales the decay rate.
    """
    case = Case(case)
    phi = gen.phi
    if case is Case.Nominal:
        if coeff:
            raise ValueError("the nominal case takes no attack coefficient")
        lc = lambda_coefficients(gen)
        return CaseSteadyState(0.0, th0 - phi * dw0 / lc.lambda1, 0.0, "speed returns to synchronism, finite angle")
    if case is Case.ConstantBias:
        lc = lambda_coefficients(gen, (0.0, None, coeff, 0.0, None, 0.0))
        dw_ss = -lc.lambda3 / lc.rate
        if dw_ss == 0.0:
            return CaseSteadyState(0.0, th0 - phi * dw0 / lc.lambda1, 0.0, "zero bias: finite angle")
        return CaseSteadyState(dw_ss, None, phi * dw_ss, "angle drifts linearly")
    lc = lambda_coefficients(gen, (coeff, None, 0.0, 0.0, None, 0.0))
    if lc.rate >= 0:
        raise UnstableAmplification(
            f"alpha1={coeff} gives lambda1 + lambda2 = {lc.rate:.6g} >= 0: rotor speed diverges")
    return CaseSteadyState(0.0, th0 - phi * dw0 / lc.rate, 0.0, "speed returns to synchronism, shifted angle")


def piecewise_rotor_response(gen: GeneratorParams, attacks: Sequence[AttackSpec], times, dw0: float = 0.0,
                             th0: float = 0.0, t0: Optional[float] = None, Pe_traj: Optional[Callable] = None):
    """Closed-form ``(delta_omega, theta)`` on ``times`` with attack windows honoured.

    The horizon is split at every window edge of the machine's speed/power
    attacks; each piece is solved in closed form from the state at its start.
    """
    times = np.asarray(times, dtype=float)
    t0 = float(times[0]) if t0 is None else float(t0)
    edges = {t0, float(times[-1])}
    for a in attacks:
        if a.machine == gen.index and a.target in (Target.RotorSpeedDeviation, Target.ElectricalPower):
            edges.update(e for e in (a.t_start, a.t_end) if t0 < e < times[-1])
    edges = sorted(edges)
    dw = np.empty_like(times)
    th = np.empty_like(times)
    w0, a0 = dw0, th0
    for lo, hi in zip(edges[:-1], edges[1:]):
        coeffs, refs = attack_coefficients(attacks, gen.index, lo)
        lc = lambda_coefficients(gen, coeffs, Pe_traj, t_ref=refs)
        last = hi == edges[-1]
        mask = (times >= lo) & ((times <= hi) if last else (times < hi))
        if mask.any():
            dw[mask] = delta_omega_closed_form(lc, lo, w0, times[mask])
            th[mask] = theta_closed_form(lc, lo, a0, w0, gen.phi, times[mask])
        w0, a0 = delta_omega_closed_form(lc, lo, w0, hi), theta_closed_form(lc, lo, a0, w0, gen.phi, hi)
    return dw, th


# -- DC link ------------------------------------------------------------------

def _beta_at(beta, t):
    if beta is None:
        return 0.0
    if isinstance(beta, (int, float)):
        return float(beta)
    return float(beta(t))


def dc_attack_increment(v_bd, v_bq, i_od, i_oq, V_DC: float, conv: ConverterParams, coeffs, t: float = 0.0):
    """Extra DC-link voltage rate caused by bus-voltage attacks.

    ``coeffs`` lists ``(a3, b3, g3, a4, b4, g4)`` per machine; betas are
    :class:`TimeVaryingTerm`, callables or plain values evaluated at ``t``.
    The result is in the DC-voltage unit per second and includes the
    converter rating ``S_c`` exactly as the simulator does (1 in per unit).
    """
    if not V_DC > 0:
        raise NonpositiveVdc(f"V_DC must be positive (got {V_DC})")
    total = 0.0
    for k, (a3, b3, g3, a4, b4, g4) in enumerate(coeffs):
        total += (a3 * v_bd[k] + _beta_at(b3, t) + g3) * i_od[k]
        total += (a4 * v_bq[k] + _beta_at(b4, t) + g4) * i_oq[k]
    return 1.5 * conv.S_c * total / (conv.C_DC * V_DC)


def voltage_attack_coefficients(attacks: Sequence[AttackSpec], n: int, t: float):
    """Per-machine ``(a3, b3, g3, a4, b4, g4)`` with betas already shifted to onset."""
    out = [[0.0, 0.0, 0.0, 0.0, 0.0, 0.0] for _ in range(n)]
    for a in attacks:
        if not a.active(t):
            continue
        row = out[a.machine - 1]
        if a.target is Target.BusVoltageD:
            row[0:3] = a.alpha, a.beta(t - a.t_start), a.gamma
        elif a.target is Target.BusVoltageQ:
            row[3:6] = a.alpha, a.beta(t - a.t_start), a.gamma
    return [tuple(r) for r in out]


def omega_from_vdc(dV, conv: ConverterParams, gen: GeneratorParams):
    """Rotor-speed deviation balancing a DC-link deviation ``dV``.

    From the AC/DC power balance (4 H S_c / (ws C_DC)) * dw = V_DC^2 - V_DC*^2,
    written as ``k * dV * (dV + 2 V_DC*)`` so that ``dV = 0`` maps to 0 exactly.
    """
    vref = conv.V_DC_ref
    dV_arr = np.asarray(dV, dtype=float)
    if np.any(dV_arr <= -vref):
        raise InvalidVoltage(f"dV must exceed -V_DC_ref = {-vref}")
    k = conv.C_DC * gen.omega_s / (4.0 * gen.H * conv.S_c)
    out = k * dV_arr * (dV_arr + 2.0 * vref)
    return out if out.ndim else float(out)
