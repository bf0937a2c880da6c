"""Frequency, ROCOF and DC-voltage relays evaluated on recorded trajectories."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InsufficientSamples, MissingColumn

# times within this many seconds count as equal when checking dwell
_TIME_EPS = 1e-9


@dataclass(frozen=True)
class RelayConfig:
    """Relay bands.  Percentages are of nominal frequency or of V_DC*.

    ``freq_band_pct`` drives the over/under-frequency trip relays,
    ``freq_tight_band_pct`` an alarm band that never trips.
    """

    freq_band_pct: float = 5.0
    freq_tight_band_pct: float = 0.5
    rocof_limit: float = 0.02
    vdc_band_pct: float = 10.0
    dwell: float = 0.1
    rocof_window: float = 0.1

    def __post_init__(self):
        for name in ("freq_band_pct", "freq_tight_band_pct", "rocof_limit", "vdc_band_pct", "rocof_window"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.dwell >= 0:
            raise ValueError("dwell must be non-negative")


class Relay(enum.Enum):
    OverFreq = "OverFreq"
    UnderFreq = "UnderFreq"
    Rocof = "Rocof"
    OverVdc = "OverVdc"
    UnderVdc = "UnderVdc"


class Alarm(enum.Enum):
    OverFreqAlarm = "OverFreqAlarm"
    UnderFreqAlarm = "UnderFreqAlarm"


@dataclass(frozen=True)
class TripEvent:
    relay: Relay
    target: str
    t_trip: float
    value: float
    threshold: float


@dataclass(frozen=True)
class AlarmEvent:
    alarm: Alarm
    target: str
    t_alarm: float
    value: float
    threshold: float


def rocof_estimate(times, freq) -> float:
    """Least-squares slope (Hz/s) of frequency samples against time."""
    t = np.asarray(times, dtype=float)
    f = np.asarray(freq, dtype=float)
    if t.shape != f.shape or t.ndim != 1:
        raise ValueError("times and freq must be equal-length vectors")
    if len(t) < 2 or np.ptp(t) == 0:
        raise InsufficientSamples("ROCOF needs at least two samples at distinct times")
    tc = t - t.mean()
    return float(np.dot(tc, f - f.mean()) / np.dot(tc, tc))


def rolling_rocof(times, freq, window: float) -> np.ndarray:
    """ROCOF at every sample from the samples in ``[t_k - window, t_k]``.

    Samples whose window holds fewer than two points reuse the first two
    samples, so every output is finite.
    """
    t = np.asarray(times, dtype=float)
    f = np.asarray(freq, dtype=float)
    n = len(t)
    if n < 2:
        raise InsufficientSamples("ROCOF needs at least two samples")
    f = f - f.mean()
    out = np.empty(n)
    h = np.diff(t)
    if np.allclose(h, h[0], rtol=1e-6, atol=0.0):
        m = int(np.floor(window / h[0] + 1e-9)) + 1
        m = max(2, min(m, n))
        x = np.arange(m) * h[0]
        x -= x.mean()
        c = x / np.dot(x, x)
        out[m - 1:] = sliding_window_view(f, m) @ c
        for k in range(m - 1):
            hi = max(k + 1, 2)
            out[k] = rocof_estimate(t[:hi], f[:hi])
        return out
    starts = np.searchsorted(t, t - window - _TIME_EPS, side="left")
    for k in range(n):
        lo = starts[k]
        hi = k + 1
        if hi - lo < 2:
            lo, hi = 0, 2
        out[k] = rocof_estimate(t[lo:hi], f[lo:hi])
    return out


def _first_persistent(times, violation, dwell) -> Optional[int]:
    """Index at which a violation run first reaches ``dwell`` seconds."""
    idx = np.flatnonzero(violation)
    if idx.size == 0:
        return None
    run_start = prev = idx[0]
    for k in idx:
        if k > prev + 1:
            run_start = k
        prev = k
        if times[k] - times[run_start] >= dwell - _TIME_EPS:
            return int(k)
    return None


def _machines(series) -> List[int]:
    ids = sorted(int(name.split("_")[1]) for name in series.names if name.startswith("freq_"))
    if not ids:
        raise MissingColumn("series has no freq_<i> columns")
    return ids


def _nominal_frequency(series, machine: int) -> float:
    f_nom = series.meta.get("f_nominal", 60.0)
    if isinstance(f_nom, (list, tuple)):
        return float(f_nom[machine - 1])
    return float(f_nom)


def _require(series, name):
    if name not in series:
        raise MissingColumn(f"series has no {name!r} column")
    return series[name]


def evaluate_relays(series, cfg: RelayConfig = RelayConfig()) -> List[TripEvent]:
    """First trip of every (relay, target) pair whose band violation lasts ``cfg.dwell``.

    Targets are machine ids (``"1"``, ``"2"``, ...) for frequency and ROCOF
    relays and ``"dc"`` for the DC-link voltage relays.
    """
    t = series.times
    events = []

    def check(relay, target, values, violation, threshold):
        k = _first_persistent(t, violation, cfg.dwell)
        if k is not None:
            events.append(TripEvent(relay, target, float(t[k]), float(values[k]), threshold))

    for i in _machines(series):
        f = series[f"freq_{i}"]
        f_nom = _nominal_frequency(series, i)
        hi = f_nom + f_nom * cfg.freq_band_pct / 100.0
        lo = f_nom - f_nom * cfg.freq_band_pct / 100.0
        check(Relay.OverFreq, str(i), f, f > hi, hi)
        check(Relay.UnderFreq, str(i), f, f < lo, lo)
        r = rolling_rocof(t, f, cfg.rocof_window)
        k = _first_persistent(t, np.abs(r) > cfg.rocof_limit, cfg.dwell)
        if k is not None:
            events.append(TripEvent(Relay.Rocof, str(i), float(t[k]), float(r[k]),
                                    float(np.copysign(cfg.rocof_limit, r[k]))))

    v = _require(series, "V_DC")
    vref = float(series.meta.get("V_DC_ref", 1.0))
    hi = vref + vref * cfg.vdc_band_pct / 100.0
    lo = vref - vref * cfg.vdc_band_pct / 100.0
    check(Relay.OverVdc, "dc", v, v > hi, hi)
    check(Relay.UnderVdc, "dc", v, v < lo, lo)
    events.sort(key=lambda e: (e.t_trip, e.relay.value, e.target))
    return events


def evaluate_alarms(series, cfg: RelayConfig = RelayConfig()) -> List[AlarmEvent]:
    """Excursions outside the tight frequency band (alarms only, never trips)."""
    t = series.times
    out = []
    for i in _machines(series):
        f = series[f"freq_{i}"]
        f_nom = _nominal_frequency(series, i)
        band = f_nom * cfg.freq_tight_band_pct / 100.0
        for alarm, violation, thr in ((Alarm.OverFreqAlarm, f > f_nom + band, f_nom + band),
                                      (Alarm.UnderFreqAlarm, f < f_nom - band, f_nom - band)):
            k = _first_persistent(t, violation, cfg.dwell)
            if k is not None:
                out.append(AlarmEvent(alarm, str(i), float(t[k]), float(f[k]), thr))
    out.sort(key=lambda e: (e.t_alarm, e.alarm.value, e.target))
    return out


@dataclass(frozen=True)
class PhasePortrait:
    times: np.ndarray
    rocof: np.ndarray
    dvdc_pct: np.ndarray
    inside: np.ndarray

    @property
    def fraction_inside(self) -> float:
        return float(np.mean(self.inside)) if len(self.inside) else 1.0


def classify_portrait(rocof, dvdc_pct, cfg: RelayConfig = RelayConfig()) -> np.ndarray:
    """Pointwise test of (ROCOF, dV_DC %) samples against the relay rectangle."""
    rocof = np.asarray(rocof, dtype=float)
    dvdc_pct = np.asarray(dvdc_pct, dtype=float)
    return (np.abs(rocof) <= cfg.rocof_limit) & (np.abs(dvdc_pct) <= cfg.vdc_band_pct)


def phase_portrait(series, cfg: RelayConfig = RelayConfig(), machine: int = 1) -> PhasePortrait:
    """ROCOF of ``machine`` against the DC-link deviation, with band membership."""
    f = _require(series, f"freq_{machine}")
    v = _require(series, "V_DC")
    vref = float(series.meta.get("V_DC_ref", 1.0))
    rocof = rolling_rocof(series.times, f, cfg.rocof_window)
    dv = 100.0 * (v - vref) / vref
    return PhasePortrait(np.asarray(series.times), rocof, dv, classify_portrait(rocof, dv, cfg))
