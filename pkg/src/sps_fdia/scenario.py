"""Declarative scenario files.

A scenario is a YAML document.  Top-level keys::

    name: governor_attack          # required
    description: free text         # optional
    units: {vdc: pu}               # required; pu or V
    model:                         # optional, defaults to the two-machine model
      generators: [{H: 3, D: 2}, {H: 3, D: 2}]
      network: {G: [[..]], B: [[..]], V_mag: [..]}
      converter: {C_DC: 0.05, ...}
      pe_mode: network             # or frozen (pe_frozen: [...] optional)
      pm_mode: governor            # or fixed
      shared_sensor: true
    load_current: 1.0              # DC load i_l
    initial: {mode: equilibrium}   # or {mode: explicit, state: {theta: [...], ..., V_DC: 1}}
    attacks:
      - {channel: delta_omega, machine: 1, alpha: 0, gamma: 0.02,
         beta: {kind: ramp, slope: 0.001}, t_start: 1, t_end: .inf}
    faults:
      - {t_start: 1, t_end: 1.3, i_l_scale: 10, G: [[1, 1, 5]], B: []}
    integrator: {method: RK4, dt: 1.0e-4, t_end: 10, record_every: 10}
    relays: {freq_band_pct: 5, rocof_limit: 0.02, ..., open_breaker: false}
    outputs: [timeseries, phase_portrait, omega_theta_portrait, trip_log, analytic_overlay]
    portrait_machine: 1

Attack channels are ``delta_omega``, ``P_e``, ``v_bd`` and ``v_bq``.  Every
problem found is reported at once, each with its key path and source line.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields
from types import SimpleNamespace

import yaml

from .attacks import AttackSpec, Target, TimeVaryingTerm, check_overlaps
from .dynamics import METHODS, FaultSpec, IntegratorConfig
from .errors import OverlappingAttacks, ParseError, ValidationError
from .model import (MACHINE_FIELDS, PE_MODES, PM_MODES, VDC_UNITS, ConverterParams, GeneratorParams,
                    NetworkModel, PowerSystemModel, SystemState, default_model, validate_model)
from .protection import RelayConfig

OUTPUTS = ("timeseries", "phase_portrait", "omega_theta_portrait", "trip_log", "analytic_overlay")
CHANNELS = {
    "delta_omega": Target.RotorSpeedDeviation,
    "P_e": Target.ElectricalPower,
    "v_bd": Target.BusVoltageD,
    "v_bq": Target.BusVoltageQ,
}
_CHANNEL_NAMES = {v: k for k, v in CHANNELS.items()}
_SHARED_FIELDS = ("phi_V", "V_DC")


@dataclass(frozen=True)
class InitialCondition:
    """``mode='equilibrium'`` or ``'explicit'`` with ``values`` as (field, value) pairs."""

    mode: str = "equilibrium"
    values: tuple = ()

    def state(self, n: int, i_l: float) -> SystemState:
        st = SystemState.zeros(n)
        st.i_l = float(i_l)
        for name, value in self.values:
            if name in _SHARED_FIELDS:
                setattr(st, name, float(value))
            elif name == "t":
                st.t = float(value)
            else:
                getattr(st, name)[:] = value
        return st


@dataclass(frozen=True)
class Scenario:
    name: str
    model: PowerSystemModel
    load_current: float = 0.0
    initial: InitialCondition = field(default_factory=InitialCondition)
    attacks: tuple = ()
    faults: tuple = ()
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    relays: RelayConfig = field(default_factory=RelayConfig)
    open_breaker: bool = False
    outputs: tuple = OUTPUTS
    portrait_machine: int = 1
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "attacks", tuple(self.attacks))
        object.__setattr__(self, "faults", tuple(self.faults))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        problems = scenario_problems(self)
        if problems:
            raise ValidationError([(p, None, m) for p, m in problems])


def scenario_problems(sc: Scenario):
    """Cross-field invariant violations as ``(path, message)`` pairs."""
    out = []
    if not sc.outputs:
        out.append(("outputs", "at least one output must be requested"))
    for k, name in enumerate(sc.outputs):
        if name not in OUTPUTS:
            out.append((f"outputs[{k}]", f"unknown output {name!r}; expected one of {OUTPUTS}"))
    if len(set(sc.outputs)) != len(sc.outputs):
        out.append(("outputs", "outputs must not repeat"))
    n = sc.model.N
    horizon = sc.integrator.t_end
    for k, a in enumerate(sc.attacks):
        if not 1 <= a.machine <= n:
            out.append((f"attacks[{k}].machine", f"machine {a.machine} not in 1..{n}"))
        if not 0 <= a.t_start <= horizon:
            out.append((f"attacks[{k}].t_start", f"t_start={a.t_start} outside [0, {horizon}]"))
        if math.isfinite(a.t_end) and a.t_end > horizon:
            out.append((f"attacks[{k}].t_end", f"t_end={a.t_end} beyond the simulated horizon {horizon}"))
    try:
        check_overlaps(list(sc.attacks))
    except OverlappingAttacks as exc:
        out.append(("attacks", str(exc)))
    for k, f in enumerate(sc.faults):
        if not 0 <= f.t_start <= horizon:
            out.append((f"faults[{k}].t_start", f"t_start={f.t_start} outside [0, {horizon}]"))
        if f.t_end > horizon:
            out.append((f"faults[{k}].t_end", f"t_end={f.t_end} beyond the simulated horizon {horizon}"))
        for key, entries in (("G", f.G_entries), ("B", f.B_entries)):
            for j, (i, kk, _) in enumerate(entries):
                if not (1 <= i <= n and 1 <= kk <= n):
                    out.append((f"faults[{k}].{key}[{j}]", f"entry ({i}, {kk}) outside a {n}x{n} network"))
    if not 1 <= sc.portrait_machine <= n:
        out.append(("portrait_machine", f"machine {sc.portrait_machine} not in 1..{n}"))
    if sc.initial.mode not in ("equilibrium", "explicit"):
        out.append(("initial.mode", "mode must be equilibrium or explicit"))
    for name, value in sc.initial.values:
        if name in MACHINE_FIELDS and len(value) != n:
            out.append((f"initial.state.{name}", f"needs {n} values, got {len(value)}"))
    if sc.initial.mode == "explicit":
        given = {name for name, _ in sc.initial.values}
        for name in ("V_DC",):
            if name not in given:
                out.append((f"initial.state.{name}", "required for an explicit initial state"))
    if not sc.load_current >= 0:
        out.append(("load_current", "load current must be non-negative"))
    return out


# -- parsing -------------------------------------------------------------------

def _line_index(node, path=(), out=None):
    """Map key paths to 1-based source lines from a composed YAML node."""
    out = {} if out is None else out
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            p = path + (str(key.value),)
            out[p] = key.start_mark.line + 1
            _line_index(value, p, out)
    elif isinstance(node, yaml.SequenceNode):
        for k, item in enumerate(node.value):
            p = path + (k,)
            out[p] = item.start_mark.line + 1
            _line_index(item, p, out)
    return out


def _fmt(path) -> str:
    s = ""
    for part in path:
        s += f"[{part}]" if isinstance(part, int) else (f".{part}" if s else part)
    return s or "<root>"


def _split(path: str):
    parts = []
    for chunk in path.split("."):
        while "[" in chunk:
            head, rest = chunk.split("[", 1)
            if head:
                parts.append(head)
            idx, chunk = rest.split("]", 1)
            parts.append(int(idx))
        if chunk:
            parts.append(chunk)
    return tuple(parts)


class _Ctx:
    def __init__(self, lines):
        self.lines = lines
        self.errors = []

    def line(self, path):
        path = tuple(path)
        while path not in self.lines and path:
            path = path[:-1]
        return self.lines.get(path)

    def err(self, path, msg):
        self.errors.append((_fmt(path), self.line(path), msg))

    def mapping(self, value, path, allowed, required=()):
        if value is None:
            value = {}
        if not isinstance(value, dict):
            self.err(path, f"expected a mapping, got {type(value).__name__}")
            return None
        for key in value:
            if key not in allowed:
                self.err(tuple(path) + (str(key),), f"unknown key {key!r}; allowed: {', '.join(allowed)}")
        for key in required:
            if key not in value:
                self.err(tuple(path) + (key,), f"missing required key {key!r}")
        return value

    def number(self, value, path, default=None, integer=False):
        if value is None:
            return default
        if isinstance(value, bool):
            self.err(path, "expected a number, got a boolean")
            return default
        try:
            x = float(value)
        except (TypeError, ValueError):
            self.err(path, f"expected a number, got {value!r}")
            return default
        if math.isnan(x):
            self.err(path, "NaN is not allowed")
            return default
        if integer:
            if x != int(x):
                self.err(path, f"expected an integer, got {value!r}")
                return default
            return int(x)
        return x

    def choice(self, value, path, options, default):
        if value is None:
            return default
        if value not in options:
            self.err(path, f"{value!r} is not one of {', '.join(map(str, options))}")
            return default
        return value

    def boolean(self, value, path, default):
        if value is None:
            return default
        if not isinstance(value, bool):
            self.err(path, f"expected true or false, got {value!r}")
            return default
        return value

    def vector(self, value, path, length=None):
        if not isinstance(value, list):
            self.err(path, "expected a list of numbers")
            return None
        out = [self.number(v, tuple(path) + (k,), default=math.nan) for k, v in enumerate(value)]
        if length is not None and len(out) != length:
            self.err(path, f"expected {length} values, got {len(out)}")
            return None
        return tuple(out)

    def build(self, path, factory, **kwargs):
        try:
            return factory(**kwargs)
        except (ValueError, TypeError) as exc:
            self.err(path, str(exc))
            return None


def _dataclass_fields(ctx, raw, path, cls):
    names = [f.name for f in fields(cls)]
    m = ctx.mapping(raw, path, names)
    if m is None:
        return {}
    return {k: ctx.number(v, tuple(path) + (k,), integer=(k == "index")) for k, v in m.items() if k in names}


def _parse_model(ctx, raw, vdc_unit):
    path = ("model",)
    m = ctx.mapping(raw, path, ("generators", "network", "converter", "pe_mode", "pm_mode",
                                "shared_sensor", "pe_frozen"))
    if m is None:
        return None
    base = default_model(2)
    gens_raw = m.get("generators")
    if gens_raw is None:
        gens = list(base.generators)
    elif not isinstance(gens_raw, list) or not gens_raw:
        ctx.err(path + ("generators",), "expected a non-empty list of generator mappings")
        return None
    else:
        gens = []
        for k, g in enumerate(gens_raw):
            kw = _dataclass_fields(ctx, g, path + ("generators", k), GeneratorParams)
            kw.setdefault("index", k + 1)
            gens.append(ctx.build(path + ("generators", k), GeneratorParams, **kw))
        if any(g is None for g in gens):
            return None
    n = len(gens)
    net_raw = m.get("network")
    if net_raw is None:
        if n not in (1, 2):
            ctx.err(path, f"a network section is required for {n} machines")
            return None
        net = default_model(n).network
    else:
        nm = ctx.mapping(net_raw, path + ("network",), ("G", "B", "V_mag"), required=("G", "B"))
        if nm is None or "G" not in nm or "B" not in nm:
            return None
        mats = {}
        for key in ("G", "B"):
            rows = nm[key]
            if not isinstance(rows, list):
                ctx.err(path + ("network", key), "expected a list of rows")
                return None
            mats[key] = [ctx.vector(r, path + ("network", key, k)) for k, r in enumerate(rows)]
            if any(r is None for r in mats[key]):
                return None
        v = ctx.vector(nm["V_mag"], path + ("network", "V_mag")) if "V_mag" in nm else (1.0,) * n
        if v is None:
            return None
        net = ctx.build(path + ("network",), NetworkModel, G=mats["G"], B=mats["B"], V_mag=v)
        if net is None:
            return None
    conv_kw = _dataclass_fields(ctx, m.get("converter"), path + ("converter",), ConverterParams)
    conv = ctx.build(path + ("converter",), ConverterParams, **conv_kw)
    if conv is None:
        return None
    for msg in validate_model(gens, net, conv):
        ctx.err(path, msg)
    pe_frozen = None
    if m.get("pe_frozen") is not None:
        pe_frozen = ctx.vector(m["pe_frozen"], path + ("pe_frozen",), length=n)
    return ctx.build(
        path, PowerSystemModel, generators=tuple(gens), network=net, converter=conv,
        pe_mode=ctx.choice(m.get("pe_mode"), path + ("pe_mode",), PE_MODES, "network"),
        pm_mode=ctx.choice(m.get("pm_mode"), path + ("pm_mode",), PM_MODES, "governor"),
        shared_sensor=ctx.boolean(m.get("shared_sensor"), path + ("shared_sensor",), True),
        pe_frozen=pe_frozen, vdc_unit=vdc_unit)


def _parse_beta(ctx, raw, path):
    if raw is None:
        return TimeVaryingTerm()
    m = ctx.mapping(raw, path, ("kind", "slope", "amplitude", "frequency", "phase"), required=("kind",))
    if m is None:
        return None
    kind = ctx.choice(m.get("kind"), path + ("kind",), ("zero", "ramp", "sinusoid"), None)
    if kind is None:
        return None
    allowed = {"zero": (), "ramp": ("slope",), "sinusoid": ("amplitude", "frequency", "phase")}[kind]
    kw = {}
    for key in ("slope", "amplitude", "frequency", "phase"):
        if key in m:
            if key not in allowed:
                ctx.err(path + (key,), f"{key!r} does not apply to beta kind {kind!r}")
            else:
                kw[key] = ctx.number(m[key], path + (key,), default=0.0)
    return ctx.build(path, TimeVaryingTerm, kind=kind, **kw)


def _parse_attack(ctx, raw, path):
    m = ctx.mapping(raw, path, ("channel", "machine", "alpha", "gamma", "beta", "t_start", "t_end"),
                    required=("channel",))
    if m is None or "channel" not in m:
        return None
    channel = ctx.choice(m["channel"], path + ("channel",), tuple(CHANNELS), None)
    beta = _parse_beta(ctx, m.get("beta"), path + ("beta",))
    n_err = len(ctx.errors)
    kw = dict(machine=ctx.number(m.get("machine"), path + ("machine",), 1, integer=True),
              alpha=ctx.number(m.get("alpha"), path + ("alpha",), 0.0),
              gamma=ctx.number(m.get("gamma"), path + ("gamma",), 0.0),
              t_start=ctx.number(m.get("t_start"), path + ("t_start",), 0.0),
              t_end=ctx.number(m.get("t_end"), path + ("t_end",), math.inf))
    if not kw["t_start"] < kw["t_end"]:
        ctx.err(path + ("t_end",), f"attack window needs t_start < t_end (got {kw['t_start']}, {kw['t_end']})")
    if channel is None or beta is None or len(ctx.errors) > n_err:
        return None
    return ctx.build(path, AttackSpec, target=CHANNELS[channel], beta=beta, **kw)


def _parse_fault(ctx, raw, path):
    m = ctx.mapping(raw, path, ("t_start", "t_end", "i_l_scale", "G", "B"), required=("t_start", "t_end"))
    if m is None or "t_start" not in m or "t_end" not in m:
        return None
    t_start = ctx.number(m["t_start"], path + ("t_start",), 0.0)
    t_end = ctx.number(m["t_end"], path + ("t_end",), 0.0)
    if not t_start < t_end:
        ctx.err(path + ("t_end",), f"fault window needs t_start < t_end (got {t_start}, {t_end})")
        return None
    entries = {}
    for key in ("G", "B"):
        rows = m.get(key) or []
        if not isinstance(rows, list):
            ctx.err(path + (key,), "expected a list of [i, k, scale] entries")
            return None
        out = []
        for j, r in enumerate(rows):
            if not isinstance(r, list) or len(r) != 3:
                ctx.err(path + (key, j), "expected [i, k, scale]")
                continue
            i = ctx.number(r[0], path + (key, j, 0), integer=True)
            k = ctx.number(r[1], path + (key, j, 1), integer=True)
            s = ctx.number(r[2], path + (key, j, 2))
            if None not in (i, k, s):
                out.append((i, k, s))
        entries[key] = tuple(out)
    return ctx.build(path, FaultSpec, t_start=t_start, t_end=t_end,
                     i_l_scale=ctx.number(m.get("i_l_scale"), path + ("i_l_scale",), 1.0),
                     G_entries=entries["G"], B_entries=entries["B"])


def _parse_initial(ctx, raw):
    path = ("initial",)
    if raw is None:
        return InitialCondition()
    m = ctx.mapping(raw, path, ("mode", "state"))
    if m is None:
        return None
    mode = ctx.choice(m.get("mode"), path + ("mode",), ("equilibrium", "explicit"), "equilibrium")
    if mode == "equilibrium":
        if "state" in m:
            ctx.err(path + ("state",), "state is only used with mode: explicit")
        return InitialCondition()
    allowed = ("t",) + MACHINE_FIELDS + _SHARED_FIELDS
    st = ctx.mapping(m.get("state"), path + ("state",), allowed)
    if st is None:
        return None
    values = []
    for name in allowed:
        if name not in st:
            continue
        p = path + ("state", name)
        v = ctx.vector(st[name], p) if name in MACHINE_FIELDS else ctx.number(st[name], p)
        if v is not None:
            values.append((name, v))
    return InitialCondition("explicit", tuple(values))


def _from_document(doc, lines) -> Scenario:
    ctx = _Ctx(lines)
    top = ctx.mapping(doc, (), ("name", "description", "units", "model", "load_current", "initial", "attacks",
                                "faults", "integrator", "relays", "outputs", "portrait_machine"),
                      required=("name", "units"))
    if top is None:
        raise ValidationError(ctx.errors)
    name = top.get("name")
    if "name" in top and (not isinstance(name, str) or not name.strip()):
        ctx.err(("name",), "name must be a non-empty string")
    description = top.get("description") or ""
    if not isinstance(description, str):
        ctx.err(("description",), "description must be a string")
        description = ""

    vdc_unit = None
    if "units" in top:
        um = ctx.mapping(top["units"], ("units",), ("vdc",), required=("vdc",))
        if um is not None and "vdc" in um:
            vdc_unit = ctx.choice(um["vdc"], ("units", "vdc"), VDC_UNITS, None)
    model = _parse_model(ctx, top.get("model"), vdc_unit or "pu")
    load = ctx.number(top.get("load_current"), ("load_current",), 0.0)
    initial = _parse_initial(ctx, top.get("initial"))

    def items(key, parser):
        raw = top.get(key)
        if raw is None:
            return ()
        if not isinstance(raw, list):
            ctx.err((key,), "expected a list")
            return ()
        return tuple(parser(ctx, r, (key, k)) for k, r in enumerate(raw))

    attacks = items("attacks", _parse_attack)
    faults = items("faults", _parse_fault)

    integ_raw = ctx.mapping(top.get("integrator"), ("integrator",), ("method", "dt", "t_end", "record_every"))
    integ_kw = {}
    for key, value in (integ_raw or {}).items():
        p = ("integrator", key)
        if key == "method":
            integ_kw[key] = ctx.choice(value, p, METHODS, "RK4")
        elif key in ("dt", "t_end", "record_every"):
            integ_kw[key] = ctx.number(value, p, integer=(key == "record_every"))
    integ = ctx.build(("integrator",), IntegratorConfig, **{k: v for k, v in integ_kw.items() if v is not None})

    relay_names = tuple(f.name for f in fields(RelayConfig))
    relay_raw = ctx.mapping(top.get("relays"), ("relays",), relay_names + ("open_breaker",))
    relay_kw, open_breaker = {}, False
    for key, value in (relay_raw or {}).items():
        if key == "open_breaker":
            open_breaker = ctx.boolean(value, ("relays", key), False)
        elif key in relay_names:
            relay_kw[key] = ctx.number(value, ("relays", key))
    relays = ctx.build(("relays",), RelayConfig, **{k: v for k, v in relay_kw.items() if v is not None})

    outputs = top.get("outputs", list(OUTPUTS))
    if not isinstance(outputs, list):
        ctx.err(("outputs",), "expected a list of output names")
        outputs = list(OUTPUTS)
    machine = ctx.number(top.get("portrait_machine"), ("portrait_machine",), 1, integer=True)

    if ctx.errors or None in (model, initial, integ, relays, vdc_unit) or None in attacks or None in faults:
        # cross-field checks on whatever did parse; unparsed pieces get
        # stand-ins that switch off only the checks depending on them
        partial = SimpleNamespace(
            outputs=tuple(outputs), model=model or SimpleNamespace(N=sys.maxsize),
            integrator=integ or SimpleNamespace(t_end=math.inf), portrait_machine=machine,
            attacks=[a for a in attacks if a is not None], faults=[f for f in faults if f is not None],
            initial=initial or InitialCondition(), load_current=load)
        seen = {e[0] for e in ctx.errors}
        for p, m in scenario_problems(partial):
            if p not in seen:
                ctx.err(_split(p), m)
        if not ctx.errors:
            ctx.err((), "invalid scenario")
        raise ValidationError(ctx.errors)
    try:
        return Scenario(name=name, model=model, load_current=load, initial=initial, attacks=attacks,
                        faults=faults, integrator=integ, relays=relays, open_breaker=open_breaker,
                        outputs=tuple(outputs), portrait_machine=machine, description=description)
    except ValidationError as exc:
        raise ValidationError([(p, ctx.line(_split(p)), m) for p, _, m in exc.errors]) from None


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises :class:`ParseError` for malformed YAML and :class:`ValidationError`
    listing every problem (key path and line) otherwise.
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ParseError(f"{where}{getattr(exc, 'problem', None) or exc}") from None
    if node is None:
        raise ParseError("empty scenario document")
    return _from_document(doc, _line_index(node))


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# -- serialisation -----------------------------------------------------------

def _plain(obj, skip=()):
    return {f.name: getattr(obj, f.name) for f in fields(obj) if f.name not in skip}


def _beta_dict(beta: TimeVaryingTerm):
    if beta.kind == "ramp":
        return {"kind": "ramp", "slope": beta.slope}
    if beta.kind == "sinusoid":
        return {"kind": "sinusoid", "amplitude": beta.amplitude, "frequency": beta.frequency, "phase": beta.phase}
    return {"kind": "zero"}


def to_document(sc: Scenario) -> dict:
    """Scenario as plain nested data (the inverse of parsing)."""
    m = sc.model
    model = {
        "generators": [_plain(g) for g in m.generators],
        "network": {"G": [list(r) for r in m.network.G], "B": [list(r) for r in m.network.B],
                    "V_mag": list(m.network.V_mag)},
        "converter": _plain(m.converter),
        "pe_mode": m.pe_mode,
        "pm_mode": m.pm_mode,
        "shared_sensor": m.shared_sensor,
    }
    if m.pe_frozen is not None:
        model["pe_frozen"] = list(m.pe_frozen)
    initial = {"mode": sc.initial.mode}
    if sc.initial.mode == "explicit":
        initial["state"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in sc.initial.values}
    relays = _plain(sc.relays)
    relays["open_breaker"] = sc.open_breaker
    doc = {
        "name": sc.name,
        "description": sc.description,
        "units": {"vdc": m.vdc_unit},
        "model": model,
        "load_current": sc.load_current,
        "initial": initial,
        "attacks": [{"channel": _CHANNEL_NAMES[a.target], "machine": a.machine, "alpha": a.alpha,
                     "gamma": a.gamma, "beta": _beta_dict(a.beta), "t_start": a.t_start, "t_end": a.t_end}
                    for a in sc.attacks],
        "faults": [{"t_start": f.t_start, "t_end": f.t_end, "i_l_scale": f.i_l_scale,
                    "G": [list(e) for e in f.G_entries], "B": [list(e) for e in f.B_entries]}
                   for f in sc.faults],
        "integrator": _plain(sc.integrator),
        "relays": relays,
        "outputs": list(sc.outputs),
        "portrait_machine": sc.portrait_machine,
    }
    if m.connected != (True,) * m.N:
        raise ValueError("scenarios describe the intact network; reconnect all machines before serialising")
    return doc


def serialize(sc: Scenario) -> str:
    """YAML text that :func:`parse_scenario` maps back to an equal scenario."""
    return yaml.safe_dump(to_document(sc), sort_keys=False, default_flow_style=None, width=100)


def with_parameter(sc: Scenario, param: str, value) -> Scenario:
    """Copy of ``sc`` with the value at key path ``param`` (e.g. ``attacks[0].gamma``) replaced."""
    doc = to_document(sc)
    parts = _split(param)
    if not parts:
        raise ValidationError([(param, None, "empty parameter path")])
    node = doc
    try:
        for part in parts[:-1]:
            node = node[part]
        if isinstance(parts[-1], int):
            node[parts[-1]]
        node[parts[-1]] = value
    except (KeyError, IndexError, TypeError):
        raise ValidationError([(param, None, "no such parameter in the scenario")]) from None
    return parse_scenario(yaml.safe_dump(doc, sort_keys=False))
