"""Run configuration: a TOML document with one section per command.

See ``docs/config.md`` for the grammar. Every section is checked strictly:
unknown keys, missing fields and type mismatches are reported with the key
path and a diagnostic code (see :class:`ctiroi.errors.ValidationError`).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import ahp, gl, risk, tiei
from .errors import ValidationError

COMMANDS = ("tiei", "roi", "scenario", "gl", "ahp", "sweep")
OUTPUTS = ("text", "csv", "json")
GL_MODES = ("single", "two", "portfolio")

_SCALE = {"": 1, "k": 10**3, "K": 10**3, "M": 10**6, "B": 10**9, "bn": 10**9}
_MONEY = re.compile(r"^\s*\$?\s*([-+]?[0-9][0-9_,]*(?:\.[0-9]*)?|[-+]?\.[0-9]+)\s*(k|K|M|B|bn)?\s*([A-Za-z]{3})?\s*$")


@dataclass
class RunConfig:
    command: str
    payload: Any
    currency: str = "USD"
    output: str = "text"
    seed: int | None = None
    precision: int = 2
    # command-specific settings that are not part of the domain payload
    options: dict = field(default_factory=dict)


# -- small typed accessors -------------------------------------------------------


class _Table:
    """Dict wrapper that tracks consumed keys so leftovers can be rejected."""

    def __init__(self, data, path):
        if not isinstance(data, dict):
            raise ValidationError(f"[{path}] must be a table, got {type(data).__name__}", code="E102")
        self.data = data
        self.path = path
        self.used = set()

    def has(self, key):
        return key in self.data

    def get(self, key, default=None):
        self.used.add(key)
        return self.data.get(key, default)

    def req(self, key):
        self.used.add(key)
        if key not in self.data:
            raise ValidationError(f"missing required field '{key}' {self._in()}", code="E101")
        return self.data[key]

    def child(self, key):
        return f"{self.path}.{key}" if self.path else key

    def sub(self, key, required=False):
        if required:
            return _Table(self.req(key), self.child(key))
        val = self.get(key)
        return None if val is None else _Table(val, self.child(key))

    def done(self):
        extra = [k for k in self.data if k not in self.used]
        if extra:
            raise ValidationError(f"unknown key '{extra[0]}' {self._in()}", code="E103")

    def where(self, key):
        return f"'{key}' {self._in()}"

    def _in(self):
        return f"in [{self.path}]" if self.path else "at top level"


def _num(value, where, lo=None, hi=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where} must be a number, got {value!r}", code="E102")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{where} must be finite")
    if lo is not None and value < lo or hi is not None and value > hi:
        raise ValidationError(f"{where} = {value} is outside [{lo}, {hi}]")
    return value


def _int(value, where, lo=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{where} must be an integer, got {value!r}", code="E102")
    if lo is not None and value < lo:
        raise ValidationError(f"{where} must be >= {lo}, got {value}")
    return value


def _str(value, where, choices=None):
    if not isinstance(value, str):
        raise ValidationError(f"{where} must be a string, got {value!r}", code="E102")
    if choices is not None and value not in choices:
        raise ValidationError(f"{where} must be one of {', '.join(choices)}; got {value!r}")
    return value


def _list(value, where, length=None):
    if not isinstance(value, list):
        raise ValidationError(f"{where} must be an array, got {value!r}", code="E102")
    if length is not None and len(value) != length:
        raise ValidationError(f"{where} must have {length} entries, got {len(value)}")
    return value


def parse_money(value, currency="USD", where="amount"):
    """Parse ``6.08M USD``, ``500k``, ``$1,200`` or a bare number.

    The text is read as an exact decimal and converted to float once. A unit
    other than ``currency`` is rejected.
    """
    if isinstance(value, bool):
        raise ValidationError(f"{where} must be a monetary amount, got {value!r}", code="E102")
    if isinstance(value, (int, float)):
        return _num(value, where)
    if not isinstance(value, str):
        raise ValidationError(f"{where} must be a monetary amount, got {value!r}", code="E102")
    m = _MONEY.match(value)
    if not m:
        raise ValidationError(f"{where}: cannot read {value!r} as an amount like '6.08M USD'", code="E102")
    digits, suffix, unit = m.groups()
    if unit is not None and unit.upper() != currency.upper():
        raise ValidationError(f"{where}: unit {unit} does not match scenario currency {currency}")
    try:
        amount = Decimal(digits.replace(",", "").replace("_", "")) * _SCALE[suffix or ""]
    except InvalidOperation:
        raise ValidationError(f"{where}: cannot read {value!r}", code="E102") from None
    return float(amount)


def _uncertain(parent, key, currency=None):
    """A number/amount, or ``{triangular = [..]}`` / ``{pert = [..], lambda = 4}``."""
    conv = (lambda x, w: parse_money(x, currency, w)) if currency else _num
    value = parent.get(key)
    where = parent.where(key)
    if not isinstance(value, dict):
        return risk.UncertainValue.point(conv(value, where))
    t = _Table(value, parent.child(key))
    kinds = [k for k in ("point", "triangular", "pert") if t.has(k)]
    if len(kinds) != 1:
        raise ValidationError(f"{where} needs exactly one of point, triangular, pert", code="E101")
    kind = kinds[0]
    if kind == "point":
        out = risk.UncertainValue.point(conv(t.get("point"), where))
    else:
        abc = [conv(x, where) for x in _list(t.get(kind), f"{where}.{kind}", 3)]
        if kind == "triangular":
            out = risk.UncertainValue.triangular(*abc)
        else:
            lam = _num(t.get("lambda", 4.0), f"{where}.lambda")
            out = risk.UncertainValue.pert(*abc, lam=lam)
    t.done()
    return out


def _by_component(value, where, lo=None, hi=None):
    """Four values as ``[q, e, i, o]`` or ``{Q = .., E = .., I = .., O = ..}``."""
    if isinstance(value, list):
        return [_num(x, where, lo, hi) for x in _list(value, where, 4)]
    t = _Table(value, where)
    vals = [_num(t.req(c), t.where(c), lo, hi) for c in tiei.COMPONENTS]
    t.done()
    return vals


def judgment(x, where="matrix entry"):
    """A pairwise judgment: a number or an exact fraction string such as ``"1/3"``."""
    if isinstance(x, str):
        try:
            return float(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"{where}: cannot read {x!r} as a number or fraction", code="E102") from None
    return _num(x, where)


def _matrix(value, where):
    rows = _list(value, where)
    return [[judgment(x, where) for x in _list(r, where)] for r in rows]


# -- sections -------------------------------------------------------------------------


def _weights(t: _Table):
    given = [k for k in ("weights", "weights_ahp", "weights_budget") if t.has(k)]
    if len(given) != 1:
        raise ValidationError(
            f"[{t.path}] needs exactly one of weights, weights_ahp, weights_budget", code="E101"
        )
    key = given[0]
    try:
        if key == "weights":
            return tiei.TieiWeights(*_by_component(t.get(key), t.where(key)))
        if key == "weights_ahp":
            return tiei.TieiWeights(*ahp.derive_weights_ahp(_matrix(t.get(key), t.where(key))).weights)
        return tiei.TieiWeights(*ahp.weights_from_budget([_num(x, t.where(key)) for x in _list(t.get(key), t.where(key), 4)]))
    except ValidationError as exc:
        raise ValidationError(f"[{t.path}] {key}: {exc}", code=exc.code) from None


def _tiei_section(t: _Table):
    weights = _weights(t)
    if t.has("scores") == t.has("components"):
        raise ValidationError(f"[{t.path}] needs exactly one of scores, components", code="E101")
    if t.has("scores"):
        # scores may arrive unfloored; a 0 is recorded then floored
        raw = _by_component(t.get("scores"), t.where("scores"), 0, 100)
        notes = [f"{c}: zero capability recorded, floored to 1" for c, s in zip(tiei.COMPONENTS, raw) if s == 0]
        t.done()
        return {"scores": tiei.ScoreVector.floored(*raw), "weights": weights, "notes": notes}
    comps = t.sub("components", required=True)
    rubrics, raws, policies = {}, {}, {}
    for c in tiei.COMPONENTS:
        ct = comps.sub(c, required=True)
        targets = ct.sub("targets", required=True)
        target_vals = {k: _num(targets.get(k), targets.where(k)) for k in list(targets.data)}
        targets.done()
        rubrics[c] = tiei.default_rubric(c, target_vals)
        raw = ct.sub("raw", required=True)
        raws[c] = {k: _num(raw.get(k), raw.where(k)) for k in list(raw.data)}
        raw.done()
        if ct.has("confidence"):
            policies[c] = tiei.ConfidencePolicy(
                _num(ct.get("confidence"), ct.where("confidence"), 0, 1),
                _num(ct.get("prior", 50.0), ct.where("prior"), 1, 100),
            )
        ct.done()
    comps.done()
    t.done()
    return {"rubrics": rubrics, "raws": raws, "policies": policies, "weights": weights}


def _roi_section(t: _Table, currency):
    tco_val = t.req("tco")
    if isinstance(tco_val, dict):
        tt = _Table(tco_val, t.child("tco"))
        parts = {
            k: parse_money(tt.get(k, 0), currency, tt.where(k))
            for k in ("platform", "feeds", "personnel", "infra", "integration", "training")
        }
        tt.done()
        breakdown = risk.TcoBreakdown(**parts)
    else:
        breakdown = risk.TcoBreakdown(platform=parse_money(tco_val, currency, t.where("tco")))
    threats = []
    for k, item in enumerate(_list(t.get("threats", []), t.where("threats"))):
        tt = _Table(item, t.child(f"threats[{k}]"))
        threats.append(
            risk.ThreatScenario(
                _str(tt.get("name", f"threat{k + 1}"), tt.where("name")),
                _num(tt.req("p"), tt.where("p"), 0, 1),
                parse_money(tt.req("c"), currency, tt.where("c")),
                _num(tt.req("m"), tt.where("m"), 0, 1),
            )
        )
        tt.done()
    t.done()
    return {"tco": breakdown, "threats": threats}


def _scenario_from_table(t: _Table, currency):
    if t.has("builtin"):
        key = _str(t.get("builtin"), t.where("builtin"), tuple(risk.BUILTIN_SCENARIOS))
        if currency != "USD":
            raise ValidationError(f"built-in scenarios are in USD, config currency is {currency}")
        return risk.BUILTIN_SCENARIOS[key]
    if t.has("reduction") == t.has("lef_cti"):
        raise ValidationError(f"[{t.path}] needs exactly one of reduction, lef_cti", code="E101")
    t.req("lef0")
    t.req("lm")
    return risk.AleScenario(
        lef0=_uncertain(t, "lef0"),
        lm=_uncertain(t, "lm", currency),
        cti_cost=parse_money(t.req("cti_cost"), currency, t.where("cti_cost")),
        reduction=_num(t.get("reduction"), t.where("reduction"), 0, 1) if t.has("reduction") else None,
        lef_cti=_uncertain(t, "lef_cti") if t.has("lef_cti") else None,
        name=_str(t.get("name", "scenario"), t.where("name")),
        currency=currency,
    )


def _scenario_section(t: _Table, currency):
    scenario = _scenario_from_table(t, currency)
    n = t.get("monte_carlo")
    opts = {"monte_carlo": _int(n, t.where("monte_carlo"), 1) if n is not None else None}
    t.done()
    return scenario, opts


def _breach(value, where):
    t = _Table(value, where)
    fam = _str(t.req("family"), t.where("family"), ("gl_i", "gl_ii", "tabulated"))
    if fam == "gl_i":
        out = gl.BreachFunction.gl_i(_num(t.req("v"), t.where("v")), _num(t.req("alpha"), t.where("alpha")), _num(t.get("beta", 1.0), t.where("beta")))
    elif fam == "gl_ii":
        out = gl.BreachFunction.gl_ii(_num(t.req("v"), t.where("v")), _num(t.req("alpha"), t.where("alpha")))
    else:
        z = [_num(x, t.where("z")) for x in _list(t.req("z"), t.where("z"))]
        g = [_num(x, t.where("g")) for x in _list(t.req("g"), t.where("g"))]
        out = gl.BreachFunction.tabulated(z, g)
    t.done()
    return out


def _multiplier(value, where):
    t = _Table(value, where)
    fam = _str(t.req("family"), t.where("family"), ("constant_one", "rational", "tabulated"))
    if fam == "constant_one":
        out = gl.LossMultiplier.constant_one()
    elif fam == "rational":
        out = gl.LossMultiplier.rational(_num(t.req("gamma"), t.where("gamma")))
    else:
        z = [_num(x, t.where("z")) for x in _list(t.req("z"), t.where("z"))]
        h = [_num(x, t.where("h")) for x in _list(t.req("h"), t.where("h"))]
        out = gl.LossMultiplier.tabulated(z, h)
    t.done()
    return out


def _grid(value, where):
    t = _Table(value, where)
    axes = [[_num(x, t.where("axes")) for x in _list(a, t.where("axes"))] for a in _list(t.req("axes"), t.where("axes"))]
    values = t.req("values")
    t.done()
    try:
        return gl.GridFunction(tuple(axes), values)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}", code=getattr(exc, "code", "E102")) from None


def _gl_section(t: _Table, currency, mode=None):
    declared = _str(t.get("mode"), t.where("mode"), GL_MODES) if t.has("mode") else None
    if mode and declared and mode != declared:
        raise ValidationError(f"[{t.path}] declares mode '{declared}' but '{mode}' was requested")
    mode = mode or declared
    if mode is None:
        raise ValidationError(f"missing required field 'mode' in [{t.path}]", code="E101")
    payload = {"mode": mode, "loss": parse_money(t.req("loss"), currency, t.where("loss"))}
    payload["tol"] = _num(t.get("tol"), t.where("tol")) if t.has("tol") else None
    if mode in ("single", "two"):
        payload["breach"] = _breach(t.req("breach"), t.child("breach"))
        if mode == "two":
            payload["multiplier"] = _multiplier(t.req("multiplier"), t.child("multiplier"))
    else:
        if t.has("joint"):
            # the grid defines the joint curve; its axes fix the number of controls
            if t.has("controls"):
                raise ValidationError(f"[{t.path}] takes either controls or joint, not both", code="E103")
            joint = _grid(t.get("joint"), t.child("joint"))
            parsed = (None,) * joint.ndim
        else:
            joint = None
            controls = _list(t.req("controls"), t.where("controls"))
            parsed = tuple(_breach(c, t.child(f"controls[{k}]")) for k, c in enumerate(controls))
        rl = t.get("residual_loss")
        if isinstance(rl, dict):
            rl = _grid(rl, t.child("residual_loss"))
        elif rl is not None:
            rl = parse_money(rl, currency, t.where("residual_loss"))
        cap = parse_money(t.get("budget_cap"), currency, t.where("budget_cap")) if t.has("budget_cap") else None
        payload["portfolio"] = gl.PortfolioSpec(parsed, joint, rl, cap)
        payload["restarts"] = _int(t.get("restarts", 4), t.where("restarts"), 1)
    t.done()
    return payload


def _ahp_section(t: _Table):
    if t.has("matrix") == t.has("budget"):
        raise ValidationError(f"[{t.path}] needs exactly one of matrix, budget", code="E101")
    out = {}
    if t.has("matrix"):
        out["matrix"] = _matrix(t.get("matrix"), t.where("matrix"))
        out["tol"] = _num(t.get("tol", 1e-10), t.where("tol"))
        n = len(out["matrix"])
    else:
        out["budget"] = [_num(x, t.where("budget")) for x in _list(t.get("budget"), t.where("budget"))]
        n = len(out["budget"])
    labels = t.get("labels")
    if labels is None:
        labels = list(tiei.COMPONENTS) if n == 4 else [f"c{k + 1}" for k in range(n)]
    out["labels"] = [_str(x, t.where("labels")) for x in _list(labels, t.where("labels"), n)]
    t.done()
    return out


def _sweep_section(t: _Table, doc: _Table, currency):
    from .sensitivity import SweepSpec

    def base_scenario():
        if t.has("base"):
            key = _str(t.get("base"), t.where("base"), tuple(risk.BUILTIN_SCENARIOS))
            return risk.BUILTIN_SCENARIOS[key]
        if not doc.has("scenario"):
            raise ValidationError(f"[{t.path}] needs base = <builtin> or a [scenario] section", code="E101")
        return _scenario_from_table(doc.sub("scenario"), currency)

    if t.has("spans"):
        st = t.sub("spans")
        spans = {}
        for k in list(st.data):
            lo_hi = _list(st.get(k), st.where(k), 2)
            conv = (lambda x, w: parse_money(x, currency, w)) if k in ("lm", "cti_cost") else _num
            spans[k] = tuple(conv(x, st.where(k)) for x in lo_hi)
        st.done()
        scenario = base_scenario()
        t.done()
        return {"mode": "tornado", "scenario": scenario, "spans": spans}

    target = _str(t.req("target"), t.where("target"))
    kind = target.partition(":")[0]
    money = target.endswith(("lm", "cti_cost"))
    conv = (lambda x, w: parse_money(x, currency, w)) if money else _num
    if kind == "tiei":
        if doc.has("tiei"):
            tt = _tiei_section(doc.sub("tiei"))
            if "scores" not in tt:
                raise ValidationError("index sweeps need [tiei] scores, not components", code="E101")
            base = (tt["scores"], tt["weights"])
        else:
            raise ValidationError("index sweeps need a [tiei] section with scores and weights", code="E101")
        lo, hi = conv(t.get("lo", 1.0), t.where("lo")), conv(t.get("hi", 100.0), t.where("hi"))
    else:
        base = base_scenario()
        lo, hi = conv(t.req("lo"), t.where("lo")), conv(t.req("hi"), t.where("hi"))
    steps = _int(t.get("steps", 100), t.where("steps"), 2)
    t.done()
    return {"mode": "curve", "spec": SweepSpec(target, lo, hi, steps, base)}


# -- entry points --------------------------------------------------------------------


def load_document(source) -> dict:
    """Read TOML from a path or from inline text."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and "=" not in source):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc.strerror}", code="E101") from None
        origin = str(path)
    else:
        text, origin = source, "<inline>"
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{origin}: syntax error: {exc}", code="E100") from None


def config_from_dict(doc: dict, command=None, gl_mode=None) -> RunConfig:
    d = _Table(doc, "")
    declared = d.get("command")
    if declared is not None:
        declared = _str(declared, d.where("command"), COMMANDS)
    if command and declared and command != declared:
        raise ValidationError(f"config declares command '{declared}' but '{command}' was requested")
    command = command or declared
    if command is None:
        present = [c for c in COMMANDS if d.has(c)]
        if "sweep" in present:
            command = "sweep"
        elif len(present) == 1:
            command = present[0]
        else:
            raise ValidationError("cannot tell which command to run; set command = \"...\"", code="E101")

    currency = _str(d.get("currency", "USD"), d.where("currency"))
    output = _str(d.get("output", "text"), d.where("output"), OUTPUTS)
    precision = _int(d.get("precision", 2), d.where("precision"), 0)
    seed = d.get("seed")
    if seed is not None:
        seed = _int(seed, d.where("seed"), 0)

    others = [c for c in COMMANDS if d.has(c) and c != command and not (command == "sweep" and c in ("tiei", "scenario"))]
    if others:
        raise ValidationError(f"one command per run: [{others[0]}] present alongside '{command}'", code="E103")

    options = {}
    if command == "sweep":
        payload = _sweep_section(d.sub("sweep", required=True), d, currency)
        d.used.update({"tiei", "scenario"})
    else:
        sec = d.sub(command, required=True)
        if command == "tiei":
            payload = _tiei_section(sec)
        elif command == "roi":
            payload = _roi_section(sec, currency)
        elif command == "scenario":
            payload, options = _scenario_section(sec, currency)
        elif command == "gl":
            payload = _gl_section(sec, currency, gl_mode)
        else:
            payload = _ahp_section(sec)
    d.done()
    return RunConfig(command, payload, currency, output, seed, precision, options)


def parse_config(source, command=None, gl_mode=None) -> RunConfig:
    """Parse and validate a config file path or inline TOML text."""
    return config_from_dict(load_document(source), command, gl_mode)


def builtin_scenario_config(key: str) -> RunConfig:
    if key not in risk.BUILTIN_SCENARIOS:
        raise ValidationError(f"unknown built-in scenario {key!r}; choose from {', '.join(risk.BUILTIN_SCENARIOS)}")
    return RunConfig("scenario", risk.BUILTIN_SCENARIOS[key], options={"monte_carlo": None})
