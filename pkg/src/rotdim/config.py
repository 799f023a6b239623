"""Run configuration: a single JSON document, strictly validated.

Unknown keys are rejected with the line and column where they appear.  The
materialized config (every default filled in) is what reports echo and what
the run hash is computed from.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .cf_engine import (
    EXACT,
    LOGSPACE,
    ConstantPQ,
    ExplicitPQ,
    PeriodicPQ,
    PowerOfQ,
    RotationSpec,
    convergents,
)
from .dim_core import AUTO, BRUTE_FORCE, PIECEWISE, SECTION_SEARCH, DimConfig
from .errors import ConfigError
from .phi_models import BlockConstant, LogPower, PowerLaw, TableStep

_RULE_KEYS = {
    "ConstantPQ": {"a"},
    "PeriodicPQ": {"period"},
    "ExplicitPQ": {"quotients"},
    "PowerOfQ": {"c"},
}
_THETA_COMMON = {"rule": None, "k_max": None, "mode": EXACT, "digit_cap": 10**6,
                 "exact_seed_bits": 256}

_PHI_KEYS = {
    "PowerLaw": {"c": "1", "gamma": None},
    "LogPower": {"c": "1", "gamma": None, "delta": "0"},
    "BlockConstant": {"breakpoint": None, "value": None},
    "TableStep": {"breakpoints": None, "values": None},
}

_SECTIONS = {
    "dim": {"K": None, "tol_s": 0.005, "margin": 0.02, "div_tol": 0.005, "window": 0.5,
            "brute_cap": 10**5, "strategy": AUTO, "fk_threshold": 1.0, "mt_K": None},
    "cf": {"K": None},
    "gaps": {"N": 4, "k": None, "precision_bits": 64, "n_cap": 10**5},
    "cover": {"k": 4, "s": 0.6, "split": None},
    "boxdim": {"K0": 3, "K1": 24, "depth": 3, "j_min": None, "j_max": None, "layered": True},
    "hit": {"n_max": 10**4, "samples": 8, "y": None, "source": "uniform"},
}
_TOP = {"name": "run", "seed": 0, "output": None, "theta": None, "phi": None, **{k: None for k in _SECTIONS}}

_STRATEGIES = {AUTO, BRUTE_FORCE, SECTION_SEARCH, PIECEWISE}


# ---------------------------------------------------------------------------
# key positions
# ---------------------------------------------------------------------------

def key_positions(text: str) -> Dict[Tuple, Tuple[int, int]]:
    """Map from key path (tuple of object keys) to (line, column), 1-based.

    A small scanner over already-valid JSON: it tracks the object/array
    nesting and records every string that is followed by a colon.
    """
    pos: Dict[Tuple, Tuple[int, int]] = {}
    stack = []          # entries: ["obj", current_key] or ["arr", index]
    i, line, col = 0, 1, 1
    n = len(text)

    def path():
        return tuple(e[1] for e in stack if e[0] == "obj" and e[1] is not None)

    while i < n:
        ch = text[i]
        if ch == '"':
            start_line, start_col = line, col
            j = i + 1
            buf = []
            while text[j] != '"':
                if text[j] == "\\":
                    buf.append(text[j:j + 2])
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            raw = json.loads('"' + "".join(buf) + '"')
            col += j + 1 - i
            i = j + 1
            k = i
            while k < n and text[k] in " \t\r\n":
                k += 1
            if k < n and text[k] == ":" and stack and stack[-1][0] == "obj":
                stack[-1][1] = raw
                pos[path()] = (start_line, start_col)
            continue
        if ch == "{":
            stack.append(["obj", None])
        elif ch == "[":
            stack.append(["arr", 0])
        elif ch in "}]":
            stack.pop()
        if ch == "\n":
            line += 1
            col = 1
        else:
            col += 1
        i += 1
    return pos


def _where(pos, path: Tuple, source: str) -> str:
    if path in pos:
        ln, cl = pos[path]
        return f"{source}:{ln}:{cl}"
    # fall back to the closest enclosing key
    while path:
        path = path[:-1]
        if path in pos:
            ln, cl = pos[path]
            return f"{source}:{ln}:{cl}"
    return f"{source}:1:1"


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    raw: dict                 # materialized config
    source: str
    text: str

    @property
    def name(self) -> str:
        return self.raw["name"]

    def sha256(self) -> str:
        return hashlib.sha256(canonical_json(self.raw).encode("utf-8")).hexdigest()

    def echo(self) -> dict:
        return copy.deepcopy(self.raw)

    # -- builders --
    def rotation_spec(self) -> RotationSpec:
        t = self.raw["theta"]
        rule = t["rule"]
        if rule == "ConstantPQ":
            r = ConstantPQ(t["a"])
        elif rule == "PeriodicPQ":
            r = PeriodicPQ(tuple(t["period"]))
        elif rule == "ExplicitPQ":
            r = ExplicitPQ(tuple(t["quotients"]))
        else:
            r = PowerOfQ(Fraction(t["c"]))
        return RotationSpec(r, t["k_max"], t["mode"], t["digit_cap"], t["exact_seed_bits"])

    def table_K(self) -> int:
        """Rows needed by every section of this config."""
        d = self.raw["dim"]
        ks = [d["K"], d["mt_K"], self.raw["cf"]["K"]]
        return max(k for k in ks if k is not None)

    def table(self, K: Optional[int] = None):
        spec = self.rotation_spec()
        return convergents(spec, K if K is not None else self.table_K())

    def model(self, table):
        p = self.raw["phi"]
        kind = p["kind"]
        if kind == "PowerLaw":
            return PowerLaw(Fraction(p["c"]), Fraction(p["gamma"]))
        if kind == "LogPower":
            return LogPower(Fraction(p["c"]), Fraction(p["gamma"]), Fraction(p["delta"]))
        if kind == "BlockConstant":
            return BlockConstant(p["breakpoint"], p["value"], table)
        return TableStep(p["breakpoints"], [Fraction(v) for v in p["values"]])

    def dim_config(self) -> DimConfig:
        d = self.raw["dim"]
        return DimConfig(K=d["K"], tol_s=d["tol_s"], margin=d["margin"], div_tol=d["div_tol"],
                         window=d["window"], brute_cap=d["brute_cap"], strategy=d["strategy"],
                         fk_threshold=d["fk_threshold"], mt_K=d["mt_K"])


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _num_str(v, where, name):
    """Rational parameter given as int, decimal string or 'a/b'."""
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ConfigError(f"{where}: {name} must be a number or a rational string")
    try:
        f = Fraction(str(v))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{where}: {name}={v!r} is not a rational number") from None
    return str(f)


def _int(v, where, name, lo=None, allow_none=False):
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}: {name} must be an integer")
    if lo is not None and v < lo:
        raise ConfigError(f"{where}: {name} must be >= {lo}")
    return v


def _float(v, where, name, lo=None, hi=None):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: {name} must be a number")
    v = float(v)
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise ConfigError(f"{where}: {name}={v} outside [{lo}, {hi}]")
    return v


def _check_keys(obj, allowed, path, pos, source):
    if not isinstance(obj, dict):
        raise ConfigError(f"{_where(pos, path, source)}: {'.'.join(path) or 'config'} must be an object")
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"{_where(pos, path + (k,), source)}: unknown key "
                              f"{'.'.join(path + (k,))!r}")


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    pos = key_positions(text)
    _check_keys(doc, _TOP, (), pos, source)
    out: Dict[str, Any] = {}
    w = lambda *p: _where(pos, p, source)  # noqa: E731

    out["name"] = doc.get("name", "run")
    if not isinstance(out["name"], str):
        raise ConfigError(f"{w('name')}: name must be a string")
    out["seed"] = _int(doc.get("seed", 0), w("seed"), "seed", 0)
    out["output"] = doc.get("output")
    if out["output"] is not None and not isinstance(out["output"], str):
        raise ConfigError(f"{w('output')}: output must be a string")

    # theta
    if "theta" not in doc:
        raise ConfigError(f"{source}:1:1: missing required section 'theta'")
    t = doc["theta"]
    _check_keys(t, set(_THETA_COMMON) | set().union(*_RULE_KEYS.values()), ("theta",), pos, source)
    rule = t.get("rule")
    if rule not in _RULE_KEYS:
        raise ConfigError(f"{w('theta', 'rule')}: theta.rule must be one of {sorted(_RULE_KEYS)}")
    for k in t:
        if k not in _THETA_COMMON and k not in _RULE_KEYS[rule]:
            raise ConfigError(f"{w('theta', k)}: key {'theta.' + k!r} does not apply to {rule}")
    th = {"rule": rule}
    if rule == "ConstantPQ":
        th["a"] = _int(t.get("a"), w("theta", "a"), "theta.a", 1)
    elif rule == "PeriodicPQ":
        per = t.get("period")
        if not isinstance(per, list) or not per:
            raise ConfigError(f"{w('theta', 'period')}: theta.period must be a non-empty list")
        th["period"] = [_int(a, w("theta", "period"), "theta.period[]", 1) for a in per]
    elif rule == "ExplicitPQ":
        qs = t.get("quotients")
        if not isinstance(qs, list) or not qs:
            raise ConfigError(f"{w('theta', 'quotients')}: theta.quotients must be a non-empty list")
        th["quotients"] = [_int(a, w("theta", "quotients"), "theta.quotients[]", 1) for a in qs]
    else:
        th["c"] = _num_str(t.get("c"), w("theta", "c"), "theta.c")
    if "k_max" not in t:
        raise ConfigError(f"{w('theta')}: theta.k_max is required")
    th["k_max"] = _int(t["k_max"], w("theta", "k_max"), "theta.k_max", 1)
    th["mode"] = t.get("mode", EXACT)
    if th["mode"] not in (EXACT, LOGSPACE):
        raise ConfigError(f"{w('theta', 'mode')}: theta.mode must be 'exact' or 'log'")
    th["digit_cap"] = _int(t.get("digit_cap", 10**6), w("theta", "digit_cap"), "theta.digit_cap", 1)
    th["exact_seed_bits"] = _int(t.get("exact_seed_bits", 256), w("theta", "exact_seed_bits"),
                                 "theta.exact_seed_bits", 8)
    out["theta"] = th

    # phi
    if "phi" not in doc:
        raise ConfigError(f"{source}:1:1: missing required section 'phi'")
    p = doc["phi"]
    _check_keys(p, {"kind"} | set().union(*[set(v) for v in _PHI_KEYS.values()]), ("phi",), pos, source)
    kind = p.get("kind")
    if kind not in _PHI_KEYS:
        raise ConfigError(f"{w('phi', 'kind')}: phi.kind must be one of {sorted(_PHI_KEYS)}")
    for k in p:
        if k != "kind" and k not in _PHI_KEYS[kind]:
            raise ConfigError(f"{w('phi', k)}: key {'phi.' + k!r} does not apply to {kind}")
    ph = {"kind": kind}
    for k, dflt in _PHI_KEYS[kind].items():
        v = p.get(k, dflt)
        if v is None:
            raise ConfigError(f"{w('phi')}: phi.{k} is required for {kind}")
        if kind in ("PowerLaw", "LogPower"):
            ph[k] = _num_str(v, w("phi", k), "phi." + k)
        elif kind == "BlockConstant":
            if not isinstance(v, str):
                raise ConfigError(f"{w('phi', k)}: phi.{k} must be an expression string")
            ph[k] = v
        elif k == "breakpoints":
            if not isinstance(v, list):
                raise ConfigError(f"{w('phi', k)}: phi.breakpoints must be a list")
            ph[k] = [_int(b, w("phi", k), "phi.breakpoints[]", 1) for b in v]
        else:
            if not isinstance(v, list):
                raise ConfigError(f"{w('phi', k)}: phi.values must be a list")
            ph[k] = [_num_str(x, w("phi", k), "phi.values[]") for x in v]
    out["phi"] = ph

    # plain sections
    for sec, defaults in _SECTIONS.items():
        given = doc.get(sec, {})
        _check_keys(given, defaults, (sec,), pos, source)
        merged = {k: given.get(k, d) for k, d in defaults.items()}
        out[sec] = merged
    _validate_sections(out, w)
    return RunConfig(out, source, text)


def _validate_sections(out, w):
    d = out["dim"]
    d["K"] = _int(d["K"], w("dim", "K"), "dim.K", 1, allow_none=True)
    d["mt_K"] = _int(d["mt_K"], w("dim", "mt_K"), "dim.mt_K", 1, allow_none=True)
    d["tol_s"] = _float(d["tol_s"], w("dim", "tol_s"), "dim.tol_s", 1e-6, 0.5)
    d["margin"] = _float(d["margin"], w("dim", "margin"), "dim.margin", 0.0, 1.0)
    d["div_tol"] = _float(d["div_tol"], w("dim", "div_tol"), "dim.div_tol", 0.0, 1.0)
    if d["div_tol"] > d["margin"]:
        raise ConfigError(f"{w('dim', 'div_tol')}: dim.div_tol must not exceed dim.margin")
    d["window"] = _float(d["window"], w("dim", "window"), "dim.window", 0.05, 1.0)
    d["brute_cap"] = _int(d["brute_cap"], w("dim", "brute_cap"), "dim.brute_cap", 1)
    d["fk_threshold"] = _float(d["fk_threshold"], w("dim", "fk_threshold"), "dim.fk_threshold", 0.0)
    if d["strategy"] not in _STRATEGIES:
        raise ConfigError(f"{w('dim', 'strategy')}: dim.strategy must be one of {sorted(_STRATEGIES)}")
    k_max = out["theta"]["k_max"]
    if d["K"] is None:
        d["K"] = min(12 if out["theta"]["rule"] == "PowerOfQ" else 40, k_max)
    for key in ("K", "mt_K"):
        if d[key] is not None and d[key] > k_max:
            raise ConfigError(f"{w('dim', key)}: dim.{key}={d[key]} exceeds theta.k_max={k_max}")
    if d["mt_K"] is None:
        d["mt_K"] = d["K"]
    c = out["cf"]
    c["K"] = _int(c["K"], w("cf", "K"), "cf.K", 0, allow_none=True)
    if c["K"] is None:
        c["K"] = min(d["K"], k_max)
    if c["K"] > k_max:
        raise ConfigError(f"{w('cf', 'K')}: cf.K exceeds theta.k_max")
    g = out["gaps"]
    g["N"] = _int(g["N"], w("gaps", "N"), "gaps.N", 1, allow_none=True)
    g["k"] = _int(g["k"], w("gaps", "k"), "gaps.k", 0, allow_none=True)
    g["precision_bits"] = _int(g["precision_bits"], w("gaps", "precision_bits"), "gaps.precision_bits", 8)
    g["n_cap"] = _int(g["n_cap"], w("gaps", "n_cap"), "gaps.n_cap", 1)
    cv = out["cover"]
    cv["k"] = _int(cv["k"], w("cover", "k"), "cover.k", 0)
    cv["s"] = _float(cv["s"], w("cover", "s"), "cover.s", 1e-9, 1.0)
    cv["split"] = _int(cv["split"], w("cover", "split"), "cover.split", 1, allow_none=True)
    b = out["boxdim"]
    b["K0"] = _int(b["K0"], w("boxdim", "K0"), "boxdim.K0", 0)
    b["K1"] = _int(b["K1"], w("boxdim", "K1"), "boxdim.K1", 0)
    b["depth"] = _int(b["depth"], w("boxdim", "depth"), "boxdim.depth", 1)
    b["j_min"] = _int(b["j_min"], w("boxdim", "j_min"), "boxdim.j_min", 0, allow_none=True)
    b["j_max"] = _int(b["j_max"], w("boxdim", "j_max"), "boxdim.j_max", 0, allow_none=True)
    if not isinstance(b["layered"], bool):
        raise ConfigError(f"{w('boxdim', 'layered')}: boxdim.layered must be true or false")
    h = out["hit"]
    h["n_max"] = _int(h["n_max"], w("hit", "n_max"), "hit.n_max", 1)
    h["samples"] = _int(h["samples"], w("hit", "samples"), "hit.samples", 1)
    if h["source"] not in ("uniform", "approx"):
        raise ConfigError(f"{w('hit', 'source')}: hit.source must be 'uniform' or 'approx'")
    if h["y"] is not None:
        h["y"] = _num_str(h["y"], w("hit", "y"), "hit.y")


def load_config(path_or_name: str) -> RunConfig:
    """Read a config file, or a shipped config by bare name (e.g. 'golden-gamma2')."""
    p = Path(path_or_name)
    if p.exists():
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"{path_or_name}: cannot read: {exc}") from None
        return parse_config(text, str(p))
    name = path_or_name[:-5] if path_or_name.endswith(".json") else path_or_name
    ref = resources.files("rotdim").joinpath("configs", name + ".json")
    if ref.is_file():
        return parse_config(ref.read_text(encoding="utf-8"), f"configs/{name}.json")
    raise ConfigError(f"{path_or_name}: no such file or shipped config")


def shipped_configs():
    d = resources.files("rotdim").joinpath("configs")
    return sorted(f.name[:-5] for f in d.iterdir() if f.name.endswith(".json"))
