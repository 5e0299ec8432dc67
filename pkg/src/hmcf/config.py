"""Line-oriented ``key = value`` run configuration.

Grammar: one ``key = value`` per line, ``#`` starts a comment, blank lines
are ignored. Nested settings use dotted keys (``wave.b``, ``modelp.lambda``).
``model`` is required; every other key falls back to its default. Lists are
comma separated (``init.circle = 50,50,30``).
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from typing import Any, Callable

from .engine import MODELS, BenchParams, RegularizationParams, RunConfig
from .exceptions import ConfigError, HMCFError
from .velocity import ModelParams
from .wave import WaveParams


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"{s!r} is not finite")
    return v


def _int(s: str) -> int:
    return int(s)


def _optional_int(s: str) -> int | None:
    return None if s.lower() == "auto" else int(s)


def _optional_float(s: str) -> float | None:
    return None if s.lower() == "auto" else _float(s)


def _bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _float_list(s: str) -> tuple[float, ...]:
    return tuple(_float(p) for p in s.split(","))


def _circle(s: str) -> tuple[float, float, float]:
    vals = _float_list(s)
    if len(vals) != 3:
        raise ValueError("expected cx,cy,r")
    return vals


def _model(s: str) -> str:
    if s not in MODELS:
        raise ValueError(f"unknown model {s!r}; expected one of {', '.join(MODELS)}")
    return s


def _fmt(v: Any) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_fmt(float(x)) for x in v)
    return str(v)


def _names(msg: str, *words: str) -> bool:
    return any(re.search(rf"\b{re.escape(w)}\b", msg) for w in words)


@dataclass(frozen=True)
class _Key:
    section: str | None  # None: top-level RunConfig field
    attr: str
    parse: Callable[[str], Any]


_SECTIONS = {"wave": WaveParams, "modelp": ModelParams, "reg": RegularizationParams, "bench": BenchParams}

KEYS: dict[str, _Key] = {
    "model": _Key(None, "model", _model),
    "wave.b": _Key("wave", "b", _float),
    "wave.tau": _Key("wave", "tau", _float),
    "wave.substeps": _Key("wave", "substeps", _optional_int),
    "wave.eta": _Key("wave", "eta", _float),
    "modelp.lambda": _Key("modelp", "lam", _float),
    "modelp.mu": _Key("modelp", "mu", _float),
    "modelp.gamma": _Key("modelp", "gamma", _float),
    "modelp.u": _Key("modelp", "u", _float),
    "modelp.sigma": _Key("modelp", "sigma", _float),
    "modelp.n_threshold": _Key("modelp", "n_threshold", _float),
    "modelp.window": _Key("modelp", "window", _optional_int),
    "modelp.sigma_g": _Key("modelp", "sigma_g", _float),
    "modelp.edge_amplitude": _Key("modelp", "edge_amplitude", _float),
    "modelp.edge_exponent": _Key("modelp", "edge_exponent", _float),
    "reg.epsilon": _Key("reg", "epsilon", _float),
    "reg.alpha": _Key("reg", "alpha", _float),
    "reinit_every": _Key(None, "reinit_every", _int),
    "max_iters": _Key(None, "max_iters", _int),
    "conv_window": _Key(None, "conv_window", _int),
    "conv_threshold": _Key(None, "conv_threshold", _float),
    "init.circle": _Key(None, "init", _circle),
    "init.mask": _Key(None, "init", str),
    "init2.circle": _Key(None, "init2", _circle),
    "init2.mask": _Key(None, "init2", str),
    "seed": _Key(None, "seed", _int),
    "v_max": _Key(None, "v_max", _optional_float),
    "allow_vanish": _Key(None, "allow_vanish", _bool),
    "bench.size": _Key("bench", "size", _int),
    "bench.gaussian": _Key("bench", "gaussian", _float),
    "bench.salt_pepper": _Key("bench", "salt_pepper", _float),
    "bench.speckle": _Key("bench", "speckle", _float),
    "bench.periodic": _Key("bench", "periodic", _float),
    "bench.hmcf_b": _Key("bench", "hmcf_b", _float_list),
    "bench.hmcf_lambda": _Key("bench", "hmcf_lambda", _float_list),
    "bench.pmcf_mu": _Key("bench", "pmcf_mu", _float_list),
    "bench.pmcf_lambda": _Key("bench", "pmcf_lambda", _float_list),
}


def parse_config_text(text: str) -> RunConfig:
    """Parse configuration text; see the module docstring for the grammar.

    Raises
    ------
    ConfigError
        For unknown, duplicate or unparsable keys, out-of-range values and
        a missing ``model``. The message carries the line number.
    """
    top: dict[str, Any] = {}
    nested: dict[str, dict[str, Any]] = {s: {} for s in _SECTIONS}
    seen: dict[str, int] = {}
    first_line: dict[str, int] = {}
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        spec = KEYS[key]
        slot = spec.attr if spec.section is None else f"{spec.section}.{spec.attr}"
        if slot in seen:
            raise ConfigError(f"duplicate key {key!r} (first set on line {seen[slot]})", lineno)
        seen[slot] = lineno
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno)
        try:
            parsed = spec.parse(value)
        except ValueError as exc:
            raise ConfigError(f"cannot parse {key} = {value!r}: {exc}", lineno) from None
        first_line[spec.section or spec.attr] = first_line.get(spec.section or spec.attr, lineno)
        if spec.section is None:
            top[spec.attr] = parsed
        else:
            nested[spec.section][spec.attr] = parsed
    if "model" not in top:
        raise ConfigError("missing required key 'model'", len(lines) + 1)

    def build(name, factory, kwargs):
        try:
            return factory(**kwargs)
        except (HMCFError, ValueError) as exc:
            msg = str(exc)
            # point at the offending key when the message names it
            lineno = first_line.get(name)
            for key, spec in KEYS.items():
                slot = spec.attr if spec.section is None else f"{spec.section}.{spec.attr}"
                section = spec.section or "model"
                short = key.split(".")[-1]
                if section == name and slot in seen and _names(msg, short, spec.attr):
                    lineno = seen[slot]
                    break
            raise ConfigError(msg, lineno) from None

    for section, cls in _SECTIONS.items():
        top[section] = build(section, cls, nested[section])
    return build("model", RunConfig, top)


def parse_config(path: str | os.PathLike) -> RunConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())


def serialize_config(config: RunConfig) -> str:
    """Render every key, so that ``parse_config_text(serialize_config(c)) == c``."""
    out = []
    for key, spec in KEYS.items():
        if spec.section is None:
            value = getattr(config, spec.attr)
        else:
            value = getattr(getattr(config, spec.section), spec.attr)
        if spec.attr in ("init", "init2"):
            if value is None:
                continue
            is_path = isinstance(value, (str, os.PathLike))
            if key.endswith(".mask") != is_path:
                continue
            if not is_path and not (isinstance(value, tuple) and len(value) == 3):
                raise ConfigError(f"{spec.attr} of type {type(value).__name__} cannot be serialized")
            value = os.fspath(value) if is_path else tuple(float(v) for v in value)
        elif spec.section == "wave" and spec.attr == "b":
            if not isinstance(value, (int, float)):
                raise ConfigError("a per-cell b field cannot be serialized")
            value = float(value)
        elif isinstance(value, int) and not isinstance(value, bool) and spec.parse is _float:
            value = float(value)
        out.append(f"{key} = {_fmt(value)}")
    return "\n".join(out) + "\n"


__all__ = ["KEYS", "parse_config", "parse_config_text", "serialize_config"]
