"""Strict loader for the ``key = value`` run configuration.

Grammar: ``[section]`` headers, then ``key = value`` lines; ``#`` or ``;``
start a comment line. Sections and keys are fixed (see ``SCHEMA``); anything
else is rejected. Lists are comma-separated. Relative paths in ``[paths]``
resolve against the config file's directory.
"""
from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass, field

from medul.errors import ConfigError
from medul.estimators import DEFAULT_FOLDS, DEFAULT_W, LAMBDA_GRID, METHODS


def _int_list(s):
    return [int(v) for v in s.split(",") if v.strip()]


def _float_list(s):
    return [float(v) for v in s.split(",") if v.strip()]


def _str_list(s):
    return [v.strip() for v in s.split(",") if v.strip()]


def _lam(s):
    return "auto" if s.strip() == "auto" else float(s)


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _setting(s):
    s = s.strip().lower()
    if s not in ("satisfied", "violated"):
        raise ValueError("setting must be satisfied or violated")
    return s


def _method(s):
    s = s.strip()
    if s not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    return s


# section -> key -> (parser, default)
SCHEMA = {
    "generator": {
        "dim": (int, 2),
        "n": (int, 1000),
        "n_prime": (int, 1000),
        "n_test": (int, 10000),
        "setting": (_setting, "satisfied"),
        "noise_y_var": (float, 0.1),
        "seed": (int, 0),
    },
    "fit": {
        "method": (_method, "joint"),
        "w": (float, DEFAULT_W),
        "lambda": (_lam, "auto"),
        "features": (str, "rbf:200"),
        "f_features": (str, None),
        "h_features": (str, None),
        "g_features": (str, None),
        "folds": (int, DEFAULT_FOLDS),
        "lambda_grid": (_float_list, list(LAMBDA_GRID)),
    },
    "bench": {
        "dims": (_int_list, [2, 5, 10, 20]),
        "methods": (_str_list, list(METHODS)),
        "trials": (int, 20),
        "base_seed": (int, 0),
        "n_list": (_int_list, [125, 500, 2000]),
        "timing": (_bool, False),
    },
    "paths": {
        "sx": (str, None),
        "sy": (str, None),
        "test": (str, None),
        "model": (str, None),
        "out": (str, None),
    },
}


def _render(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ", ".join(_render(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class CliConfig:
    sections: dict = field(default_factory=dict)
    source: str | None = None

    def get(self, section, key):
        return self.sections[section][key]

    def to_text(self) -> str:
        lines = []
        for sec, keys in SCHEMA.items():
            lines.append(f"[{sec}]")
            for k in keys:
                v = self.sections[sec][k]
                if v is not None:
                    lines.append(f"{k} = {_render(v)}")
            lines.append("")
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    def __eq__(self, other):
        return isinstance(other, CliConfig) and self.sections == other.sections


def defaults() -> CliConfig:
    return CliConfig({sec: {k: (list(d) if isinstance(d, list) else d) for k, (_, d) in keys.items()}
                      for sec, keys in SCHEMA.items()})


def parse_config(text: str, base_dir: str | None = None, source=None) -> CliConfig:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    cfg = defaults()
    cfg.source = source
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", key=sec)
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {sec}.{key}", key=f"{sec}.{key}")
            parser = SCHEMA[sec][key][0]
            try:
                value = parser(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {sec}.{key}: {exc}", key=f"{sec}.{key}") from None
            if sec == "paths" and value and base_dir and not os.path.isabs(value):
                value = os.path.normpath(os.path.join(base_dir, value))
            cfg.sections[sec][key] = value
    return cfg


def load_config(path) -> CliConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}", key=None)
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, os.path.dirname(os.path.abspath(path)), source=str(path))
