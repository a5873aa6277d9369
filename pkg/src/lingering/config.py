"""``section.key = value`` run configuration.

Unknown keys are errors, so a misspelt key never silently falls back to a
default.  ``resolve`` turns the raw mapping into a fully-populated
``RunConfig``; ``RunConfig.dump`` writes it back in the same grammar.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .grid import LANDSCAPE_KINDS, _DEFAULTS as _LANDSCAPE_DEFAULTS


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key."""

    def __init__(self, key: str | None, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


def _str(v):
    return v


def _choice(*options):
    def conv(v):
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v
    conv.options = options
    return conv


def _float(v):
    x = float(v)
    if not math.isfinite(x):
        raise ValueError(f"not a finite number: {v!r}")
    return x


def _int(v):
    f = float(v)
    if f != int(f):
        raise ValueError(f"not an integer: {v!r}")
    return int(f)


def _bool(v):
    low = v.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _optional_float(v):
    return None if v.lower() in ("none", "") else _float(v)


def parse_values(text: str) -> list[float]:
    """``start:step:end`` (end inclusive) or a comma-separated list."""
    text = text.strip()
    if not text:
        raise ValueError("empty value list")
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3:
            raise ValueError(f"range must be start:step:end, got {text!r}")
        start, step, end = parts
        if not step > 0 or end < start:
            raise ValueError(f"bad range {text!r}")
        n = int(math.floor((end - start) / step + 1e-9))
        vals = [round(start + i * step, 12) for i in range(n + 1)]
    else:
        vals = [float(p) for p in text.split(",") if p.strip()]
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ValueError(f"values must be finite and nonempty, got {text!r}")
    return vals


def _values(v):
    return parse_values(v)


# key -> (converter, default); None default means "unset"
SCHEMA: dict[str, tuple] = {
    "grid.ell": (_float, 5.0),
    "grid.n_cells": (_int, 512),
    "landscape.kind": (_choice(*LANDSCAPE_KINDS), "gaussian"),
    "landscape.file": (_str, None),
    "kernel.shape": (_choice("bump", "top_hat"), "bump"),
    "kernel.R": (_float, 1.5),
    "kernel.mode": (_choice("truncated", "normalized"), "normalized"),
    "motility.kind": (_choice("power", "constant"), "power"),
    "motility.c": (_float, 1.0),
    "motility.k": (_float, 2.0),
    "motility.gamma0": (_float, 1.0),
    "dynamics.alpha": (_float, 1.0),
    "dynamics.mu": (_float, 0.0),
    "dynamics.growth": (_choice("none", "logistic"), "none"),
    "dynamics.t_final": (_float, 500.0),
    "dynamics.dt_safety": (_float, 0.4),
    "dynamics.record_every": (_optional_float, None),
    "initial.u0": (_choice("landscape", "constant", "tabulated"), "landscape"),
    "initial.u0_value": (_float, 1.0),
    "initial.u0_file": (_str, None),
    "initial.m0": (_choice("zero", "alpha_sbar", "tabulated"), "zero"),
    "initial.m0_file": (_str, None),
    "output.path": (_str, "out.csv"),
    "output.plot": (_bool, False),
    "sweep.axis": (_choice("mu", "alpha", "R"), "mu"),
    "sweep.values": (_values, None),
    "sweep.mode": (_choice("dynamics", "steady_movement", "steady_logistic"), "steady_movement"),
    "sweep.workers": (_int, 1),
}
for _kind, _params in _LANDSCAPE_DEFAULTS.items():
    for _p in _params:
        SCHEMA.setdefault(f"landscape.{_p}", (_float, None))

SECTION_ORDER = ("grid", "landscape", "kernel", "motility", "dynamics", "initial", "output", "sweep")


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(None, f"{source}:{lineno}: expected 'section.key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(key, f"unknown config key ({source}:{lineno})")
        if key in raw:
            raise ConfigError(key, f"duplicate key ({source}:{lineno})")
        raw[key] = value
    return raw


def parse_file(path: str) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(None, f"cannot read config {path}: {exc.strerror}") from exc
    return parse_text(text, path)


def parse_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(None, f"override {item!r} must look like section.key=value")
    key, value = (p.strip() for p in item.split("=", 1))
    if key not in SCHEMA:
        raise ConfigError(key, "unknown config key (command line)")
    return key, value


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    base_dir: str = "."

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def with_value(self, key: str, value) -> "RunConfig":
        vals = dict(self.values)
        vals[key] = value
        return RunConfig(vals, self.base_dir)

    def landscape_params(self) -> dict[str, float]:
        kind = self.values["landscape.kind"]
        return {p: self.values[f"landscape.{p}"] for p in _LANDSCAPE_DEFAULTS[kind]}

    def path(self, key: str) -> str | None:
        p = self.values.get(key)
        if p is None:
            return None
        return p if os.path.isabs(p) else os.path.join(self.base_dir, p)

    def dump(self) -> str:
        lines = []
        for section in SECTION_ORDER:
            keys = [k for k in self.values
                    if k.split(".", 1)[0] == section and self.values[k] is not None]
            if not keys:
                continue
            lines.append(f"# {section}")
            for k in keys:
                lines.append(f"{k} = {format_value(self.values[k])}")
        return "\n".join(lines) + "\n"


def format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return ",".join(repr(float(x)) for x in v)
    return str(v)


def resolve(raw: dict[str, str], base_dir: str = ".") -> RunConfig:
    """Convert and default every key; keys irrelevant to the chosen kinds are rejected."""
    vals: dict = {}
    for key, (conv, default) in SCHEMA.items():
        if key in raw:
            try:
                vals[key] = conv(raw[key])
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from None
        else:
            vals[key] = default

    kind = vals["landscape.kind"]
    allowed = set(_LANDSCAPE_DEFAULTS[kind])
    for key in list(vals):
        if key.startswith("landscape.") and key not in ("landscape.kind", "landscape.file"):
            p = key.split(".", 1)[1]
            if p not in allowed:
                if key in raw:
                    raise ConfigError(key, f"not a parameter of landscape kind {kind!r}")
                del vals[key]
            elif vals[key] is None:
                vals[key] = float(_LANDSCAPE_DEFAULTS[kind][p])
    if kind == "custom" and vals["landscape.file"] is None:
        raise ConfigError("landscape.file", "required for landscape.kind = custom")
    if kind != "custom" and "landscape.file" in raw:
        raise ConfigError("landscape.file", "only used with landscape.kind = custom")
    for key, needed in (("initial.u0_file", vals["initial.u0"] == "tabulated"),
                        ("initial.m0_file", vals["initial.m0"] == "tabulated")):
        if needed and vals[key] is None:
            raise ConfigError(key, "required for tabulated initial data")

    for key in ("grid.ell", "kernel.R", "dynamics.t_final"):
        if not vals[key] > 0:
            raise ConfigError(key, "must be positive")
    for key in ("dynamics.alpha", "dynamics.mu"):
        if vals[key] < 0:
            raise ConfigError(key, "must be nonnegative")
    if not 0 < vals["dynamics.dt_safety"] <= 1:
        raise ConfigError("dynamics.dt_safety", "must lie in (0, 1]")
    if vals["sweep.workers"] < 1:
        raise ConfigError("sweep.workers", "must be at least 1")
    if vals["dynamics.record_every"] is not None and not vals["dynamics.record_every"] > 0:
        raise ConfigError("dynamics.record_every", "must be positive or none")
    return RunConfig(vals, base_dir)


def load(path: str, overrides: list[str] | None = None) -> RunConfig:
    raw = parse_file(path)
    for item in overrides or []:
        k, v = parse_override(item)
        raw[k] = v
    return resolve(raw, os.path.dirname(os.path.abspath(path)))


def load_table(path: str, key: str, n: int) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=1, dtype=float)
    except (OSError, ValueError) as exc:
        raise ConfigError(key, f"cannot read tabulated values from {path}: {exc}") from None
    data = np.ravel(data)
    if data.size != n:
        raise ConfigError(key, f"{path} has {data.size} values, grid has {n} cells")
    return data
