"""Scenario configuration: JSON document with explicit unit suffixes.

Frequencies must carry a unit suffix distinguishing ordinary from angular
frequency ("2 kHz" vs "12566.37 rad/s"); a bare number is rejected, which
removes the classic factor-2*pi ambiguity.  Lengths and times accept bare
numbers (meters, seconds) or suffixed strings.  Unknown fields anywhere in
the document are rejected.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional

from .exceptions import ConfigError
from .model import SystemParameters

_TWO_PI = 2.0 * math.pi

_FREQ_UNITS = {
    "hz": _TWO_PI, "khz": _TWO_PI * 1e3, "mhz": _TWO_PI * 1e6, "ghz": _TWO_PI * 1e9,
    "rad/s": 1.0, "krad/s": 1e3, "mrad/s": 1e6, "grad/s": 1e9,
}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12}
_LENGTH_UNITS = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9}

_QTY_RE = re.compile(r"^\s*([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*([a-zA-Zµ/]+)\s*$")


def _parse_suffixed(raw, units, kind, where):
    if isinstance(raw, bool):
        raise ConfigError(f"{where}: expected a {kind}, got a boolean")
    if isinstance(raw, (int, float)):
        return float(raw)
    if not isinstance(raw, str):
        raise ConfigError(f"{where}: expected a number or '<value> <unit>' string")
    m = _QTY_RE.match(raw)
    if not m:
        raise ConfigError(f"{where}: cannot parse quantity {raw!r}")
    value, unit = m.groups()
    key = unit.lower() if unit.lower() in units else unit
    if key not in units:
        raise ConfigError(
            f"{where}: unknown {kind} unit {unit!r} (allowed: {sorted(units)})"
        )
    return float(value) * units[key]


def parse_frequency(raw, where: str) -> float:
    """Angular frequency in rad/s; the unit suffix is mandatory."""
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        raise ConfigError(
            f"{where}: frequency needs an explicit unit suffix "
            "(e.g. '2 kHz' or '12566.4 rad/s') to fix the 2*pi convention"
        )
    return _parse_suffixed(raw, _FREQ_UNITS, "frequency", where)


def parse_time(raw, where: str) -> float:
    return _parse_suffixed(raw, _TIME_UNITS, "time", where)


def parse_length(raw, where: str) -> float:
    return _parse_suffixed(raw, _LENGTH_UNITS, "length", where)


_SYSTEM_FIELDS = {
    "omega1": (parse_frequency, "5 GHz"),
    "omega2": (parse_frequency, "5 GHz"),
    "l1": (parse_length, 0.0),
    "l2": (parse_length, 0.01),
    "gamma1": (parse_frequency, "2 kHz"),
    "gamma2": (parse_frequency, "100 MHz"),
    "gamma_i1": (parse_frequency, "0 Hz"),
    "gamma_i2": (parse_frequency, "0 Hz"),
    "velocity": (lambda raw, where: float(raw), 1e8),
}

SCENARIO_KINDS = (
    "decay", "dde-compare", "rabi", "pi-pulse", "pulse-train",
    "detuning-sweep", "position-sweep",
)

_SCENARIO_FIELDS = {
    "decay": {
        "t_end": (parse_time, "100 ns"),
        "samples": (int, 1001),
    },
    "dde-compare": {
        "t_end": (parse_time, "200 ns"),
        "step": (parse_time, None),
    },
    "rabi": {
        "rabi_frequency": (parse_frequency, "25 MHz"),
        "t_end": (parse_time, "200 ns"),
        "samples": (int, 2001),
    },
    "pi-pulse": {
        "duration": (parse_time, "20 ns"),
        "t_end": (parse_time, "1 us"),
        "samples": (int, 1001),
    },
    "pulse-train": {
        "duration": (parse_time, "20 ns"),
        "period": (parse_time, "100 ns"),
        "n_pulses": (int, 51),
        "t_end": (parse_time, None),  # default: end of the last pulse
        "samples": (int, 1005),
    },
    "detuning-sweep": {
        "start": (parse_frequency, "-400 MHz"),
        "stop": (parse_frequency, "400 MHz"),
        "count": (int, 17),
        "fit_t_end": (parse_time, "10 us"),
    },
    "position-sweep": {
        "start_over_lambda": (float, 0.05),
        "stop_over_lambda": (float, 1.0),
        "count": (int, 20),
        "t_end": (parse_time, "100 ns"),
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed scenario: system parameters, kind, options and output target."""

    system: SystemParameters
    kind: str
    options: dict
    output_format: str = "csv"
    output_path: Optional[str] = None
    jobs: Optional[int] = None
    no_jqf: bool = False

    @classmethod
    def from_dict(cls, doc: dict, kind: Optional[str] = None) -> "ScenarioConfig":
        if not isinstance(doc, dict):
            raise ConfigError("configuration root must be an object")
        unknown = set(doc) - {"system", "scenario", "output"}
        if unknown:
            raise ConfigError(f"unknown top-level field(s): {sorted(unknown)}")

        sys_doc = doc.get("system", {})
        if not isinstance(sys_doc, dict):
            raise ConfigError("'system' must be an object")
        unknown = set(sys_doc) - set(_SYSTEM_FIELDS)
        if unknown:
            raise ConfigError(f"unknown system field(s): {sorted(unknown)}")
        sys_kwargs = {}
        for name, (parser, default) in _SYSTEM_FIELDS.items():
            raw = sys_doc.get(name, default)
            sys_kwargs[name] = parser(raw, f"system.{name}")
        try:
            system = SystemParameters(**sys_kwargs)
        except ValueError as exc:
            raise ConfigError(f"invalid system parameters: {exc}") from exc

        scen_doc = doc.get("scenario", {})
        if not isinstance(scen_doc, dict):
            raise ConfigError("'scenario' must be an object")
        doc_kind = scen_doc.get("kind", kind)
        if doc_kind is None:
            raise ConfigError("scenario.kind is required (or implied by the "
                              "CLI subcommand)")
        if doc_kind not in SCENARIO_KINDS:
            raise ConfigError(f"unknown scenario kind {doc_kind!r} "
                              f"(allowed: {list(SCENARIO_KINDS)})")
        if kind is not None and doc_kind != kind:
            raise ConfigError(
                f"scenario.kind {doc_kind!r} does not match the requested "
                f"scenario {kind!r}"
            )
        schema = _SCENARIO_FIELDS[doc_kind]
        unknown = set(scen_doc) - set(schema) - {"kind"}
        if unknown:
            raise ConfigError(f"unknown scenario field(s): {sorted(unknown)}")
        options = {}
        for name, (parser, default) in schema.items():
            raw = scen_doc.get(name, default)
            if raw is None:
                options[name] = None
            elif parser in (int,):
                if isinstance(raw, bool) or (isinstance(raw, float)
                                             and not raw.is_integer()):
                    raise ConfigError(f"scenario.{name} must be an integer")
                options[name] = int(raw)
            elif parser is float:
                options[name] = float(raw)
            else:
                options[name] = parser(raw, f"scenario.{name}")

        out_doc = doc.get("output", {})
        if not isinstance(out_doc, dict):
            raise ConfigError("'output' must be an object")
        unknown = set(out_doc) - {"format", "path"}
        if unknown:
            raise ConfigError(f"unknown output field(s): {sorted(unknown)}")
        output_format = out_doc.get("format", "csv")
        if output_format not in ("csv", "json"):
            raise ConfigError("output.format must be 'csv' or 'json'")
        return cls(
            system=system,
            kind=doc_kind,
            options=options,
            output_format=output_format,
            output_path=out_doc.get("path"),
        )

    @classmethod
    def from_file(cls, path: str, kind: Optional[str] = None) -> "ScenarioConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        return cls.from_dict(doc, kind=kind)

    def resolved_document(self) -> dict:
        """Config with every value resolved to base units (rad/s, m, s).

        Feeding this document back through :meth:`from_dict` reproduces the
        run bit for bit (floats serialized via repr round-trip exactly).
        """
        p = self.system
        system = {
            "omega1": f"{p.omega1!r} rad/s",
            "omega2": f"{p.omega2!r} rad/s",
            "l1": p.l1,
            "l2": p.l2,
            "gamma1": f"{p.gamma1!r} rad/s",
            "gamma2": f"{p.gamma2!r} rad/s",
            "gamma_i1": f"{p.gamma_i1!r} rad/s",
            "gamma_i2": f"{p.gamma_i2!r} rad/s",
            "velocity": p.velocity,
        }
        scenario = {"kind": self.kind}
        for name, value in self.options.items():
            if value is None:
                continue
            parser = _SCENARIO_FIELDS[self.kind][name][0]
            if parser is parse_frequency:
                scenario[name] = f"{value!r} rad/s"
            else:
                scenario[name] = value
        out = {"format": self.output_format}
        if self.output_path:
            out["path"] = self.output_path
        return {"system": system, "scenario": scenario, "output": out}
