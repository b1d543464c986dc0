"""Run configuration: parsing, validation and serialisation.

The native format is sectioned ``key = value`` text::

    [scenario]
    n_users = 5
    seed = 42

    [noise]
    rho_max = 80

A JSON object with the same sections is accepted as well. Every key and
its default is listed in ``FIELDS``.
"""
from __future__ import annotations

import configparser
import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable

from .errors import ConfigInvalid, ConfigSyntax
from .sim import SWEEPABLE, ScenarioParams


def _to_int(v):
    if isinstance(v, bool):
        raise ValueError("expected an integer")
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        if not v.is_integer():
            raise ValueError("expected an integer")
        return int(v)
    return int(str(v).strip())


def _to_float(v):
    if isinstance(v, bool):
        raise ValueError("expected a number")
    x = float(v) if isinstance(v, (int, float)) else float(str(v).strip())
    if not math.isfinite(x):
        raise ValueError("expected a finite number")
    return x


def _to_str(v):
    if not isinstance(v, str):
        raise ValueError("expected text")
    return v.strip()


def _to_bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _to_list(item: Callable) -> Callable:
    def conv(v):
        if isinstance(v, str):
            parts = [p for p in (s.strip() for s in v.split(",")) if p]
        elif isinstance(v, (list, tuple)):
            parts = list(v)
        else:
            parts = [v]
        return tuple(item(p) for p in parts)

    return conv


def _to_privacy(v):
    if isinstance(v, str):
        s = v.strip()
        if s == "uniform":
            return s
        if "," in s:
            return _to_list(_to_float)(s)
        return _to_float(s)
    if isinstance(v, (list, tuple)):
        return tuple(_to_float(x) for x in v)
    return _to_float(v)


def _to_optional_str(v):
    if v is None:
        return None
    s = _to_str(v)
    return s or None


# section -> key -> (converter, default); None default means required
FIELDS: dict[str, dict[str, tuple[Callable, Any]]] = {
    "scenario": {
        "n_users": (_to_int, None),
        "seed": (_to_int, None),
        "n_pois": (_to_int, 500),
        "rounds": (_to_int, 10),
        "region_width": (_to_float, 1000.0),
        "region_height": (_to_float, 1000.0),
        "privacy": (_to_privacy, "uniform"),
        "service": (_to_str, "restaurant"),
        "poi_categories": (_to_list(_to_str), ()),
        "interest_radius": (_to_float, 125.0),
    },
    "noise": {
        "rho_min": (_to_float, 5.0),
        "rho_max": (_to_float, 50.0),
    },
    "provider": {
        "serving_radius": (_to_float, 125.0),
    },
    "energy": {
        "e_tx_mj": (_to_float, 0.66),
        "e_rx_mj": (_to_float, 0.395),
    },
    "output": {
        "format": (_to_str, "json"),
        "path": (_to_optional_str, ""),
        "trace": (_to_bool, False),
    },
}

_VARY_CONVERTERS = {
    "n_users": _to_list(_to_int),
    "rho_max": _to_list(_to_float),
    "serving_radius": _to_list(_to_float),
    "privacy": lambda v: tuple(_to_privacy(x) for x in (v.split(",") if isinstance(v, str) else v)),
}


@dataclass(frozen=True)
class RunConfig:
    n_users: int
    seed: int
    n_pois: int = 500
    rounds: int = 10
    region_width: float = 1000.0
    region_height: float = 1000.0
    privacy: str | float | tuple[float, ...] = "uniform"
    service: str = "restaurant"
    poi_categories: tuple[str, ...] = ()
    interest_radius: float = 125.0
    rho_min: float = 5.0
    rho_max: float = 50.0
    serving_radius: float = 125.0
    e_tx_mj: float = 0.66
    e_rx_mj: float = 0.395
    format: str = "json"
    path: str | None = None
    trace: bool = False
    vary: dict[str, tuple] = field(default_factory=dict, hash=False)

    def scenario_params(self) -> ScenarioParams:
        return ScenarioParams(
            n_users=self.n_users,
            seed=self.seed,
            n_pois=self.n_pois,
            region_width=self.region_width,
            region_height=self.region_height,
            privacy=self.privacy,
            rounds=self.rounds,
            rho_min=self.rho_min,
            rho_max=self.rho_max,
            service=self.service,
            poi_categories=self.poi_categories,
            serving_radius=self.serving_radius,
            interest_radius=self.interest_radius,
            e_tx=self.e_tx_mj / 1000.0,
            e_rx=self.e_rx_mj / 1000.0,
        )

    def sections(self) -> dict[str, dict[str, Any]]:
        """Sectioned form, as written to config files and report metadata."""
        flat = asdict(self)
        out = {sec: {k: flat[k] for k in keys} for sec, keys in FIELDS.items()}
        for sec in out.values():
            for k, v in sec.items():
                if isinstance(v, tuple):
                    sec[k] = list(v)
        if self.vary:
            out["vary"] = {k: list(v) for k, v in self.vary.items()}
        return out


def _read_ini(text: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), default_section="__defaults__"
    )
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigSyntax("expected a [section] header", exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigSyntax("malformed line", lineno) from exc
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigSyntax(str(exc).split(":")[-1].strip(), exc.lineno) from exc
    return {sec: dict(parser.items(sec)) for sec in parser.sections()}


def _read_json(text: str) -> dict[str, dict[str, Any]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSyntax(exc.msg, exc.lineno) from exc
    if not isinstance(doc, dict) or not all(isinstance(v, dict) for v in doc.values()):
        raise ConfigSyntax("expected an object of sections", 1)
    return doc


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document, filling defaults.

    Raises ConfigSyntax for unreadable text and ConfigInvalid naming the
    offending field for anything that reads but does not validate.
    """
    raw = _read_json(text) if text.lstrip().startswith("{") else _read_ini(text)

    values: dict[str, Any] = {}
    vary: dict[str, tuple] = {}
    for sec, items in raw.items():
        if sec == "vary":
            for key, v in items.items():
                if key not in SWEEPABLE:
                    raise ConfigInvalid(key, f"not sweepable; choose from {', '.join(SWEEPABLE)}")
                try:
                    vary[key] = _VARY_CONVERTERS[key](v)
                except (TypeError, ValueError) as exc:
                    raise ConfigInvalid(key, str(exc)) from exc
                if not vary[key]:
                    raise ConfigInvalid(key, "no values")
            continue
        if sec not in FIELDS:
            raise ConfigInvalid(sec, "unknown section")
        for key, v in items.items():
            if key not in FIELDS[sec]:
                raise ConfigInvalid(key, f"unknown key in [{sec}]")
            conv = FIELDS[sec][key][0]
            try:
                values[key] = conv(v)
            except (TypeError, ValueError) as exc:
                raise ConfigInvalid(key, str(exc)) from exc

    for sec, keys in FIELDS.items():
        for key, (_, default) in keys.items():
            if key not in values:
                if default is None:
                    raise ConfigInvalid(key, "required")
    cfg = RunConfig(**values, vary=vary)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    checks = [
        ("n_users", cfg.n_users >= 1, "must be >= 1"),
        ("seed", 0 <= cfg.seed < 2**64, "must be a 64-bit unsigned integer"),
        ("n_pois", cfg.n_pois >= 0, "must be >= 0"),
        ("rounds", cfg.rounds >= 0, "must be >= 0"),
        ("region_width", cfg.region_width > 0, "must be positive"),
        ("region_height", cfg.region_height > 0, "must be positive"),
        ("service", bool(cfg.service), "must be non-empty"),
        ("interest_radius", cfg.interest_radius > 0, "must be positive"),
        ("serving_radius", cfg.serving_radius > 0, "must be positive"),
        ("e_tx_mj", cfg.e_tx_mj >= 0, "must be non-negative"),
        ("e_rx_mj", cfg.e_rx_mj >= 0, "must be non-negative"),
        ("format", cfg.format in ("csv", "json"), "must be csv or json"),
        ("noise", 0 <= cfg.rho_min <= cfg.rho_max, "need 0 <= rho_min <= rho_max"),
    ]
    for name, ok, msg in checks:
        if not ok:
            raise ConfigInvalid(name, msg)
    p = cfg.privacy
    if isinstance(p, str):
        if p != "uniform":
            raise ConfigInvalid("privacy", "must be 'uniform', a level, or a list of levels")
    else:
        levels = p if isinstance(p, tuple) else (p,)
        if any(not 0.0 <= x <= 1.0 for x in levels):
            raise ConfigInvalid("privacy", "levels must lie in [0, 1]")
        if isinstance(p, tuple) and len(p) != cfg.n_users:
            raise ConfigInvalid("privacy", f"{len(p)} levels given for {cfg.n_users} users")


def _ini_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_ini_value(x) for x in v)
    return str(v)


def serialize_config(cfg: RunConfig, fmt: str = "ini") -> str:
    """Render ``cfg`` so that ``parse_config`` reproduces it exactly."""
    sections = cfg.sections()
    if fmt == "json":
        return json.dumps(sections, indent=2) + "\n"
    if fmt != "ini":
        raise ValueError(f"unknown config format {fmt!r}")
    lines = []
    for sec, items in sections.items():
        lines.append(f"[{sec}]")
        for k, v in items.items():
            if sec == "vary" and k == "privacy":
                lines.append(f"{k} = {', '.join(_ini_value(x) for x in v)}")
            else:
                lines.append(f"{k} = {_ini_value(v)}")
        lines.append("")
    return "\n".join(lines)


def with_overrides(cfg: RunConfig, **changes) -> RunConfig:
    """Copy of ``cfg`` with fields replaced, re-validated."""
    names = {f.name for f in fields(RunConfig)}
    unknown = set(changes) - names
    if unknown:
        raise ConfigInvalid(sorted(unknown)[0], "unknown field")
    data = {f.name: getattr(cfg, f.name) for f in fields(RunConfig)}
    data.update(changes)
    new = RunConfig(**data)
    validate(new)
    return new
