"""Flat key-value configuration: files and command-line overrides.

Keys are namespaced with dots (scan.s, field.num_rows, ctrl.alpha).
Files hold one `key = value` pair per line; '#' starts a comment.
"""

from __future__ import annotations

import dataclasses
import os
from typing import Any

from rowtrack.control import ControllerConfig, ExitConfig
from rowtrack.field import CameraSpec, FieldSpec
from rowtrack.scan import ScanConfig
from rowtrack.sim import TrialConfig

NAMESPACES = {
    "field": FieldSpec,
    "cam": CameraSpec,
    "scan": ScanConfig,
    "ctrl": ControllerConfig,
    "exit": ExitConfig,
    "trial": TrialConfig,
}


class ConfigError(ValueError):
    pass


def parse_override(text: str) -> tuple[str, str, str]:
    """Split 'ns.key=value' into its parts."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form ns.key=value")
    key, value = text.split("=", 1)
    key = key.strip()
    if "." not in key:
        raise ConfigError(f"override key {key!r} lacks a namespace (e.g. scan.s)")
    ns, field_name = key.split(".", 1)
    if ns not in NAMESPACES:
        raise ConfigError(f"unknown config namespace {ns!r} in key {key!r}")
    return ns, field_name, value.strip()


def _convert(raw: str, current: Any) -> Any:
    if isinstance(current, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, tuple):
        parts = [p for p in raw.replace(",", " ").split() if p]
        return tuple(type(current[0])(p) for p in parts)
    return raw


def load_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Read `key = value` lines into an override mapping."""
    overrides: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            overrides[key.strip()] = value.strip()
    return overrides


def build_configs(overrides: dict[str, str]) -> dict[str, Any]:
    """Instantiate every namespace config with overrides applied."""
    grouped: dict[str, dict[str, Any]] = {ns: {} for ns in NAMESPACES}
    for key, raw in overrides.items():
        ns, field_name, value = parse_override(f"{key}={raw}")
        cls = NAMESPACES[ns]
        fields = {f.name: f for f in dataclasses.fields(cls)}
        if field_name not in fields:
            raise ConfigError(f"unknown config key {ns}.{field_name}")
        default = getattr(cls(), field_name)
        try:
            grouped[ns][field_name] = _convert(value, default)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {ns}.{field_name}: {exc}") from exc
    out: dict[str, Any] = {}
    for ns, cls in NAMESPACES.items():
        try:
            out[ns] = cls(**grouped[ns])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid {ns} config: {exc}") from exc
    return out


def dump_configs(configs: dict[str, Any], namespaces: tuple[str, ...]) -> str:
    """Serialize selected namespaces back to the flat key = value format."""
    lines = []
    for ns in namespaces:
        obj = configs[ns]
        for f in dataclasses.fields(obj):
            value = getattr(obj, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            lines.append(f"{ns}.{f.name} = {value}")
    return "\n".join(lines) + "\n"
