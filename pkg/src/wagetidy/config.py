"""Pipeline configuration: a small key/value file plus CLI overrides.

Grammar: one ``key = value`` per line, ``#`` comments and blank lines
ignored, booleans as true/false, empty value clears an optional path.
Every key has a CLI flag of the same name (dashes for underscores).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from .repair import RepairConfig

__all__ = [
    "PipelineConfig",
    "ConfigError",
    "load_config",
    "parse_config_text",
    "config_digest",
    "update_config_key",
    "CONFIG_KEYS",
]


class ConfigError(ValueError):
    """The configuration file or an override was malformed."""


@dataclass(frozen=True)
class PipelineConfig:
    raw_csv: str | None = None
    original_csv: str | None = None
    cpi_csv: str | None = None
    expectations_file: str | None = None
    out_dir: str = "out"
    vintage: str = "unspecified"
    seed: int = 1
    base_year: int | None = None
    port: int = 8787
    age_filter: bool = False
    dropout_include_females: bool = False
    weight_threshold: float = 0.1
    huber_c: float = 1.345
    max_iterations: int = 50
    convergence_tol: float = 1e-8
    scale_floor: float = 1e-8
    min_points_for_repair: int = 4
    config_path: str | None = None  # where the values came from, if a file

    def repair_config(self) -> RepairConfig:
        return RepairConfig(
            weight_threshold=self.weight_threshold,
            huber_c=self.huber_c,
            max_iterations=self.max_iterations,
            convergence_tol=self.convergence_tol,
            scale_floor=self.scale_floor,
            min_points_for_repair=self.min_points_for_repair,
        )


_OPTIONAL_STR = ("raw_csv", "original_csv", "cpi_csv", "expectations_file")
_STR = ("out_dir", "vintage")
_INT = ("seed", "port", "max_iterations", "min_points_for_repair")
_OPTIONAL_INT = ("base_year",)
_FLOAT = ("weight_threshold", "huber_c", "convergence_tol", "scale_floor")
_BOOL = ("age_filter", "dropout_include_females")

CONFIG_KEYS: tuple[str, ...] = (
    _OPTIONAL_STR + _STR + _INT + _OPTIONAL_INT + _FLOAT + _BOOL
)


def _coerce(key: str, text: str) -> Any:
    text = text.strip()
    try:
        if key in _OPTIONAL_STR:
            return text or None
        if key in _STR:
            return text
        if key in _INT:
            return int(text)
        if key in _OPTIONAL_INT:
            return int(text) if text else None
        if key in _FLOAT:
            return float(text)
        if key in _BOOL:
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc
    raise ConfigError(f"unknown config key {key!r}")


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    values: dict[str, Any] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source} line {line_no}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source} line {line_no}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source} line {line_no}: duplicate key {key!r}")
        values[key] = _coerce(key, value)
    return values


def load_config(
    path: str | Path | None, overrides: dict[str, Any] | None = None
) -> PipelineConfig:
    """Config file values, then CLI overrides, over the defaults."""
    values: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        values.update(parse_config_text(path.read_text(encoding="utf-8"), str(path)))
        values["config_path"] = str(path)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown override {key!r}")
        values[key] = value
    cfg = PipelineConfig(**values)
    cfg.repair_config().validate()
    return cfg


def config_digest(cfg: PipelineConfig) -> str:
    """Digest of the effective configuration (source path excluded)."""
    parts = []
    for f in fields(PipelineConfig):
        if f.name == "config_path":
            continue
        parts.append(f"{f.name}={getattr(cfg, f.name)!r}")
    blob = "\n".join(parts).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def update_config_key(path: str | Path, key: str, value: Any) -> None:
    """Rewrite one key in the config file, preserving everything else
    (comments included) byte for byte."""
    if key not in CONFIG_KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    path = Path(path)
    rendered = "" if value is None else str(value)
    lines = path.read_text(encoding="utf-8").splitlines()
    replaced = False
    out = []
    for line in lines:
        stripped = line.strip()
        if not replaced and not stripped.startswith("#") and "=" in stripped:
            existing = stripped.partition("=")[0].strip()
            if existing == key:
                out.append(f"{key} = {rendered}")
                replaced = True
                continue
        out.append(line)
    if not replaced:
        out.append(f"{key} = {rendered}")
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(out) + "\n", encoding="utf-8")
    tmp.replace(path)
