"""Run configuration with precedence: flags > THETASEED_* environment > config file > defaults."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

ENV_PREFIX = "THETASEED_"
FLOAT_BITS = 53

CHECK_GROUPS = ("schur", "tau", "kp", "roundtrip", "minimal", "curves", "theta", "sigma", "modular", "duality")


class ConfigError(ValueError):
    pass


def default_fixture_dir() -> Path:
    return Path(__file__).parent / "fixtures"


@dataclass(frozen=True)
class RunConfig:
    precision: int = FLOAT_BITS
    weight_cutoff: int = 48
    theta_tol: float = 1e-14
    quad_tol: float = 1e-13
    seed: int = 20240601
    fixture_dir: Path = field(default_factory=default_fixture_dir)
    checks: tuple[str, ...] = CHECK_GROUPS
    frames_per_cell: int = 3
    mutation: str | None = None

    def validate(self, max_lambda_weight: int = 0) -> "RunConfig":
        if self.theta_tol <= 0 or self.quad_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.precision <= 0:
            raise ConfigError("precision must be positive")
        if self.precision > FLOAT_BITS:
            raise ConfigError(f"numerics run in binary64; precision {self.precision} > {FLOAT_BITS} bits is unsupported")
        if self.weight_cutoff < max_lambda_weight + 4:
            raise ConfigError(f"weight_cutoff {self.weight_cutoff} < max |lambda| + 4 = {max_lambda_weight + 4}")
        unknown = set(self.checks) - set(CHECK_GROUPS)
        if unknown:
            raise ConfigError(f"unknown checks: {sorted(unknown)}")
        if self.mutation not in (None, "sign-flip", "permute-a0", "plucker"):
            raise ConfigError(f"unknown mutation {self.mutation!r}")
        if self.frames_per_cell < 0:
            raise ConfigError("frames_per_cell must be non-negative")
        return self

    def to_json(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["fixture_dir"] = str(self.fixture_dir)
        out["checks"] = list(self.checks)
        return out


def _coerce(name: str, value: Any) -> Any:
    kinds = {f.name: f for f in fields(RunConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    if value is None:
        return None
    try:
        if name in ("precision", "weight_cutoff", "seed", "frames_per_cell"):
            return int(value)
        if name in ("theta_tol", "quad_tol"):
            return float(value)
        if name == "fixture_dir":
            return Path(value)
        if name == "checks":
            if isinstance(value, str):
                value = [v.strip() for v in value.split(",") if v.strip()]
            return tuple(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc
    return value


def read_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return data.get("thetaseed", data)


def from_env(environ: Mapping[str, str] | None = None) -> dict:
    environ = os.environ if environ is None else environ
    names = {f.name for f in fields(RunConfig)}
    out = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            if name in names:
                out[name] = value
    return out


def resolve(flags: Mapping[str, Any] | None = None, config_file: str | Path | None = None,
            environ: Mapping[str, str] | None = None) -> RunConfig:
    layers: list[Mapping[str, Any]] = []
    if config_file is not None:
        layers.append(read_config_file(config_file))
    layers.append(from_env(environ))
    layers.append({k: v for k, v in (flags or {}).items() if v is not None})
    cfg = RunConfig()
    for layer in layers:
        cfg = replace(cfg, **{k: _coerce(k, v) for k, v in layer.items()})
    return cfg
