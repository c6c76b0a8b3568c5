"""Run configuration: defaults, config file, environment, flag overlays.

Precedence, lowest to highest: built-in defaults, config file (flat
key=value lines), MOBFC_* environment variables, command-line flags.  The
defaults reproduce the reference setup exactly: an 80:20 split, 15
clusters, a (1,0,1)(1,0,1,7) model on daily counts, one root seed.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Mapping

ENV_PREFIX = "MOBFC_"


class ConfigError(ValueError):
    """Unknown key, malformed value, or out-of-range setting."""


@dataclass(frozen=True)
class RunConfig:
    input_taxi: str = ""
    input_food: str = ""
    boroughs: str = ""  # empty means the bundled borough outlines
    out: str = "out"
    seed: int = 0
    split: float = 0.8
    k: int = 15
    granularity: str = "day"
    p: int = 1
    d: int = 0
    q: int = 1
    sp: int = 1
    sd: int = 0
    sq: int = 1
    s: int = 7
    with_constant: bool = True
    deseasonalize: bool = False
    max_duration_min: float = 180.0
    subsample: int = 500000
    max_evals: int = 600
    tolerance: float = 1e-7
    restarts: int = 5
    horizon: int = 0  # 0 means: forecast exactly the test span
    threads: int = 0  # 0 means: available parallelism
    quiet: bool = False

    def validate(self) -> "RunConfig":
        if not 0.0 < self.split < 1.0:
            raise ConfigError(f"split must be in (0,1), got {self.split}")
        if self.k < 1:
            raise ConfigError(f"k must be positive, got {self.k}")
        if self.granularity not in ("day", "hour"):
            raise ConfigError(f"granularity must be 'day' or 'hour', got {self.granularity!r}")
        for name in ("p", "d", "q", "sp", "sd", "sq", "s"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if (self.sp, self.sd, self.sq) != (0, 0, 0) and self.s < 2:
            raise ConfigError("seasonal orders require a period s >= 2")
        if self.subsample < 1:
            raise ConfigError("subsample must be positive")
        if self.max_evals < 1 or self.restarts < 1:
            raise ConfigError("max_evals and restarts must be positive")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")
        if self.horizon < 0 or self.threads < 0:
            raise ConfigError("horizon and threads must be non-negative")
        if self.max_duration_min <= 0:
            raise ConfigError("max_duration_min must be positive")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low in _BOOL_TRUE:
                return True
            if low in _BOOL_FALSE:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from None


def parse_config_file(path: str | Path) -> dict:
    """Parse `key = value` lines; '#' starts a comment, blanks are skipped."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    out: dict = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line.strip()!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown setting {key!r}")
        out[key] = _coerce(key, raw)
    return out


def env_overrides(environ: Mapping[str, str] | None = None) -> dict:
    """Collect MOBFC_<KEY> overrides for every known setting."""
    environ = os.environ if environ is None else environ
    out: dict = {}
    for key in _FIELD_TYPES:
        raw = environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            out[key] = _coerce(key, raw)
    return out


def resolve_config(
    file_path: str | Path | None = None,
    flag_values: Mapping[str, object] | None = None,
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    """Overlay defaults <- file <- environment <- flags and validate."""
    config = RunConfig()
    if file_path is not None:
        config = replace(config, **parse_config_file(file_path))
    config = replace(config, **env_overrides(environ))
    if flag_values:
        unknown = set(flag_values) - set(_FIELD_TYPES)
        if unknown:
            raise ConfigError(f"unknown settings: {sorted(unknown)}")
        config = replace(config, **dict(flag_values))
    return config.validate()


def config_dict(config: RunConfig) -> dict:
    return {f.name: getattr(config, f.name) for f in fields(RunConfig)}


def config_hash(config: RunConfig) -> str:
    """Stable 8-hex-digit digest of every setting that shapes the outputs.

    Input paths and verbosity are excluded so the same analysis settings
    get the same run id wherever the files happen to live.
    """
    skip = {"input_taxi", "input_food", "out", "quiet", "threads"}
    canon = "\n".join(
        f"{name}={getattr(config, name)!r}"
        for name in sorted(_FIELD_TYPES)
        if name not in skip
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:8]


def run_id(config: RunConfig) -> str:
    return f"run-{config.seed}-{config_hash(config)}"
