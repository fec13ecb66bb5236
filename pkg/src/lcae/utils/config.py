"""
Run configuration for the command line.

Grammar: one `key = value` per line, `#` starts a comment, blank lines
ignored. Keys are fixed (see KNOWN_KEYS); an unknown key or a value that
does not parse is a ConfigError carrying the line number.

Precedence, lowest first: built-in defaults, the user file
`run.cfg` in platformdirs.user_config_dir("lcae"), the --config file,
explicit command-line flags.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional

from platformdirs import user_config_dir

from lcae.utils.errors import ConfigError

logger = logging.getLogger(__name__)

APP_NAME = "lcae"
USER_CONFIG_NAME = "run.cfg"


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_ratios(text: str) -> tuple:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


KNOWN_KEYS: Dict[str, Callable[[str], Any]] = {
    # trainer
    "lam": float,
    "mu1": float,
    "mu2": float,
    "mu": float,
    "ridge": float,
    "max_sweeps": int,
    "tol": float,
    "seed": int,
    "bregman_rule": str,
    "n": int,
    "h1": int,
    "h2": int,
    "classes": int,
    "threads": int,
    # sensing
    "m": int,
    "d": int,
    "ratio": float,
    "ratios": _parse_ratios,
    # data
    "sample_rate_hz": float,
    "window_len": int,
    "hop": int,
    # baselines
    "basis": str,
    "omp_k": int,
    "ista_lam": float,
    "ista_max_iters": int,
    "ista_tol": float,
    # benchmark
    "repeats": int,
    "log_wall_ms": _parse_bool,
    # paths
    "windows": str,
    "test_windows": str,
    "measurements": str,
    "phi": str,
    "model": str,
    "out": str,
    "log": str,
    "metrics": str,
}

DEFAULTS: Dict[str, Any] = {
    "lam": 1.0,
    "mu1": 0.01,
    "mu2": 0.01,
    "mu": 0.01,
    "ridge": 1e-8,
    "max_sweeps": 100,
    "tol": 1e-6,
    "seed": 0,
    "bregman_rule": "paper",
    "h1": 125,
    "h2": 63,
    "threads": 1,
    "d": 2,
    "ratios": (0.5, 0.25),
    "sample_rate_hz": 250.0,
    "basis": "dct",
    "ista_lam": 0.01,
    "ista_max_iters": 2000,
    "ista_tol": 1e-6,
    "repeats": 5,
    "log_wall_ms": False,
}


def user_config_path() -> Path:
    return Path(user_config_dir(appname=APP_NAME)) / USER_CONFIG_NAME


def parse_config_text(text: str) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected `key = value`, got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", line=lineno)
        try:
            values[key] = KNOWN_KEYS[key](value)
        except ValueError as e:
            raise ConfigError(f"bad value for {key!r}: {e}", line=lineno) from e
    return values


def load_config_file(path) -> Dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    try:
        return parse_config_text(text)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from e


@dataclass
class RunConfig:
    """Effective settings plus where each one came from."""

    values: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULTS))
    sources: Dict[str, str] = field(default_factory=lambda: {k: "default" for k in DEFAULTS})

    def merge(self, updates: Mapping[str, Any], source: str) -> "RunConfig":
        for key, value in updates.items():
            if key not in KNOWN_KEYS:
                raise ConfigError(f"unknown key {key!r} from {source}")
            if value is None:
                continue
            self.values[key] = value
            self.sources[key] = source
        return self

    def get(self, key: str, default: Any = None) -> Any:
        if key not in KNOWN_KEYS:
            raise KeyError(key)
        return self.values.get(key, default)

    def require(self, key: str) -> Any:
        value = self.values.get(key)
        if value is None:
            flag = "--" + key.replace("_", "-")
            raise ConfigError(f"missing required setting {key!r} (pass {flag} or set it in the config file)")
        return value

    def __getitem__(self, key: str) -> Any:
        return self.require(key)


def load_run_config(
    config_path: Optional[str] = None,
    use_user_config: bool = True,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    cfg = RunConfig()
    if use_user_config:
        user_path = user_config_path()
        if user_path.exists():
            logger.info(f"Using user config {user_path}")
            cfg.merge(load_config_file(user_path), str(user_path))
    if config_path:
        cfg.merge(load_config_file(config_path), str(config_path))
    if overrides:
        cfg.merge({k: v for k, v in overrides.items() if k in KNOWN_KEYS}, "command line")
    return cfg
