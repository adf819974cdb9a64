"""Analysis configuration: defaults, key = value files, command-line flags and environment overrides."""
import logging
import os
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Tuple

from lib.errors import ConfigError
from lib.types import CatalogId, Stage

logger = logging.getLogger('confhor.config')

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _stages(text):
    return Stage.from_input(text)


def _optional_float(text):
    text = text.strip()
    return None if text.lower() in ("", "none") else float(text)


# key -> parser for values read from files and flags
PARSERS = {
    "metric": str,
    "M": float,
    "Q": _optional_float,
    "a": _optional_float,
    "sigma": _optional_float,
    "kappa": float,
    "compactifier": str,
    "stages": _stages,
    "grid": int,
    "quad_nodes": int,
    "refine_depth": int,
    "root_tol": float,
    "dtol": float,
    "quad_tol": float,
    "band": float,
    "out": str,
    "diagram_out": str,
    "threads": int,
}


@dataclass(frozen=True)
class AnalysisConfig:
    metric: str = "schwarzschild"
    M: float = 1.0
    Q: Optional[float] = None
    a: Optional[float] = None
    sigma: Optional[float] = None
    kappa: float = 4.0
    compactifier: str = "default"
    stages: Tuple[Stage, ...] = field(default=tuple(Stage))
    grid: int = 64
    quad_nodes: int = 32
    refine_depth: int = 40
    root_tol: float = 1e-10
    dtol: float = 1e-6
    quad_tol: float = 1e-8
    band: float = 0.1
    out: str = "report.json"
    diagram_out: str = "diagram.csv"
    threads: int = 0
    log_level: str = "INFO"

    def __post_init__(self):
        try:
            CatalogId.from_input(self.metric)
        except ValueError as e:
            raise ConfigError(str(e), field="metric")
        if self.compactifier not in ("default", "alternate"):
            raise ConfigError(f"Invalid compactifier: {self.compactifier} (default or alternate)", field="compactifier")
        if not self.M > 0:
            raise ConfigError(f"M must be positive, got {self.M}", field="M")
        for name in ("grid", "quad_nodes"):
            if getattr(self, name) < 4:
                raise ConfigError(f"resolution must be at least 4 per axis, got {getattr(self, name)}", field=name)
        if self.refine_depth < 1:
            raise ConfigError(f"refinement depth must be positive, got {self.refine_depth}", field="refine_depth")
        for name in ("root_tol", "dtol", "quad_tol", "band"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"must be positive, got {getattr(self, name)}", field=name)
        if not self.stages:
            raise ConfigError("no stages enabled", field="stages")
        if self.threads < 0:
            raise ConfigError(f"thread cap must be non-negative, got {self.threads}", field="threads")
        if self.log_level not in LOG_LEVELS:
            raise ConfigError(f"Invalid log level: {self.log_level}", field="log_level")

    @property
    def family(self):
        return CatalogId.from_input(self.metric)

    def catalog_params(self):
        return {"M": self.M, "Q": self.Q, "a": self.a, "sigma": self.sigma,
                "compactifier": self.compactifier, "kappa": self.kappa}

    def as_dict(self):
        """Field values in declaration order, stages by name."""
        values = {}
        for f in fields(self):
            value = getattr(self, f.name)
            values[f.name] = [stage.value for stage in value] if f.name == "stages" else value
        return values


def _coerce(key, raw, line=None):
    try:
        return PARSERS[key](raw)
    except ValueError as e:
        raise ConfigError(f"cannot parse {raw!r}: {e}", line=line, field=key)


def parse_config_text(text):
    """Parse `key = value` lines; `#` starts a comment, blank lines are skipped."""
    values = {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", line=number)
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError("unknown key", line=number, field=key)
        if not raw:
            raise ConfigError("missing value", line=number, field=key)
        if key in values:
            logger.warning(f"Config key '{key}' repeated on line {number}; the later value wins")
        values[key] = _coerce(key, raw, number)
    return values


def read_config_file(path):
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    return parse_config_text(text)


def environment_overrides(environ=None):
    environ = os.environ if environ is None else environ
    values = {}
    threads = environ.get('CONFHOR_THREADS', '').strip()
    if threads:
        try:
            values["threads"] = int(threads)
        except ValueError:
            raise ConfigError(f"CONFHOR_THREADS must be an integer, got {threads!r}", field="threads")
    level = environ.get('CONFHOR_LOG_LEVEL', '').strip()
    if level:
        values["log_level"] = level.upper()
    return values


def load_config(path=None, flags=None, environ=None):
    """Defaults, then the config file, then flags, then environment variables.

    flags maps config keys to already-typed values; None entries are ignored.
    """
    values = read_config_file(path) if path else {}
    for key, value in (flags or {}).items():
        if value is None:
            continue
        values[key] = _coerce(key, value) if isinstance(value, str) else value
    values.update(environment_overrides(environ))
    try:
        config = replace(AnalysisConfig(), **values)
    except TypeError as e:
        raise ConfigError(str(e))
    logger.info(f"Configuration: metric {config.metric}, stages {[s.value for s in config.stages]}")
    return config
