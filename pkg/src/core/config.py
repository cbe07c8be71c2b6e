"""
Configuration Module for reebflow
Centralized configuration loading from key-value text, YAML and environment variables
"""
import os
import yaml
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple
from dataclasses import dataclass, field
from dotenv import load_dotenv

from .errors import ConfigError
from ..utils.validators import parse_bool, parse_float, parse_sweep, parse_vector

# Load environment variables
load_dotenv()

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent.parent

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
QUAD_RULES = ("auto", "gauss_legendre", "stroud")


@dataclass
class QuadConfig:
    """Quadrature rule selection on the weighted-sphere link"""
    rule: str = "auto"
    points: Optional[int] = None  # None = 128 (n=1) or 20 per direction (n>=2)
    mc_samples: int = 1_000_000
    mc_seed: int = 20240917


@dataclass
class FlowConfig:
    """Volume-decreasing flow settings"""
    dt0: float = 0.01
    grad_tol: float = 1e-8
    t_max: float = 1000.0
    boundary_guard: float = 1e-6
    max_halvings: int = 20
    start: Optional[Tuple[float, ...]] = None
    mu_samples: int = 10


@dataclass
class MinimizeConfig:
    """Damped Newton settings"""
    grad_tol: float = 1e-10
    max_iter: int = 100


@dataclass
class SolitonConfig:
    """n=1 soliton solver settings"""
    grid_points: int = 41
    quad_points: int = 64
    sweep: Tuple[float, float, int] = (1.0, 4.0, 20)


@dataclass
class OutputConfig:
    """Output locations"""
    dir: str = "results"
    svg: bool = True


@dataclass
class RunConfig:
    """Main run configuration"""
    n: int = 1
    quad: QuadConfig = field(default_factory=QuadConfig)
    flow: FlowConfig = field(default_factory=FlowConfig)
    minimize: MinimizeConfig = field(default_factory=MinimizeConfig)
    soliton: SolitonConfig = field(default_factory=SolitonConfig)
    properness_eps: Tuple[float, ...] = (0.3, 0.1, 0.03, 0.01)
    output: OutputConfig = field(default_factory=OutputConfig)
    log_level: str = "INFO"

    @property
    def output_dir(self) -> Path:
        """Output directory, relative paths resolved against the working directory"""
        return Path(self.output.dir)

    def default_start(self) -> Tuple[float, ...]:
        """Flow start: configured value or a fixed asymmetric point on the slice"""
        if self.flow.start is not None:
            return self.flow.start
        if self.n == 1:
            return (0.5, 1.5)
        raw = [0.2 + 1.6 * k / self.n for k in range(self.n + 1)]
        scale = (self.n + 1) / sum(raw)
        return tuple(scale * a for a in raw)

    def to_text(self) -> str:
        """Serialize to the key-value format accepted by parse_config"""
        lines = []
        for key, spec in KEY_SPECS.items():
            value = _get(self, spec)
            if value is None:
                continue
            lines.append(f"{key} = {spec.render(value)}")
        return "\n".join(lines) + "\n"

    def validate(self) -> "RunConfig":
        """
        Re-check every key after programmatic changes

        Raises:
            ConfigError: naming the first key whose value is out of range
        """
        for key, spec in KEY_SPECS.items():
            value = _get(self, spec)
            if value is None:
                continue
            problem = spec.check(value)
            if problem:
                raise ConfigError(key, problem)
        _check_cross_fields(self, {})
        return self

    @classmethod
    def from_yaml(cls, yaml_path: Path, env: bool = True) -> "RunConfig":
        """Load configuration from a YAML file (nested mapping of the dotted keys)"""
        yaml_path = Path(yaml_path)
        with open(yaml_path, 'r') as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise ConfigError(str(yaml_path), "top level must be a mapping")

        config = cls()
        seen: Dict[str, Optional[int]] = {}
        for key, value in _flatten(data):
            _apply(config, key, _yaml_text(value), None)
            seen[key] = None
        _check_cross_fields(config, seen)
        if env:
            config._load_from_env()
        return config

    def _load_from_env(self):
        """Load overrides from environment variables"""
        if os.getenv('REEBFLOW_SEED'):
            _apply(self, 'quad.mc_seed', os.getenv('REEBFLOW_SEED'), None)
        if os.getenv('REEBFLOW_OUTPUT_DIR'):
            self.output.dir = os.getenv('REEBFLOW_OUTPUT_DIR')
        if os.getenv('REEBFLOW_LOG_LEVEL'):
            _apply(self, 'log.level', os.getenv('REEBFLOW_LOG_LEVEL'), None)


# ============================================
# KEY TABLE
# ============================================

@dataclass(frozen=True)
class _KeySpec:
    section: Optional[str]
    attr: str
    parse: Callable[[str, str], Any]
    check: Callable[[Any], Optional[str]]
    render: Callable[[Any], str] = str


def _int(text: str, name: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ValueError(f"{name}: malformed integer '{text}'") from None


def _optional_int(text: str, name: str) -> Optional[int]:
    if text.strip().lower() in ("", "auto", "none"):
        return None
    return _int(text, name)


def _choice(options: Iterable[str], upper: bool = False) -> Callable[[str, str], str]:
    options = tuple(options)

    def parse(text: str, name: str) -> str:
        value = text.strip().upper() if upper else text.strip().lower()
        if value not in options:
            raise ValueError(f"{name}: expected one of {', '.join(options)}, got '{text}'")
        return value
    return parse


def _positive(v) -> Optional[str]:
    return None if v > 0 else f"must be > 0, got {v}"


def _at_least(k: int) -> Callable[[Any], Optional[str]]:
    return lambda v: None if v >= k else f"must be >= {k}, got {v}"


def _ok(_v) -> Optional[str]:
    return None


def _render_vector(v) -> str:
    return ",".join(repr(float(x)) for x in v)


def _render_sweep(v) -> str:
    return f"{v[0]!r}:{v[1]!r}:{v[2]}"


KEY_SPECS: Dict[str, _KeySpec] = {
    'n': _KeySpec(None, 'n', _int, lambda v: None if 1 <= v <= 3 else f"must be in 1..3, got {v}"),
    'quad.rule': _KeySpec('quad', 'rule', _choice(QUAD_RULES), _ok),
    'quad.points': _KeySpec('quad', 'points', _optional_int,
                            lambda v: None if v is None or v >= 2 else f"must be >= 2, got {v}"),
    'quad.mc_samples': _KeySpec('quad', 'mc_samples', _int, _at_least(1000)),
    'quad.mc_seed': _KeySpec('quad', 'mc_seed', _int,
                             lambda v: None if 0 <= v < 2 ** 64 else f"must be a 64-bit unsigned integer, got {v}"),
    'flow.dt0': _KeySpec('flow', 'dt0', parse_float, _positive, repr),
    'flow.grad_tol': _KeySpec('flow', 'grad_tol', parse_float, _positive, repr),
    'flow.t_max': _KeySpec('flow', 't_max', parse_float, _positive, repr),
    'flow.boundary_guard': _KeySpec('flow', 'boundary_guard', parse_float,
                                    lambda v: None if 0 < v < 1 else f"must be in (0, 1), got {v}", repr),
    'flow.max_halvings': _KeySpec('flow', 'max_halvings', _int, _at_least(1)),
    'flow.start': _KeySpec('flow', 'start', lambda t, k: parse_vector(t, k),
                           lambda v: None if min(v) > 0 else "entries must be positive", _render_vector),
    'flow.mu_samples': _KeySpec('flow', 'mu_samples', _int, _at_least(2)),
    'minimize.grad_tol': _KeySpec('minimize', 'grad_tol', parse_float, _positive, repr),
    'minimize.max_iter': _KeySpec('minimize', 'max_iter', _int, _at_least(1)),
    'soliton.grid_points': _KeySpec('soliton', 'grid_points', _int, _at_least(5)),
    'soliton.quad_points': _KeySpec('soliton', 'quad_points', _int, _at_least(8)),
    'soliton.sweep': _KeySpec('soliton', 'sweep', lambda t, k: parse_sweep(t, k), _ok, _render_sweep),
    'properness.eps': _KeySpec(None, 'properness_eps', lambda t, k: parse_vector(t, k, min_length=1),
                               lambda v: None if all(0 < e < 1 for e in v) else "entries must be in (0, 1)",
                               _render_vector),
    'output.dir': _KeySpec('output', 'dir', lambda t, k: t.strip(),
                           lambda v: None if v else "must not be empty"),
    'output.svg': _KeySpec('output', 'svg', parse_bool, _ok, lambda v: "true" if v else "false"),
    'log.level': _KeySpec(None, 'log_level', _choice(LOG_LEVELS, upper=True), _ok),
}


def _target(config: RunConfig, spec: _KeySpec):
    return config if spec.section is None else getattr(config, spec.section)


def _get(config: RunConfig, spec: _KeySpec):
    return getattr(_target(config, spec), spec.attr)


def _apply(config: RunConfig, key: str, raw: str, line: Optional[int]):
    """Parse, range-check and set one key"""
    spec = KEY_SPECS.get(key)
    if spec is None:
        raise ConfigError(key, "unknown key", line)
    try:
        value = spec.parse(raw, key)
    except ValueError as e:
        message = str(e)
        prefix = f"{key}: "
        raise ConfigError(key, message[len(prefix):] if message.startswith(prefix) else message, line) from None
    problem = spec.check(value)
    if problem:
        raise ConfigError(key, problem, line)
    setattr(_target(config, spec), spec.attr, value)


def _check_cross_fields(config: RunConfig, seen: Dict[str, Optional[int]]):
    start = config.flow.start
    if start is not None and len(start) != config.n + 1:
        raise ConfigError('flow.start', f"needs n+1 = {config.n + 1} entries, got {len(start)}",
                          seen.get('flow.start'))


def _flatten(data: Dict[str, Any], prefix: str = "") -> List[Tuple[str, Any]]:
    items = []
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(_flatten(value, dotted + "."))
        else:
            items.append((dotted, value))
    return items


def _yaml_text(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if value is None:
        return "auto"
    return str(value)


def parse_config(text: str) -> RunConfig:
    """
    Parse the plain-text key-value format

    Args:
        text: Lines of ``key = value``; ``#`` starts a comment

    Returns:
        Validated RunConfig with defaults filled in
    """
    config = RunConfig()
    seen: Dict[str, Optional[int]] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(line, "expected 'key = value'", lineno)
        key, value = (part.strip() for part in line.split('=', 1))
        if key in seen:
            raise ConfigError(key, f"duplicate key (first set on line {seen[key]})", lineno)
        _apply(config, key, value, lineno)
        seen[key] = lineno
    _check_cross_fields(config, seen)
    return config


def load_config(path: Optional[Path] = None, env: bool = True) -> RunConfig:
    """
    Load a config file (YAML by suffix, key-value text otherwise)

    Args:
        path: Config file; None = defaults
        env: Apply environment overrides

    Returns:
        RunConfig
    """
    if path is None:
        config = RunConfig()
    else:
        path = Path(path)
        if not path.exists():
            raise ConfigError(str(path), "config file not found")
        if path.suffix in ('.yaml', '.yml'):
            return RunConfig.from_yaml(path, env=env)
        config = parse_config(path.read_text(encoding='utf-8'))
    if env:
        config._load_from_env()
    return config


# Singleton instance
_config: Optional[RunConfig] = None


def get_config(reload: bool = False) -> RunConfig:
    """
    Get default run configuration (singleton)

    Args:
        reload: Force reload configuration

    Returns:
        RunConfig instance
    """
    global _config

    if _config is None or reload:
        config_path = PROJECT_ROOT / "config" / "reebflow.yaml"
        if config_path.exists():
            _config = RunConfig.from_yaml(config_path)
        else:
            _config = RunConfig()
            _config._load_from_env()

    return _config
