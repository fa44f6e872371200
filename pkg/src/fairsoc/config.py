"""Experiment configuration: defaults, JSON loading, strict validation.

Configs are plain JSON objects. Unknown keys are rejected with their full
dotted path so a typo in a sweep script fails loudly instead of silently
running the defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from .economy import SIGMA_FORMS
from .errors import ConfigError
from .optimizer import SimplexOptions
from .strategies import StrategyKind

LOG_FORMATS = ("csv", "json")


def _expect_bool(value: Any, path: str) -> bool:
    if isinstance(value, bool):
        return value
    raise ConfigError(f"{path}: expected true/false, got {value!r}")


def _expect_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _expect_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _expect_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    return value


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 2000
    tolerance: float = 1e-8
    restarts: int = 4
    block_size: int = 10

    def validate(self) -> None:
        if self.max_iterations < 1:
            raise ConfigError(f"optimizer.max_iterations must be >= 1, got {self.max_iterations}")
        if not self.tolerance > 0.0:
            raise ConfigError(f"optimizer.tolerance must be > 0, got {self.tolerance}")
        if self.restarts < 0:
            raise ConfigError(f"optimizer.restarts must be >= 0, got {self.restarts}")
        if self.block_size < 1:
            raise ConfigError(f"optimizer.block_size must be >= 1, got {self.block_size}")

    def simplex_options(self) -> SimplexOptions:
        return SimplexOptions(
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            restarts=self.restarts,
            block_size=self.block_size,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 42
    strategies: tuple[str, ...] = ("0", "A", "b", "Ab")
    societies: int = 100
    generations: int = 100
    initial_population: int = 100
    gamma_rate: float = 1.0
    k_max: int = 10
    mutation_sd: float = 0.02
    mortality_mid: float = 240.0
    mortality_scale: float = 60.0
    belief_floor: float = 12.0
    sigma_form: str = "geometric"
    population_cap: int = 5000
    warm_start: bool = True
    workers: int = 0  # 0 = one worker per available core
    log_format: str = "csv"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def validate(self) -> None:
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if not self.strategies:
            raise ConfigError("strategies must not be empty")
        if len(set(self.strategies)) != len(self.strategies):
            raise ConfigError(f"strategies contains duplicates: {list(self.strategies)}")
        for token in self.strategies:
            try:
                StrategyKind.from_token(token)
            except Exception:
                valid = [k.token for k in StrategyKind]
                raise ConfigError(f"unknown strategy {token!r}; valid: {valid}") from None
        if self.societies < 1:
            raise ConfigError(f"societies must be >= 1, got {self.societies}")
        if self.generations < 1:
            raise ConfigError(f"generations must be >= 1, got {self.generations}")
        if self.initial_population < 2:
            raise ConfigError(f"initial_population must be >= 2, got {self.initial_population}")
        if not self.gamma_rate > 0.0:
            raise ConfigError(f"gamma_rate must be > 0, got {self.gamma_rate}")
        if self.k_max < 0:
            raise ConfigError(f"k_max must be >= 0, got {self.k_max}")
        if self.mutation_sd < 0.0:
            raise ConfigError(f"mutation_sd must be >= 0, got {self.mutation_sd}")
        if not self.mortality_scale > 0.0:
            raise ConfigError(f"mortality_scale must be > 0, got {self.mortality_scale}")
        if not self.belief_floor >= 0.0:
            raise ConfigError(f"belief_floor must be >= 0, got {self.belief_floor}")
        if self.sigma_form not in SIGMA_FORMS:
            raise ConfigError(
                f"sigma_form must be one of {SIGMA_FORMS}, got {self.sigma_form!r}"
            )
        if self.population_cap < self.initial_population:
            raise ConfigError(
                f"population_cap ({self.population_cap}) must be >= "
                f"initial_population ({self.initial_population})"
            )
        if self.workers < 0:
            raise ConfigError(f"workers must be >= 0 (0 = auto), got {self.workers}")
        if self.log_format not in LOG_FORMATS:
            raise ConfigError(f"log_format must be one of {LOG_FORMATS}, got {self.log_format!r}")
        self.optimizer.validate()

    def effective_strategies(self) -> tuple[str, ...]:
        """Strategies to actually run: the baseline is always included so the
        report's indices have a denominator."""
        if "0" in self.strategies:
            return self.strategies
        return ("0",) + self.strategies


_TOP_FIELDS = {f.name for f in fields(ExperimentConfig)}
_OPT_FIELDS = {f.name for f in fields(OptimizerConfig)}


def from_mapping(data: Mapping[str, Any], source: str = "config") -> ExperimentConfig:
    """Build a validated config from a JSON-shaped mapping."""
    if not isinstance(data, Mapping):
        raise ConfigError(f"{source}: expected a JSON object at the top level")
    unknown = sorted(set(data) - _TOP_FIELDS)
    if unknown:
        raise ConfigError(f"{source}: unknown keys {unknown}; valid keys: {sorted(_TOP_FIELDS)}")

    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key == "optimizer":
            if not isinstance(value, Mapping):
                raise ConfigError(f"optimizer: expected an object, got {value!r}")
            bad = sorted(set(value) - _OPT_FIELDS)
            if bad:
                raise ConfigError(
                    f"optimizer: unknown keys {bad}; valid keys: {sorted(_OPT_FIELDS)}"
                )
            opt_kwargs: dict[str, Any] = {}
            for opt_key, opt_value in value.items():
                if opt_key in ("max_iterations", "restarts", "block_size"):
                    opt_kwargs[opt_key] = _expect_int(opt_value, f"optimizer.{opt_key}")
                else:
                    opt_kwargs[opt_key] = _expect_float(opt_value, f"optimizer.{opt_key}")
            kwargs[key] = OptimizerConfig(**opt_kwargs)
        elif key == "strategies":
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"strategies: expected a list, got {value!r}")
            kwargs[key] = tuple(_expect_str(v, f"strategies[{i}]") for i, v in enumerate(value))
        elif key == "warm_start":
            kwargs[key] = _expect_bool(value, key)
        elif key in ("log_format", "sigma_form"):
            kwargs[key] = _expect_str(value, key)
        elif key in (
            "seed",
            "societies",
            "generations",
            "initial_population",
            "k_max",
            "population_cap",
            "workers",
        ):
            kwargs[key] = _expect_int(value, key)
        else:
            kwargs[key] = _expect_float(value, key)

    config = ExperimentConfig(**kwargs)
    config.validate()
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return from_mapping(data, source=str(path))


def to_mapping(config: ExperimentConfig) -> dict[str, Any]:
    """Plain-JSON form; from_mapping(to_mapping(c)) reproduces c exactly."""
    out: dict[str, Any] = {}
    for f in fields(ExperimentConfig):
        value = getattr(config, f.name)
        if f.name == "optimizer":
            out[f.name] = {g.name: getattr(value, g.name) for g in fields(OptimizerConfig)}
        elif f.name == "strategies":
            out[f.name] = list(value)
        else:
            out[f.name] = value
    return out


def merged(config: ExperimentConfig, overrides: Mapping[str, Any]) -> ExperimentConfig:
    """Apply flat overrides (CLI flags) on top of a config and revalidate."""
    data = to_mapping(config)
    for key, value in overrides.items():
        if value is None:
            continue
        data[key] = value
    return from_mapping(data, source="overrides")


# execution vehicle, not simulation input: two runs differing only in these
# fields produce identical results, so they share a digest
_DIGEST_EXEMPT = ("workers", "log_format")


def config_digest(config: ExperimentConfig) -> str:
    """sha256 over the canonical JSON form; identifies a run's simulation inputs."""
    mapping = to_mapping(config)
    for key in _DIGEST_EXEMPT:
        mapping.pop(key, None)
    canonical = json.dumps(mapping, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
