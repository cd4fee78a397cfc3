"""Run configuration: defaults, flat JSON config files, CLI overrides."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .detection import EXTRACTIVE_MODES, Architecture, Strategy
from .gateway import CASSETTE_MODES, DEFAULT_MAX_TOKENS
from .text_metrics import ROUGE_VARIANTS


class ConfigError(Exception):
    """A configuration value is missing, out of range, or unrecognized."""


@dataclass
class RunConfig:
    model_name: str = "gpt-4"
    endpoint: str | None = None
    temperature: float | None = None
    max_tokens: int = DEFAULT_MAX_TOKENS
    parallelism: int = 4
    retries: int = 3
    backoff_base: float = 1.0
    architecture: str = Architecture.SIF.value
    strategy: str = Strategy.DOV_COT.value
    gate_threshold: float = 0.4
    rouge_variant: str = "f1"
    k1: float = 1.2
    b: float = 0.75
    pair_k: int = 3
    m: int = 5
    extractive_mode: str = "llm"
    templates_dir: str | None = None
    cassette: str | None = None
    cassette_mode: str = "replay"


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def load_config(path: str | Path) -> RunConfig:
    """Read a flat JSON object into a RunConfig; unknown keys are errors."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = sorted(set(raw) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}")
    config = RunConfig(**raw)
    validate_config(config)
    return config


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Overlay non-None values (CLI flags beat config file beats defaults)."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    unknown = sorted(set(changes) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config overrides {unknown}")
    updated = dataclasses.replace(config, **changes)
    validate_config(updated)
    return updated


def validate_config(config: RunConfig) -> None:
    def check(condition: bool, message: str) -> None:
        if not condition:
            raise ConfigError(message)

    check(bool(config.model_name), "model_name must not be empty")
    check(config.temperature is None or config.temperature >= 0.0,
          f"temperature must be non-negative, got {config.temperature}")
    check(config.max_tokens >= 1, f"max_tokens must be positive, got {config.max_tokens}")
    check(config.parallelism >= 1, f"parallelism must be at least 1, got {config.parallelism}")
    check(config.retries >= 0, f"retries must be non-negative, got {config.retries}")
    check(config.backoff_base >= 0.0, f"backoff_base must be non-negative, got {config.backoff_base}")
    check(config.architecture in {a.value for a in Architecture},
          f"unknown architecture {config.architecture!r}")
    check(config.strategy in {s.value for s in Strategy},
          f"unknown strategy {config.strategy!r}")
    check(0.0 <= config.gate_threshold <= 1.0,
          f"gate_threshold must lie in [0, 1], got {config.gate_threshold}")
    check(config.rouge_variant in ROUGE_VARIANTS,
          f"unknown rouge_variant {config.rouge_variant!r}")
    check(config.k1 > 0.0, f"k1 must be positive, got {config.k1}")
    check(0.0 <= config.b <= 1.0, f"b must lie in [0, 1], got {config.b}")
    check(config.pair_k >= 1, f"pair_k must be at least 1, got {config.pair_k}")
    check(config.m >= 1, f"m must be at least 1, got {config.m}")
    check(config.extractive_mode in EXTRACTIVE_MODES,
          f"unknown extractive_mode {config.extractive_mode!r}")
    check(config.cassette_mode in CASSETTE_MODES,
          f"unknown cassette_mode {config.cassette_mode!r}")
    if config.templates_dir is not None:
        check(Path(config.templates_dir).is_dir(),
              f"templates_dir {config.templates_dir} is not a directory")
    if config.cassette is not None and config.cassette_mode == "replay":
        check(Path(config.cassette).exists(),
              f"cassette file {config.cassette} does not exist")


def config_to_dict(config: RunConfig) -> dict:
    return dataclasses.asdict(config)
