import copy
import os
import re
import yaml
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from core.errors import ConfigError

DEFAULT_CONFIG = {
    "semantics": {
        "state_bound": 100000
    },
    "fuzz": {
        "count": 100,
        "size": 8,
        "seed": 0,
        "alphabet": ["a", "b", "c"],
        "workers": 1
    },
    "output": {
        "format": "text"
    },
    "logging": {
        "verbose": False
    }
}

STATE_BOUND_ENV = "CLL_STATE_BOUND"
CONFIG_PATH_ENV = "CLL_CONFIG"

_ACTION_NAME = re.compile(r"[a-z][a-zA-Z0-9_]*")
_RESERVED = {"tau", "bot"}


class ConfigManager:
    """Handles loading of workbench configuration from config.yml."""
    def __init__(self, config_path: Path):
        self.config_path = config_path
        self.config = self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """Loads configuration from YAML file and applies environment overrides."""
        config = copy.deepcopy(DEFAULT_CONFIG)
        if self.config_path.exists():
            with open(self.config_path, 'r') as f:
                try:
                    config_data = yaml.safe_load(f) or {}
                except yaml.YAMLError as e:
                    raise ConfigError(f"{self.config_path}: {e}") from None
            if not isinstance(config_data, dict):
                raise ConfigError(f"{self.config_path}: top level must be a mapping")
            # Recursively merge defaults
            config = self._merge_defaults(config, config_data)

        bound = os.environ.get(STATE_BOUND_ENV)
        if bound:
            # validated with the other settings by RunConfig
            config["semantics"]["state_bound"] = bound.strip()
        return config

    def _merge_defaults(self, default: Dict, user: Dict) -> Dict:
        """Recursively merges user config into defaults."""
        for key, value in default.items():
            if key not in user:
                user[key] = value
            elif isinstance(value, dict):
                if not isinstance(user[key], dict):
                    raise ConfigError(f"{self.config_path}: section {key!r} must be a mapping")
                user[key] = self._merge_defaults(value, user[key])
        return user

    def get(self, *keys: str, default: Any = None) -> Any:
        """Gets a nested configuration value."""
        val = self.config
        for key in keys:
            if isinstance(val, dict):
                val = val.get(key)
            else:
                return default
        return val if val is not None else default

    @classmethod
    def from_environment(cls, fallback: Path = Path("./config.yml")) -> "ConfigManager":
        return cls(Path(os.environ.get(CONFIG_PATH_ENV, fallback)))


class RunConfig(BaseModel):
    """Validated settings for one CLI invocation."""
    alphabet: List[str] = Field(default_factory=lambda: ["a", "b", "c"])
    state_bound: int = 100000
    fuzz_count: int = 100
    fuzz_size: int = 8
    fuzz_seed: int = 0
    fuzz_workers: int = 1
    output_format: Literal["text", "json", "dot"] = "text"
    verbose: bool = False

    @field_validator("state_bound", "fuzz_size", "fuzz_workers")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be at least 1")
        return value

    @field_validator("fuzz_count")
    @classmethod
    def _non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("must not be negative")
        return value

    @field_validator("alphabet")
    @classmethod
    def _valid_alphabet(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("alphabet must not be empty")
        for name in value:
            if not _ACTION_NAME.fullmatch(name) or name in _RESERVED:
                raise ValueError(f"invalid action name: {name!r}")
        return sorted(set(value))

    @classmethod
    def from_manager(cls, config: ConfigManager, **overrides: Optional[Any]) -> "RunConfig":
        values = {
            "alphabet": config.get("fuzz", "alphabet"),
            "state_bound": config.get("semantics", "state_bound"),
            "fuzz_count": config.get("fuzz", "count"),
            "fuzz_size": config.get("fuzz", "size"),
            "fuzz_seed": config.get("fuzz", "seed"),
            "fuzz_workers": config.get("fuzz", "workers"),
            "output_format": config.get("output", "format"),
            "verbose": config.get("logging", "verbose"),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls.model_validate(values)
