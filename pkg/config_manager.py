import os
import json
from typing import Dict, Any, Optional
from dotenv import load_dotenv
import yaml
import jsonschema

from error_handler import ConfigurationError

EXPERIMENT_KINDS = ('nmse', 'convergence', 'likelihood-scan', 'stap-map', 'estimate')

_BETA_GRID = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "number", "minimum": 0, "maximum": 1}
}

_TEXTURE = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["inverse_gamma", "gamma", "deterministic"]},
        "shape": {"type": "number", "exclusiveMinimum": 0},
        "value": {"type": "number", "exclusiveMinimum": 0}
    },
    "required": ["kind"],
    "additionalProperties": False
}

_SAMPLING = {
    "type": "object",
    "properties": {
        "model": {"enum": ["gaussian", "sirv"]},
        "texture": _TEXTURE
    },
    "additionalProperties": False
}

# Keys shared by every experiment kind
_COMMON = {
    "kind": {"enum": list(EXPERIMENT_KINDS)},
    "description": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0},
    "threads": {"type": "integer", "minimum": 1},
    "output": {"type": "string"},
    "tol": {"type": "number", "exclusiveMinimum": 0},
    "max_iter": {"type": "integer", "minimum": 1}
}

_TOEPLITZ_RUN = {
    "m": {"type": "integer", "minimum": 1},
    "N": {"type": "integer", "minimum": 1},
    "rho": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "beta_grid": _BETA_GRID,
    "sampling": _SAMPLING
}

EXPERIMENT_SCHEMAS: Dict[str, Dict[str, Any]] = {
    "nmse": {
        "type": "object",
        "properties": {
            **_COMMON, **_TOEPLITZ_RUN,
            "trials": {"type": "integer", "minimum": 1},
            "nmse_metric": {"enum": ["relative", "squared"]}
        },
        "required": ["kind", "m", "N", "rho", "beta_grid"],
        "additionalProperties": False
    },
    "convergence": {
        "type": "object",
        "properties": {
            **_COMMON, **_TOEPLITZ_RUN,
            "trials": {"type": "integer", "minimum": 1}
        },
        "required": ["kind", "m", "N", "rho", "beta_grid"],
        "additionalProperties": False
    },
    "likelihood-scan": {
        "type": "object",
        "properties": {**_COMMON, **_TOEPLITZ_RUN},
        "required": ["kind", "m", "N", "rho", "beta_grid"],
        "additionalProperties": False
    },
    "stap-map": {
        "type": "object",
        "properties": {
            **_COMMON,
            "scenario": {"type": ["string", "object"]},
            "n_range_cells": {"type": "integer", "minimum": 1},
            "cut": {"type": "integer", "minimum": 0},
            "guard": {"type": "integer", "minimum": 0},
            "n_secondary": {"type": "integer", "minimum": 1},
            "keep_contaminated": {"type": "boolean"},
            "contaminated": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "n_patches": {"type": "integer", "minimum": 0},
            "texture": _TEXTURE,
            "targets": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "angle_deg": {"type": "number"},
                        "velocity_mps": {"type": "number"},
                        "cell": {"type": "integer", "minimum": 0},
                        "scr_db": {"type": "number"}
                    },
                    "required": ["angle_deg", "velocity_mps", "cell"],
                    "additionalProperties": False
                }
            },
            "estimators": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "properties": {
                        "tag": {"type": "string"},
                        "betas": _BETA_GRID
                    },
                    "required": ["tag"],
                    "additionalProperties": False
                }
            },
            "grid": {
                "type": "object",
                "properties": {
                    "angle_step_deg": {"type": "number", "exclusiveMinimum": 0},
                    "velocity_bins": {"type": "integer", "minimum": 2}
                },
                "additionalProperties": False
            }
        },
        "required": ["kind", "scenario", "n_range_cells", "cut", "estimators"],
        "additionalProperties": False
    },
    "estimate": {
        "type": "object",
        "properties": {
            **_COMMON,
            "samples": {"type": "string"},
            "estimator": {"type": "string"},
            "beta": {"type": "number", "minimum": 0, "maximum": 1}
        },
        "required": ["kind", "samples"],
        "additionalProperties": False
    }
}


def validate_experiment_config(config: Dict[str, Any]):
    """
    Validate an experiment mapping against the schema of its kind

    Args:
        config (Dict[str, Any]): Experiment keys, including 'kind'

    Raises:
        ConfigurationError: If the kind is unknown or a key is invalid
    """
    kind = config.get('kind')
    if kind not in EXPERIMENT_SCHEMAS:
        raise ConfigurationError(
            f"unknown experiment kind {kind!r}; expected one of {', '.join(EXPERIMENT_KINDS)}"
        )
    try:
        jsonschema.validate(instance=config, schema=EXPERIMENT_SCHEMAS[kind])
    except jsonschema.ValidationError as e:
        location = '.'.join(str(p) for p in e.absolute_path) or kind
        raise ConfigurationError(f"{location}: {e.message}")


class ConfigManager:
    """
    Experiment configuration management
    Supports loading from .env, JSON, YAML, and environment variables

    Environment variables (RSHRINK_SEED, RSHRINK_THREADS, RSHRINK_TOL,
    RSHRINK_MAX_ITER) provide defaults that the file overrides.
    """

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize ConfigManager

        Args:
            config_path (str, optional): Experiment file (YAML or JSON).
                                         Without it only environment defaults are loaded.
        """
        load_dotenv()
        self._config: Dict[str, Any] = self._load_env_config()
        if config_path:
            self.load_config(config_path)

    def load_config(self, path: str) -> Dict[str, Any]:
        """
        Load and validate an experiment file, layered over the environment defaults

        Args:
            path (str): Path to configuration file

        Returns:
            Dict[str, Any]: Merged configuration
        """
        loaded = self._load_config_file(path)
        merged = {**self._load_env_config(), **loaded}
        self._validate_config(merged)
        self._config = merged
        return merged

    def _load_config_file(self, path: str) -> Dict[str, Any]:
        """
        Load configuration from a specific file

        Args:
            path (str): Path to configuration file

        Returns:
            Dict[str, Any]: Loaded configuration
        """
        if not os.path.exists(path):
            raise ConfigurationError(f"configuration file not found: {path}")

        if path.endswith('.json'):
            with open(path, 'r') as f:
                config = json.load(f)
        elif path.endswith(('.yaml', '.yml')):
            with open(path, 'r') as f:
                config = yaml.safe_load(f)
        else:
            raise ConfigurationError(f"unsupported configuration file type: {path}")

        if not isinstance(config, dict):
            raise ConfigurationError(f"{path}: expected a mapping at top level")
        return config

    def _load_env_config(self) -> Dict[str, Any]:
        """
        Load configuration defaults from environment variables

        Returns:
            Dict[str, Any]: Only the variables that are set
        """
        readers = {
            'seed': ('RSHRINK_SEED', int),
            'threads': ('RSHRINK_THREADS', int),
            'tol': ('RSHRINK_TOL', float),
            'max_iter': ('RSHRINK_MAX_ITER', int),
        }
        config: Dict[str, Any] = {}
        for key, (variable, cast) in readers.items():
            raw = os.getenv(variable)
            if raw is None or raw == '':
                continue
            try:
                config[key] = cast(raw)
            except ValueError:
                raise ConfigurationError(f"{variable}={raw!r} is not a valid {cast.__name__}")
        return config

    def _validate_config(self, config: Dict[str, Any]):
        """
        Validate configuration against the schema of its experiment kind

        Args:
            config (Dict[str, Any]): Configuration to validate

        Raises:
            ConfigurationError: If configuration is invalid
        """
        validate_experiment_config(config)

    @property
    def kind(self) -> Optional[str]:
        return self._config.get('kind')

    def as_dict(self) -> Dict[str, Any]:
        return dict(self._config)

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value

        Args:
            key (str): Configuration key, dotted for nested access
            default (Any, optional): Default value if key not found

        Returns:
            Any: Configuration value
        """
        keys = key.split('.')
        value: Any = self._config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def update(self, updates: Dict[str, Any]):
        """
        Update configuration, ignoring None values (unset CLI options)

        Args:
            updates (Dict[str, Any]): Configuration updates
        """
        candidate = {**self._config, **{k: v for k, v in updates.items() if v is not None}}
        self._validate_config(candidate)
        self._config = candidate

    def save(self, path: Optional[str] = None):
        """
        Save current configuration

        Args:
            path (str, optional): Path to save configuration (.json or .yaml)
        """
        path = path or 'experiment.json'

        with open(path, 'w') as f:
            if path.endswith(('.yaml', '.yml')):
                yaml.safe_dump(self._config, f, sort_keys=False)
            else:
                json.dump(self._config, f, indent=4)
