from typing import Dict, Any, Optional
import os
import json
import yaml
import jsonschema

from error_handler import ConfigurationError


class ScenarioConfigurationError(ConfigurationError):
    """Invalid or unknown STAP scenario definition"""
    pass


SCENARIO_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": [
        "sensors", "pulses", "f0_hz", "bandwidth_hz", "speed_mps",
        "spacing_m", "prf_hz", "cnr_db", "scr_db"
    ],
    "properties": {
        "sensors": {"type": "integer", "minimum": 1},
        "pulses": {"type": "integer", "minimum": 1},
        "f0_hz": {"type": "number", "exclusiveMinimum": 0},
        "bandwidth_hz": {"type": "number", "exclusiveMinimum": 0},
        "speed_mps": {"type": "number", "minimum": 0},
        "spacing_m": {"type": "number", "exclusiveMinimum": 0},
        "prf_hz": {"type": "number", "exclusiveMinimum": 0},
        "cnr_db": {"type": "number"},
        "scr_db": {"type": "number"},
        "description": {"type": "string"}
    },
    "additionalProperties": False
}


def validate_scenario_config(config: Dict[str, Any], name: str = "scenario"):
    """
    Validate one scenario definition

    Args:
        config (Dict[str, Any]): Scenario keys (sensors, pulses, f0_hz, ...)

    Raises:
        ScenarioConfigurationError: If configuration is invalid
    """
    try:
        jsonschema.validate(instance=config, schema=SCENARIO_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ScenarioConfigurationError(f"{name}: {e.message}")


# Predefined scenarios
SCENARIO_CONFIG: Dict[str, Dict[str, Any]] = {
    # Half-wavelength array, clutter ridge slope 2V/(d·f_r) = 1
    "desk": {
        "description": "Desk-scale side-looking array, S=4 sensors, M=16 pulses, d/λ = 0.5",
        "sensors": 4,
        "pulses": 16,
        "f0_hz": 10.0e9,
        "bandwidth_hz": 5.0e6,
        "speed_mps": 7.5,
        "spacing_m": 0.015,
        "prf_hz": 1000.0,
        "cnr_db": 20.0,
        "scr_db": -5.0
    },
    # Recorded-data geometry: d/λ = 10, strongly aliased in angle
    "recorded": {
        "description": "Recorded-data geometry, S=4 sensors, M=64 pulses, d = 0.3 m",
        "sensors": 4,
        "pulses": 64,
        "f0_hz": 10.0e9,
        "bandwidth_hz": 5.0e6,
        "speed_mps": 100.0,
        "spacing_m": 0.3,
        "prf_hz": 1000.0,
        "cnr_db": 20.0,
        "scr_db": -5.0
    }
}

# Range-cell protocol of the recorded-data experiments
RANGE_PROTOCOL: Dict[str, int] = {
    "n_range_cells": 408,
    "cell_under_test": 256,
    "guard_cells": 4
}


class ScenarioConfigManager:
    """
    Manage predefined and user-supplied STAP scenarios
    """

    @staticmethod
    def load_custom_config(path: Optional[str] = None) -> Dict[str, Any]:
        """
        Load custom scenario definitions from file

        The file maps scenario names to scenario definitions.

        Args:
            path (str, optional): Path to configuration file

        Returns:
            Dict[str, Any]: Loaded scenarios (empty if no file found)
        """
        if not path:
            possible_paths = [
                'scenarios.json',
                'scenarios.yaml',
                'scenarios.yml',
                os.path.join(os.getcwd(), 'config', 'scenarios.yaml')
            ]

            for possible_path in possible_paths:
                if os.path.exists(possible_path):
                    path = possible_path
                    break

        if not path or not os.path.exists(path):
            return {}

        if path.endswith('.json'):
            with open(path, 'r') as f:
                config = json.load(f)
        elif path.endswith(('.yaml', '.yml')):
            with open(path, 'r') as f:
                config = yaml.safe_load(f)
        else:
            raise ScenarioConfigurationError(f"Unsupported configuration file type: {path}")

        if not isinstance(config, dict):
            raise ScenarioConfigurationError(f"{path}: expected a mapping of scenario names")
        for name, scenario in config.items():
            validate_scenario_config(scenario, name=f"{path}: {name}")

        return config

    @staticmethod
    def get_scenario(name: str, path: Optional[str] = None) -> Dict[str, Any]:
        """
        Get a scenario definition by name

        Custom definitions (from ``path`` or the default locations) take
        precedence over the predefined ones.

        Args:
            name (str): Scenario name

        Returns:
            Dict[str, Any]: Scenario keys

        Raises:
            ScenarioConfigurationError: If scenario not found
        """
        custom = ScenarioConfigManager.load_custom_config(path)
        scenario = custom.get(name) or SCENARIO_CONFIG.get(name)
        if not scenario:
            raise ScenarioConfigurationError(f"Scenario not found: {name}")
        return dict(scenario)

    @staticmethod
    def resolve(reference: Any) -> Dict[str, Any]:
        """
        Resolve a scenario reference: a preset name or an inline definition

        Args:
            reference (str | dict): Scenario name or scenario keys

        Returns:
            Dict[str, Any]: Validated scenario keys
        """
        if isinstance(reference, str):
            return ScenarioConfigManager.get_scenario(reference)
        if isinstance(reference, dict):
            base = {}
            if 'preset' in reference:
                base = ScenarioConfigManager.get_scenario(reference['preset'])
            merged = {**base, **{k: v for k, v in reference.items() if k != 'preset'}}
            validate_scenario_config(merged)
            return merged
        raise ScenarioConfigurationError(f"Invalid scenario reference: {reference!r}")
