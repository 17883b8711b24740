"""
Configuration Manager for the abelian Toda service.

Handles loading and validation of experiment configuration from YAML or JSON
files. Command-line overrides are applied on top of the file; environment
variables are never consulted.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from config_schema import ExperimentConfig

logger = logging.getLogger(__name__)


class ConfigManager:
    """
    Manages configuration for the experiment suites.

    Loads a YAML/JSON file once, exposes section accessors for the runner and
    validates the whole document against ExperimentConfig.
    """

    def __init__(self, config_file: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None):
        """
        Initialize the configuration manager.

        Args:
            config_file: Path to the configuration file. If None, uses default.
            overrides: Values for seed, depth or output_dir taking precedence over the file
        """
        if config_file is None:
            config_file = Path(__file__).parent / "config" / "default_config.yaml"

        self.config_file = Path(config_file)
        self.overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        self._config: Optional[Dict[str, Any]] = None
        self._validated: Optional[ExperimentConfig] = None

    def load_config(self) -> Dict[str, Any]:
        """
        Load configuration from file and apply overrides.

        Returns:
            Dictionary containing the configuration

        Raises:
            FileNotFoundError: If configuration file doesn't exist
            yaml.YAMLError: If configuration file is invalid YAML/JSON
            ValueError: If the document is not a mapping
        """
        if self._config is not None:
            return self._config

        if not self.config_file.exists():
            raise FileNotFoundError(f"Configuration file not found: {self.config_file}")

        with open(self.config_file, "r") as f:
            config = yaml.safe_load(f) or {}
        if not isinstance(config, dict):
            raise ValueError(f"Configuration root must be a mapping: {self.config_file}")

        if "seed" in self.overrides:
            config["seed"] = self.overrides["seed"]
        if "depth" in self.overrides:
            config.setdefault("numerics", {})["depth"] = self.overrides["depth"]
        if "output_dir" in self.overrides:
            config["output_dir"] = str(self.overrides["output_dir"])

        self._config = config
        logger.info(f"Configuration loaded from {self.config_file}")
        return self._config

    def get_numerics_config(self) -> Dict[str, Any]:
        """
        Get numerics configuration.

        Returns:
            Numerics configuration dictionary with defaults filled in
        """
        return self.validate_config().numerics.model_dump()

    def get_lattice_config(self) -> Dict[str, Any]:
        """Get the lattice half-periods as complex numbers."""
        return self.validate_config().lattice.model_dump()

    def get_tolerance_config(self) -> Dict[str, float]:
        return self.validate_config().tolerances.model_dump()

    def get_suite_config(self, name: str) -> Dict[str, Any]:
        """
        Get the section used by a named suite.

        Args:
            name: Config section name (secancy, rsdyn, trisecant, ...)

        Returns:
            Section dictionary, empty when the section is absent
        """
        section = getattr(self.validate_config(), name, None)
        if section is None:
            return {}
        return section.model_dump()

    def get_output_config(self) -> Dict[str, Any]:
        """Get the output directory and the seed recorded in every output."""
        config = self.validate_config()
        return {"output_dir": Path(config.output_dir), "seed": config.seed}

    def validate_config(self) -> ExperimentConfig:
        """
        Validate the loaded configuration.

        Returns:
            The validated ExperimentConfig

        Raises:
            pydantic.ValidationError: If a field is missing or invalid
        """
        if self._validated is not None:
            return self._validated

        self._validated = ExperimentConfig.model_validate(self.load_config())
        logger.info("Configuration validation passed")
        return self._validated
