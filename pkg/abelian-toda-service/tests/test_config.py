"""
Unit tests for the configuration manager and the experiment schema.
"""

import json

import pytest
import yaml
from pydantic import ValidationError

from config_manager import ConfigManager
from config_schema import ExperimentConfig


def write_yaml(path, data):
    with open(path, "w") as f:
        yaml.dump(data, f)
    return path


class TestConfigManager:
    """Test cases for ConfigManager."""

    def test_load_config_is_cached(self, config_manager):
        first = config_manager.load_config()
        assert first["seed"] == 7
        assert config_manager.load_config() is first

    def test_complex_pairs_parsed(self, config_manager):
        lattice = config_manager.get_lattice_config()
        assert lattice["omega1"] == 0.5
        assert lattice["omega2"] == 0.1 + 0.55j

    def test_numerics_defaults_filled(self, config_manager):
        numerics = config_manager.get_numerics_config()
        assert numerics["depth"] == 6
        assert numerics["t_nodes"] == 24
        assert numerics["theta_tolerance"] == 1e-14
        assert numerics["t_span"] == (0.0, 1.0)

    def test_suite_sections(self, config_manager):
        secancy = config_manager.get_suite_config("secancy")
        assert secancy["A"] == [0.23 + 0.11j]
        assert config_manager.get_suite_config("trisecant")["enabled"] is False
        assert config_manager.get_suite_config("nonexistent") == {}

    def test_tolerance_defaults(self, config_manager):
        tolerances = config_manager.get_tolerance_config()
        assert tolerances["identities"] == 1e-10
        assert tolerances["rs"] == 1e-6

    def test_overrides_win(self, sample_config, temp_dir):
        manager = ConfigManager(sample_config, {"seed": 11, "depth": 3, "output_dir": temp_dir / "out", "ignored": None})
        config = manager.validate_config()
        assert config.seed == 11
        assert config.numerics.depth == 3
        assert manager.get_output_config() == {"output_dir": temp_dir / "out", "seed": 11}

    def test_json_config(self, temp_dir, sample_config_data):
        path = temp_dir / "config.json"
        path.write_text(json.dumps(sample_config_data))
        assert ConfigManager(path).validate_config().seed == 7

    def test_missing_file(self, temp_dir):
        with pytest.raises(FileNotFoundError):
            ConfigManager(temp_dir / "absent.yaml").load_config()

    def test_root_must_be_mapping(self, temp_dir):
        path = temp_dir / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ValueError):
            ConfigManager(path).load_config()

    def test_default_config_is_valid(self):
        config = ConfigManager().validate_config()
        assert config.suite == "identities"
        assert config.riemann_entries == [[1j]]


class TestExperimentSchema:
    """Validation failures name the offending field."""

    @staticmethod
    def locations(error: ValidationError):
        return {".".join(str(part) for part in item["loc"]) for item in error.errors()}

    def test_missing_lattice(self, sample_config_data):
        del sample_config_data["lattice"]
        with pytest.raises(ValidationError) as info:
            ExperimentConfig.model_validate(sample_config_data)
        assert "lattice" in self.locations(info.value)

    def test_bad_pair(self, sample_config_data):
        sample_config_data["secancy"]["A"] = [[0.1, 0.2, 0.3]]
        with pytest.raises(ValidationError) as info:
            ExperimentConfig.model_validate(sample_config_data)
        assert "secancy.A.0" in self.locations(info.value)

    def test_tolerances_positive(self, sample_config_data):
        sample_config_data["tolerances"] = {"rs": 0.0}
        with pytest.raises(ValidationError) as info:
            ExperimentConfig.model_validate(sample_config_data)
        assert "tolerances.rs" in self.locations(info.value)

    def test_unknown_key_rejected(self, sample_config_data):
        sample_config_data["numerics"]["dpeth"] = 4
        with pytest.raises(ValidationError) as info:
            ExperimentConfig.model_validate(sample_config_data)
        assert "numerics.dpeth" in self.locations(info.value)

    def test_schema_version(self, sample_config_data):
        sample_config_data["schema_version"] = 2
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(sample_config_data)

    def test_negative_seed(self, sample_config_data):
        sample_config_data["seed"] = -1
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(sample_config_data)

    def test_unknown_suite(self, sample_config_data):
        sample_config_data["suite"] = "everything"
        with pytest.raises(ValidationError) as info:
            ExperimentConfig.model_validate(sample_config_data)
        assert "suite" in self.locations(info.value)

    def test_shift_without_A(self, sample_config_data):
        """A = 0 only makes sense together with V = 0."""
        sample_config_data["secancy"]["A"] = [[0.0, 0.0]]
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(sample_config_data)

    def test_particle_lengths(self, sample_config_data):
        sample_config_data["rsdyn"]["velocities"] = [[0.1, 0.0]]
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(sample_config_data)

    def test_riemann_matrix_matches_vectors(self, sample_config_data):
        sample_config_data["riemann_matrix"] = [[[0.0, 1.0], [0.1, 0.0]], [[0.1, 0.0], [0.0, 1.2]]]
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(sample_config_data)

    def test_orientation(self, sample_config_data):
        sample_config_data["lattice"]["omega2"] = [0.0, -0.5]
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(sample_config_data)

    def test_real_numbers_accepted(self, sample_config_data):
        sample_config_data["lattice"]["omega1"] = 0.5
        config = ExperimentConfig.model_validate(sample_config_data)
        assert config.lattice.omega1 == 0.5 + 0j
