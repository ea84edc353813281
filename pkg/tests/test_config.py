"""Tests for the engine configuration loader."""

import yaml

from gradedconn.config import THREADS_ENV, EngineConfig, get_project_root


class TestEngineConfig:
    """Test engine configuration."""

    def test_init_with_nonexistent_path_uses_defaults(self):
        """Test that nonexistent config path uses defaults."""
        config = EngineConfig("/nonexistent/path/config.yml")
        assert config.get_relative_tolerance() == 1e-8
        assert config.get_absolute_tolerance() == 1e-12
        assert config.get_max_expression_ops() == 20000
        assert config.get_default_count() == 20

    def test_init_with_none_path_reads_project_config(self):
        """The repository ships config.yml at its root."""
        config = EngineConfig(None)
        assert config.config_path == get_project_root() / "config.yml"
        assert "tolerance" in config.config

    def test_partial_file_keeps_other_defaults(self, tmp_path):
        """Test loading a file that sets only some keys."""
        config_file = tmp_path / "gconn.yml"
        with open(config_file, "w") as f:
            yaml.dump({"tolerance": {"relative": 1e-6}, "logging": {"level": "debug"}}, f)

        config = EngineConfig(config_file)
        assert config.get_relative_tolerance() == 1e-6
        assert config.get_absolute_tolerance() == 1e-12
        assert config.get_log_level() == "DEBUG"

    def test_load_invalid_yaml(self, tmp_path):
        """Test handling of invalid YAML."""
        config_file = tmp_path / "invalid.yml"
        config_file.write_text("tolerance: [unclosed")
        config = EngineConfig(config_file)
        assert config.get_relative_tolerance() == 1e-8

    def test_sampling_defaults(self, tmp_path):
        config_file = tmp_path / "gconn.yml"
        config_file.write_text("sampling:\n  default_count: 5\n  default_seed: 11\n")
        config = EngineConfig(config_file)
        assert config.get_default_count() == 5
        assert config.get_default_seed() == 11


class TestThreads:
    """GCONN_THREADS wins over the file, which wins over the CPU count."""

    def test_environment_wins(self, tmp_path, monkeypatch):
        config_file = tmp_path / "gconn.yml"
        config_file.write_text("limits:\n  threads: 3\n")
        monkeypatch.setenv(THREADS_ENV, "7")
        assert EngineConfig(config_file).get_threads() == 7

    def test_file_value(self, tmp_path, monkeypatch):
        config_file = tmp_path / "gconn.yml"
        config_file.write_text("limits:\n  threads: 3\n")
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert EngineConfig(config_file).get_threads() == 3

    def test_bad_environment_value_is_ignored(self, tmp_path, monkeypatch):
        config_file = tmp_path / "gconn.yml"
        config_file.write_text("limits:\n  threads: 2\n")
        monkeypatch.setenv(THREADS_ENV, "many")
        assert EngineConfig(config_file).get_threads() == 2

    def test_at_least_one(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "0")
        assert EngineConfig("/nonexistent.yml").get_threads() == 1
