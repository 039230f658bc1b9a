from __future__ import annotations

from pathlib import Path

import pytest

from liouville_scattering.config import (
    ConfigError,
    apply_overrides,
    load_config,
    resolve_threads,
    run_config_from_mapping,
)
from liouville_scattering.const import ENV_THREADS


def _document(**run):
    return {"metric": {"A": 1.0, "B": 6.0}, "run": run}


class TestLoadConfig:
    def test_shipped_default(self, config_dir):
        config = load_config(config_dir / "hyperbolic_bump.toml")
        assert config.metric.family == "hyperbolic_bump"
        assert config.metric.params["height"] == 1.0
        assert config.lam == 1.0
        assert config.n_channels == 30
        assert config.pole_count == 15
        assert config.output_dir == Path("out/hyperbolic_bump")

    def test_missing_b_names_field(self, config_dir):
        with pytest.raises(ConfigError, match=r"\['B'\]"):
            load_config(config_dir / "missing_b.toml")

    def test_unreadable(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.toml")

    def test_invalid_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("[metric\nA = 1\n")
        with pytest.raises(ConfigError, match="invalid TOML"):
            load_config(path)


class TestMapping:
    def test_defaults(self):
        config = run_config_from_mapping(_document())
        assert config.C10 == 1.0
        assert config.tolerances.unitarity == 1e-6
        assert config.metric.validate is True

    def test_complex_constants(self):
        config = run_config_from_mapping(_document(C10=[1.0, 2.0], C11=0.5))
        assert config.C10 == 1 + 2j
        assert config.C11 == 0.5

    @pytest.mark.parametrize("run", [{"lambda": 0.0}, {"n_channels": 0}, {"C10": 0.0}, {"C11": [1.0]}])
    def test_rejected_run_values(self, run):
        with pytest.raises(ConfigError):
            run_config_from_mapping(_document(**run))

    def test_unknown_family(self):
        with pytest.raises(ConfigError):
            run_config_from_mapping({"metric": {"family": "torus", "A": 1.0, "B": 1.0}})

    def test_negative_tolerance(self):
        with pytest.raises(ConfigError):
            run_config_from_mapping({**_document(), "tolerances": {"ode": -1.0}})

    def test_list_parameters(self):
        document = _document()
        document["metric"]["params"] = {"radial_nodes": [0.1, 0.2], "beta": 1}
        config = run_config_from_mapping(document)
        assert config.metric.params == {"radial_nodes": [0.1, 0.2], "beta": 1.0}


class TestOverrides:
    def test_flags_win(self, default_run):
        config = apply_overrides(default_run, lam=2.0, n_channels=5, tol=1e-10, out="elsewhere")
        assert config.lam == 2.0
        assert config.n_channels == 5
        assert config.tolerances.picard == 1e-10
        assert config.tolerances.ode == 1e-10
        assert config.output_dir == Path("elsewhere")

    def test_no_flags_keeps_config(self, default_run):
        assert apply_overrides(default_run) is default_run

    @pytest.mark.parametrize("kwargs", [{"lam": 0.0}, {"n_channels": 0}, {"tol": 0.0}])
    def test_invalid_flags(self, default_run, kwargs):
        with pytest.raises(ConfigError):
            apply_overrides(default_run, **kwargs)


class TestThreads:
    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv(ENV_THREADS, "8")
        assert resolve_threads(2) == 2

    def test_environment(self, monkeypatch):
        monkeypatch.setenv(ENV_THREADS, "4")
        assert resolve_threads() == 4

    def test_default(self, monkeypatch):
        monkeypatch.delenv(ENV_THREADS, raising=False)
        assert resolve_threads() == 1

    def test_bad_environment(self, monkeypatch):
        monkeypatch.setenv(ENV_THREADS, "many")
        with pytest.raises(ConfigError):
            resolve_threads()

    def test_flag_beats_file(self, monkeypatch):
        monkeypatch.delenv(ENV_THREADS, raising=False)
        assert resolve_threads(2, 6) == 2

    def test_environment_beats_file(self, monkeypatch):
        monkeypatch.setenv(ENV_THREADS, "4")
        assert resolve_threads(None, 6) == 4

    def test_file_beats_default(self, monkeypatch):
        monkeypatch.delenv(ENV_THREADS, raising=False)
        assert resolve_threads(None, 6) == 6

