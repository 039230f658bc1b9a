from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from liouville_scattering.cli import (
    ANGULAR_HEADER,
    POLES_HEADER,
    SCATTER_HEADER,
    build_arg_parser,
    main,
    parse_mu_path,
)
from liouville_scattering.config import ConfigError
from liouville_scattering.const import ENV_THREADS


def _read_csv(path):
    with path.open(newline="") as handle:
        return list(csv.reader(handle))


class TestMuPath:
    def test_real_axis(self):
        np.testing.assert_allclose(parse_mu_path("1:3:3"), [1, 2, 3])

    def test_imaginary_axis(self):
        np.testing.assert_allclose(parse_mu_path("0.5:1.5:2:imag"), [0.5j, 1.5j])

    @pytest.mark.parametrize("text", ["1:2", "1:2:1", "a:2:3", "1:2:3:diag"])
    def test_rejected(self, text):
        with pytest.raises(ConfigError):
            parse_mu_path(text)


class TestParser:
    def test_common_options(self, config_dir):
        args = build_arg_parser().parse_args(
            ["scatter", "--config", str(config_dir / "hyperbolic_bump.toml"), "--lambda", "2", "--channels", "5", "--check"]
        )
        assert args.lam == 2.0
        assert args.channels == 5
        assert args.check

    def test_compare_defaults(self):
        args = build_arg_parser().parse_args(["compare", "other.toml"])
        assert args.quantity == "M"
        assert args.compare_tol == pytest.approx(1e-6)

    def test_threads_help_names_precedence(self, capsys):
        with pytest.raises(SystemExit):
            main(["verify", "--help"])
        help_text = capsys.readouterr().out
        assert ENV_THREADS in help_text
        assert "[run]" in help_text


class TestCommands:
    def test_validate_default(self, config_dir, tmp_path):
        assert main(["validate", "--config", str(config_dir / "hyperbolic_bump.toml"), "--out", str(tmp_path)]) == 0
        assert json.loads((tmp_path / "validate.json").read_text())["passed"]

    def test_validate_missing_b(self, config_dir, tmp_path):
        assert main(["validate", "--config", str(config_dir / "missing_b.toml"), "--out", str(tmp_path)]) == 2

    def test_validate_aperiodic(self, config_dir, tmp_path):
        assert main(["validate", "--config", str(config_dir / "aperiodic_b.toml"), "--out", str(tmp_path)]) == 1
        assert not json.loads((tmp_path / "validate.json").read_text())["periodic"]

    def test_missing_config(self):
        assert main(["angular"]) == 2

    def test_angular_csv(self, config_dir, tmp_path):
        code = main(["angular", "--config", str(config_dir / "hyperbolic_bump.toml"), "--out", str(tmp_path), "--channels", "8"])
        assert code == 0
        rows = _read_csv(tmp_path / "angular.csv")
        assert rows[0] == ANGULAR_HEADER
        assert len(rows) == 9
        assert [int(row[0]) for row in rows[1:]] == list(range(8))

    def test_scatter_with_check(self, config_dir, tmp_path):
        code = main(
            [
                "scatter",
                "--config",
                str(config_dir / "hyperbolic_bump.toml"),
                "--out",
                str(tmp_path),
                "--channels",
                "6",
                "--check",
                "--mu-path",
                "1:4:4",
            ]
        )
        assert code == 0
        rows = _read_csv(tmp_path / "scatter.csv")
        assert rows[0] == SCATTER_HEADER
        assert len(rows) == 7
        payload = json.loads((tmp_path / "scatter.json").read_text())
        assert payload["check"]["unitarity"]["passed"]
        assert len(_read_csv(tmp_path / "mu_path.csv")) == 5

    def test_compare_gauge_pair(self, config_dir, tmp_path):
        code = main(
            [
                "compare",
                str(config_dir / "hyperbolic_bump_gauge.toml"),
                "--config",
                str(config_dir / "hyperbolic_bump.toml"),
                "--out",
                str(tmp_path),
                "--channels",
                "8",
            ]
        )
        assert code == 0
        report = json.loads((tmp_path / "compare.json").read_text())
        assert report["verdict"] == "indistinguishable"
        assert report["recovered_shift"] == pytest.approx(-2.5, abs=1e-8)

    def test_compare_perturbed(self, config_dir, tmp_path):
        code = main(
            [
                "compare",
                str(config_dir / "hyperbolic_bump_perturbed.toml"),
                "--config",
                str(config_dir / "hyperbolic_bump.toml"),
                "--out",
                str(tmp_path),
                "--channels",
                "8",
                "--quantity",
                "Delta",
            ]
        )
        assert code == 0
        assert json.loads((tmp_path / "compare.json").read_text())["verdict"] == "distinguished"

    @pytest.mark.slow
    def test_poles(self, config_dir, tmp_path):
        assert main(["poles", "--config", str(config_dir / "hyperbolic_bump.toml"), "--out", str(tmp_path)]) == 0
        rows = _read_csv(tmp_path / "poles.csv")
        assert rows[0] == POLES_HEADER
        assert len(rows) >= 16
        assert all(int(row[4]) == 1 for row in rows[1:])

    @pytest.mark.slow
    def test_verify_shipped_config(self, config_dir, tmp_path):
        code = main(
            ["verify", "--config", str(config_dir / "hyperbolic_bump.toml"), "--out", str(tmp_path), "--threads", "4"]
        )
        payload = json.loads((tmp_path / "verify.json").read_text())
        failed = [check["name"] for check in payload["checks"] if not check["passed"]]
        assert code == 0, failed
        assert payload["passed"]
        names = {check["name"] for check in payload["checks"]}
        assert names >= {
            "bessel_oracle",
            "angular_free",
            "fss_normalization",
            "m_monotone",
            "pole_real_trend",
            "perturbed_pair",
            "gauge_equivalence",
        }
