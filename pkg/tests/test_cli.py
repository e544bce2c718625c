import json
from pathlib import Path

import pytest

from app.commands import PipelineOverrides, build_pipeline_config, parse_rows, resolve_seed
from app.main import main
from domain.errors import ConfigError
from fixtures.synthetic import banknote_like, meta_path
from services.benchmark_service import TOGGLE_ROWS
from util.config_loader import load_config


def _instance_text() -> str:
    row = banknote_like(n_rows=160, seed=1).iloc[7]
    return ",".join(str(row[name]) for name in ("variance", "skew", "curtosis", "entropy"))


@pytest.fixture
def model_dir(tmp_path, config_file, banknote_csv, capsys) -> Path:
    target = tmp_path / "model"
    code = main([
        "--config", str(config_file), "train",
        "--data", str(banknote_csv), "--meta", str(meta_path("banknote")), "--model", str(target),
    ])
    assert code == 0
    capsys.readouterr()
    return target


class TestTrain:

    def test_writes_bundle_and_reports_f1(self, tmp_path, config_file, banknote_csv, capsys):
        target = tmp_path / "m"
        code = main([
            "--config", str(config_file), "train",
            "--data", str(banknote_csv), "--meta", str(meta_path("banknote")), "--model", str(target),
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "Model written to" in out
        assert "Holdout F1:" in out
        assert (target / "forest.json").exists()
        assert (target / "bundle.toml").exists()

    def test_full_has_no_holdout(self, tmp_path, config_file, banknote_csv, capsys):
        code = main([
            "--config", str(config_file), "train", "--full",
            "--data", str(banknote_csv), "--meta", str(meta_path("banknote")),
            "--model", str(tmp_path / "m"),
        ])
        assert code == 0
        assert "Holdout F1" not in capsys.readouterr().out

    def test_missing_data_is_data_error(self, tmp_path, config_file, capsys):
        code = main([
            "--config", str(config_file), "train",
            "--data", str(tmp_path / "none.csv"), "--meta", str(meta_path("banknote")),
            "--model", str(tmp_path / "m"),
        ])
        assert code == 3
        assert "data file not found" in capsys.readouterr().err


class TestExplain:

    def test_json_document(self, config_file, model_dir, capsys):
        code = main([
            "--config", str(config_file), "explain", "--model", str(model_dir), "--json",
            _instance_text(),
        ])
        assert code == 0
        document = json.loads(capsys.readouterr().out)
        assert document["class"] in ("genuine banknote", "fake banknote")
        assert document["votes"]["total"] == 15
        assert document["report"]["quorum"] == 8
        assert document["report"]["reduced_path_count"] >= 8
        assert isinstance(document["clamped"], list)

    def test_same_seed_same_output(self, config_file, model_dir, capsys):
        argv = [
            "--config", str(config_file), "--seed", "3", "explain",
            "--model", str(model_dir), "--json", _instance_text(),
        ]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first

    def test_text_output(self, config_file, model_dir, capsys):
        code = main([
            "--config", str(config_file), "explain", "--model", str(model_dir), _instance_text(),
        ])
        lines = capsys.readouterr().out.splitlines()
        assert code == 0
        assert lines[0].startswith("if ")
        assert " then " in lines[0]
        assert any(line.strip().startswith("paths ") for line in lines)

    def test_compare(self, config_file, model_dir, capsys):
        main([
            "--config", str(config_file), "explain", "--model", str(model_dir), "--compare",
            "--no-ar", "--no-cluster", _instance_text(),
        ])
        out = capsys.readouterr().out
        assert out.startswith("original: if ")
        assert "\nreduced:  if " in out

    def test_key_value_instance(self, config_file, model_dir, capsys):
        values = _instance_text().split(",")
        text = ",".join(
            f"{name}={value}"
            for name, value in zip(("variance", "skew", "curtosis", "entropy"), values)
        )
        assert main(["--config", str(config_file), "explain", "--model", str(model_dir), text]) == 0

    def test_bad_instance(self, config_file, model_dir, capsys):
        code = main(["--config", str(config_file), "explain", "--model", str(model_dir), "1,2"])
        assert code == 3
        assert "expected 4 values" in capsys.readouterr().err

    def test_missing_model(self, tmp_path, config_file, capsys):
        code = main([
            "--config", str(config_file), "explain", "--model", str(tmp_path / "none"), "1,2,3,4",
        ])
        assert code == 4

    def test_negative_hide_last(self, config_file, model_dir):
        code = main([
            "--config", str(config_file), "explain", "--model", str(model_dir),
            "--hide-last", "-1", _instance_text(),
        ])
        assert code == 2

    def test_invalid_min_support(self, config_file, model_dir):
        code = main([
            "--config", str(config_file), "explain", "--model", str(model_dir),
            "--min-support", "1.5", _instance_text(),
        ])
        assert code == 2

    @pytest.mark.parametrize("flag", ["--medoids", "--min-path-fraction"])
    def test_zero_override_means_default(self, config_file, model_dir, capsys, flag):
        code = main([
            "--config", str(config_file), "explain", "--model", str(model_dir), "--json",
            flag, "0", _instance_text(),
        ])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["report"]["quorum"] == 8

    def test_seed_after_subcommand(self, config_file, model_dir, capsys):
        base = ["--config", str(config_file)]
        tail = ["--model", str(model_dir), "--json", _instance_text()]
        assert main(base + ["explain", "--seed", "3"] + tail) == 0
        after = capsys.readouterr().out
        assert main(base + ["--seed", "3", "explain"] + tail) == 0
        assert capsys.readouterr().out == after


class TestBenchmark:

    def test_selected_rows_as_json(self, tmp_path, config_file, model_dir, banknote_csv, capsys):
        out_csv = tmp_path / "table.csv"
        code = main([
            "--config", str(config_file), "benchmark", "--model", str(model_dir),
            "--data", str(banknote_csv), "--rows", "AR,RS", "--workers", "1", "--json",
            "--out", str(out_csv),
        ])
        assert code == 0
        rows = json.loads(capsys.readouterr().out)
        assert [r["techniques"] for r in rows] == ["AR", "RS"]
        assert all(0.0 <= r["path_reduction_mean"] < 0.5 for r in rows)
        assert out_csv.exists()

    def test_unknown_row(self, config_file, model_dir, banknote_csv, capsys):
        code = main([
            "--config", str(config_file), "benchmark", "--model", str(model_dir),
            "--data", str(banknote_csv), "--rows", "AR,XY",
        ])
        assert code == 2
        assert "unknown technique row 'XY'" in capsys.readouterr().err

    def test_zero_workers(self, config_file, model_dir, banknote_csv):
        code = main([
            "--config", str(config_file), "benchmark", "--model", str(model_dir),
            "--data", str(banknote_csv), "--workers", "0",
        ])
        assert code == 2


class TestConfiguration:

    def test_missing_config(self, tmp_path, capsys):
        code = main(["--config", str(tmp_path / "none.toml"), "explain", "--model", "m", "1"])
        assert code == 2
        assert "Config file not found" in capsys.readouterr().err

    def test_missing_section(self, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text("[forest]\nn_estimators = 10\n", encoding="utf-8")
        with pytest.raises(ConfigError, match=r"\[pipeline\]"):
            load_config(path)

    def test_project_config_loads(self):
        config = load_config()
        assert config.forest.n_estimators == 100
        assert config.pipeline.medoids is None
        assert config.pipeline.min_path_fraction is None

    @pytest.mark.parametrize("line", ["hide_last = -1", "decimals = -2"])
    def test_negative_rule_settings(self, config_file, capsys, line):
        text = config_file.read_text(encoding="utf-8")
        key = line.split(" = ")[0]
        default = "hide_last = 0" if key == "hide_last" else "decimals = 2"
        config_file.write_text(text.replace(default, line), encoding="utf-8")
        with pytest.raises(ConfigError, match=f"rule.{key}"):
            load_config(config_file)
        code = main(["--config", str(config_file), "explain", "--model", "m", "1"])
        assert code == 2
        assert f"rule.{key} must be >= 0" in capsys.readouterr().err

    def test_negative_medoids_in_config(self, config_file):
        text = config_file.read_text(encoding="utf-8")
        config_file.write_text(text.replace("medoids = 0", "medoids = -3"), encoding="utf-8")
        with pytest.raises(ConfigError, match="medoids"):
            load_config(config_file)

    def test_log_dir_and_workers(self, config_file):
        config = load_config(config_file)
        assert config.logging.log_dir == config_file.parent / "logs"
        assert config.benchmark.workers == 1

    def test_no_subcommand(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2


class TestSeedAndOverrides:

    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv("LF_SEED", "7")
        assert resolve_seed(1, 3) == 1

    def test_environment_before_config(self, monkeypatch):
        monkeypatch.setenv("LF_SEED", "7")
        assert resolve_seed(None, 3) == 7

    def test_config_last(self):
        assert resolve_seed(None, 3) == 3

    def test_bad_environment_value(self, monkeypatch):
        monkeypatch.setenv("LF_SEED", "sieben")
        with pytest.raises(ConfigError, match="LF_SEED"):
            resolve_seed(None, 3)

    def test_overrides(self, config_file):
        settings = load_config(config_file).pipeline
        config = build_pipeline_config(
            settings, PipelineOverrides(no_clustering=True, min_support=0.3, medoids=4), seed=9
        )
        assert config.use_association_rules and not config.use_clustering
        assert config.min_support == 0.3
        assert config.n_medoids_override == 4
        assert config.seed == 9

    def test_zero_overrides_fall_back_to_config(self, config_file):
        settings = load_config(config_file).pipeline
        config = build_pipeline_config(
            settings, PipelineOverrides(medoids=0, min_path_fraction=0.0), seed=1
        )
        assert config.n_medoids_override is None
        assert config.min_path_fraction is None
        with pytest.raises(ConfigError):
            build_pipeline_config(settings, PipelineOverrides(medoids=-1), seed=1)

    def test_parse_rows(self):
        assert parse_rows(None) == TOGGLE_ROWS
        assert parse_rows("all") == TOGGLE_ROWS
        assert parse_rows("cl+rs, ar") == ((False, True, True), (True, False, False))
        with pytest.raises(ConfigError):
            parse_rows("AR+AR")
