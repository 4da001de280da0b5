import json
import logging

import pytest
from click.testing import CliRunner

from houseprice.dataset.loader import load_listings
from houseprice.main import cli
from houseprice.models.persistence import load_model
from houseprice.models.tree import DecisionTree


@pytest.fixture(autouse=True)
def _drop_cli_log_handlers():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if type(handler) is logging.StreamHandler:
            root.removeHandler(handler)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def run_config(tmp_path):
    grids = tmp_path / "grids.yaml"
    grids.write_text("linear:\n  - {}\ntree:\n  - {max_depth: 3}\n  - {max_depth: 5}\n")
    config = tmp_path / "run.yaml"
    config.write_text(
        f"grids_path: {grids}\nfamilies: [linear, tree]\nfolds: 3\nexplain_rows: 3\nbackground_size: 8\n"
    )
    return config


def _invoke(runner, out, *args, config=None):
    options = ["--out", str(out)] + (["--config", str(config)] if config else [])
    return runner.invoke(cli, options + list(args))


def test_parse_command(runner, tmp_path, fixtures_dir):
    out = tmp_path / "out"
    result = _invoke(runner, out, "parse", str(fixtures_dir / "html"))

    assert result.exit_code == 0, result.output
    table = load_listings(out / "listings.csv")
    assert [r.city for r in table.records] == ["Fairfax", "Vienna"]
    report = json.loads((out / "parse_report.json").read_text())
    assert report["listings"] == 2
    assert len(report["links"]) == 2
    assert report["missing_fields"] == {"basement": 1, "basement_description": 1, "basement_sqft": 1}

    manifest = json.loads((out / "manifest_parse.json").read_text())
    assert manifest["command"] == "parse"
    assert len(manifest["inputs"]) == 3


def test_parse_empty_directory(runner, tmp_path):
    (tmp_path / "html").mkdir()
    out = tmp_path / "out"
    result = _invoke(runner, out, "parse", str(tmp_path / "html"))
    assert result.exit_code == 0
    header = (out / "listings.csv").read_text().splitlines()
    assert len(header) == 1


def test_parse_bad_page(runner, tmp_path):
    html = tmp_path / "html"
    html.mkdir()
    (html / "page.html").write_text("<html><body>not a listing</body></html>")
    result = _invoke(runner, tmp_path / "out", "parse", str(html))
    assert result.exit_code == 1
    assert result.stderr.startswith("error=PARSE_ERROR")
    assert "page.html" in result.stderr


def test_clean_command(runner, tmp_path, listings_csv):
    out = tmp_path / "out"
    result = _invoke(runner, out, "clean", str(listings_csv))

    assert result.exit_code == 0, result.output
    assert (out / "cleaned_2019.csv").is_file()
    assert (out / "cleaned_2021-22.csv").is_file()
    assert not (out / "cleaned_2018.csv").exists()
    report = json.loads((out / "clean_report.json").read_text())
    assert report["rows"] == 7
    assert [r["index"] for r in report["load_rejections"]] == [5]
    assert [r["index"] for r in report["validation_rejections"]] == [3, 5]
    assert report["outside_year_range"] == 1
    assert report["bucket_rows"] == {"2019": 1, "2021-22": 2}


def test_stats_command(runner, tmp_path, synthetic_csv):
    out = tmp_path / "out"
    result = _invoke(runner, out, "stats", str(synthetic_csv))

    assert result.exit_code == 0, result.output
    stats = (out / "stats.csv").read_text().splitlines()
    assert stats[0] == "attribute,2019,2021-22"
    assert stats[-1] == "Listings,30,30"
    corr = (out / "corr.csv").read_text().splitlines()
    assert len(corr) == 25


def test_train_command(runner, tmp_path, synthetic_csv, run_config):
    out = tmp_path / "out"
    result = _invoke(runner, out, "train", str(synthetic_csv), "--model", "tree", config=run_config)

    assert result.exit_code == 0, result.output
    model = load_model(out / "models" / "tree_2019.json")
    assert isinstance(model, DecisionTree)
    assert model.n_features == 23
    manifest = json.loads((out / "manifest_train.json").read_text())
    assert set(manifest["settings"]["chosen_params"]) == {"tree/2019", "tree/2021-22"}


def test_train_unknown_family(runner, tmp_path, synthetic_csv):
    result = _invoke(runner, tmp_path / "out", "train", str(synthetic_csv), "--model", "knn")
    assert result.exit_code == 1
    assert result.stderr.startswith("error=PARAMETER_ERROR")
    assert "knn" in result.stderr


def test_evaluate_is_reproducible(runner, tmp_path, synthetic_csv, run_config):
    out = tmp_path / "out"
    first = _invoke(runner, out, "--seed", "3", "evaluate", str(synthetic_csv), config=run_config)
    assert first.exit_code == 0, first.output
    results = (out / "results.csv").read_bytes()
    digest = json.loads((out / "manifest_evaluate.json").read_text())["digest"]

    second = _invoke(runner, out, "--seed", "3", "evaluate", str(synthetic_csv), config=run_config)
    assert second.exit_code == 0
    assert (out / "results.csv").read_bytes() == results
    manifest = json.loads((out / "manifest_evaluate.json").read_text())
    assert manifest["digest"] == digest
    assert manifest["seed"] == 3
    assert manifest["settings"]["grids"]["tree"] == [
        {"cv_threshold": 0.1, "max_depth": 3, "min_samples_leaf": 5},
        {"cv_threshold": 0.1, "max_depth": 5, "min_samples_leaf": 5},
    ]

    lines = results.decode().splitlines()
    assert lines[0] == "model,bucket,RMSE,MAE,R-square,cv_RMSE,n_train,n_test"
    assert [line.split(",")[:2] for line in lines[1:]] == [
        ["linear", "2019"],
        ["tree", "2019"],
        ["linear", "2021-22"],
        ["tree", "2021-22"],
    ]


def test_full_pipeline_report(runner, tmp_path, synthetic_csv, run_config):
    out = tmp_path / "out"
    for args in (["stats", str(synthetic_csv)], ["evaluate", str(synthetic_csv)]):
        assert _invoke(runner, out, *args, config=run_config).exit_code == 0
    explained = _invoke(runner, out, "explain", str(synthetic_csv), "--model", "tree", config=run_config)
    assert explained.exit_code == 0, explained.output

    shap_lines = (out / "shap.csv").read_text().splitlines()
    assert shap_lines[0] == "bucket,row,feature,value,phi"
    assert len(shap_lines) == 1 + 2 * 3 * 23

    result = _invoke(
        runner,
        out,
        "report",
        "--results", str(out / "results.csv"),
        "--corr", str(out / "corr.csv"),
        "--shap", str(out / "shap.csv"),
        "--stats", str(out / "stats.csv"),
    )
    assert result.exit_code == 0, result.output
    assert (out / "report" / "heatmap.svg").is_file()
    assert (out / "report" / "beeswarm_2019.svg").is_file()
    assert (out / "report" / "beeswarm_2021-22.svg").is_file()
    summary = (out / "report" / "summary.txt").read_text()
    assert "Mean price by year" in summary
    assert "Most important features" in summary


def test_missing_column_is_schema_error(runner, tmp_path):
    path = tmp_path / "listings.csv"
    path.write_text("price,city\n1,Fairfax\n")
    result = _invoke(runner, tmp_path / "out", "clean", str(path))
    assert result.exit_code == 1
    assert result.stderr.startswith("error=SCHEMA_ERROR")


def test_bad_config_is_config_error(runner, tmp_path, listings_csv):
    config = tmp_path / "run.yaml"
    config.write_text("folds: 1\n")
    result = _invoke(runner, tmp_path / "out", "clean", str(listings_csv), config=config)
    assert result.exit_code == 1
    assert result.stderr.startswith("error=CONFIG_ERROR")


def test_missing_grids_file_fails_before_work(runner, tmp_path, listings_csv):
    config = tmp_path / "run.yaml"
    config.write_text(f"grids_path: {tmp_path / 'absent.yaml'}\n")
    out = tmp_path / "out"
    result = _invoke(runner, out, "clean", str(listings_csv), config=config)
    assert result.exit_code == 1
    assert "error=CONFIG_ERROR" in result.stderr
    assert not out.exists()
