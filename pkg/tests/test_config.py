import json

import pytest

from houseprice.artifacts.manifest import build_manifest, manifest_digest, write_manifest
from houseprice.config import load_run_config
from houseprice.errors import ConfigError
from houseprice.models.base_types import ModelFamily
from houseprice.types.types import YearBucket


def test_defaults():
    config = load_run_config()
    assert config.seed == 0
    assert config.test_fraction == 0.2
    assert config.folds == 5
    assert config.families == list(ModelFamily)
    assert config.buckets == list(YearBucket)


def test_yaml_then_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("seed: 4\nfolds: 3\nbuckets: ['2019', '2021-22']\nfamilies: [gbt]\n")
    config = load_run_config(path, seed=9, out_dir=None)

    assert config.seed == 9
    assert config.folds == 3
    assert config.buckets == [YearBucket.Y2019, YearBucket.Y2021_22]
    assert config.eval_config().families == [ModelFamily.GBT]


@pytest.mark.parametrize(
    "text",
    ["test_fraction: 1.5\n", "colour: blue\n", "- just a list\n", "folds: [\n", "families: [knn]\n"],
)
def test_invalid_config(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.yaml")


def test_check_paths(tmp_path):
    config = load_run_config(rules_path=tmp_path / "absent.yaml")
    with pytest.raises(ConfigError, match="rules_path"):
        config.check_paths()


def test_manifest_digest_ignores_timestamp(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text("a,b\n1,2\n")
    a = build_manifest("stats", 0, [data], [tmp_path / "stats.csv"], {"folds": 5})
    b = build_manifest("stats", 0, [data], [tmp_path / "stats.csv"], {"folds": 5})
    b["timestamp"] = "2000-01-01T00:00:00+00:00"

    assert manifest_digest(a) == manifest_digest(b) == a["digest"]
    assert len(a["inputs"][str(data)]) == 64


def test_manifest_changes_with_inputs(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text("a\n1\n")
    before = build_manifest("clean", 0, [data], [], {})
    data.write_text("a\n2\n")
    after = build_manifest("clean", 0, [data], [], {})
    assert before["digest"] != after["digest"]


def test_write_manifest(tmp_path):
    manifest = build_manifest("evaluate", 1, [], [], {"seed": 1})
    path = write_manifest(tmp_path, manifest)
    assert path.name == "manifest_evaluate.json"
    assert json.loads(path.read_text())["digest"] == manifest["digest"]
