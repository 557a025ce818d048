import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from itermix.cli import format_table, main
from itermix.config import load_config, parse_config
from itermix.data import Dataset, save_csv
from itermix.errors import InvalidConfig, MissingFile

SMALL = {
    "dataset": {"toy": {"majority_count": 120, "minority_count": 24, "seed": 1}},
    "methods": ["none", "smote", "mixann"],
    "classifiers": ["knn"],
    "env": {"T_max": 6},
    "agent": {"batch_size": 8},
    "train": {"episodes": 3, "seeds": [0, 1], "rollouts": 2},
    "grid_size": 20,
}


def write_config(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def run(tmp_path, verb, cfg, out="out", extra=()):
    path = write_config(tmp_path, cfg)
    code = main([verb, "--config", str(path), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


@pytest.fixture(scope="module")
def schema():
    return json.loads(resources.files("itermix").joinpath("schemas/report.schema.json").read_text())


class TestBenchmark:
    def test_rows_and_schema(self, tmp_path, schema):
        code, out = run(tmp_path, "benchmark", SMALL)
        assert code == 0
        doc = json.loads((out / "report.json").read_text())
        jsonschema.validate(doc, schema)
        assert [r["method"] for r in doc["rows"]] == ["none", "smote", "mixann"]
        assert all(len(r["per_seed"]) == 2 for r in doc["rows"])
        table = (out / "report.txt").read_text().splitlines()
        assert len(table) == 2 + 3 and table[0].split()[:4] == ["method", "knn:P", "knn:R", "knn:F1"]

    def test_byte_identical_rerun(self, tmp_path):
        _, a = run(tmp_path, "benchmark", SMALL, "a")
        _, b = run(tmp_path, "benchmark", SMALL, "b", ["--jobs", "2"])
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()

    def test_seed_offset(self, tmp_path):
        _, out = run(tmp_path, "benchmark", {**SMALL, "methods": ["none"]}, extra=["--seed-offset", "10"])
        doc = json.loads((out / "report.json").read_text())
        assert [r["seed"] for r in doc["rows"][0]["per_seed"]] == [10, 11]
        assert doc["config"]["train"]["seeds"] == [10, 11]

    def test_two_classifiers(self, tmp_path, schema):
        cfg = {**SMALL, "methods": ["none", "adasyn"], "classifiers": ["knn", "mlp"],
               "classifier": {"mlp_layers": [8], "mlp_epochs_initial": 5}}
        _, out = run(tmp_path, "benchmark", cfg)
        doc = json.loads((out / "report.json").read_text())
        jsonschema.validate(doc, schema)
        assert len(doc["rows"]) == 4
        assert (out / "report.txt").read_text().splitlines()[0].split()[-1] == "mlp:F1"

    def test_trace(self, tmp_path):
        _, out = run(tmp_path, "benchmark", {**SMALL, "methods": ["mixann"], "trace": True})
        lines = (out / "trace.jsonl").read_text().splitlines()
        recs = [json.loads(x) for x in lines]
        assert recs and {r["seed"] for r in recs} == {0, 1}
        assert all(1 <= r["action"]["k"] <= 10 for r in recs)


class TestBadConfig:
    @pytest.mark.parametrize("patch,key", [
        ({"env": {"K": 0}}, "env.K"),
        ({"env": {"lambda": -2}}, "env.lambda"),
        ({"agent": {"gamma": 1.5}}, "agent.gamma"),
        ({"train": {"episodes": 0}}, "train.episodes"),
        ({"train": {"bogus": 1}}, "train.bogus"),
        ({"split": {"test_fraction": 1.0}}, "split.test_fraction"),
        ({"methods": ["smote", "svmsmote"]}, "methods"),
        ({"classifiers": ["xgboost"]}, "classifiers"),
        ({"colour": "blue"}, "colour"),
        ({"grid_size": 1}, "grid_size"),
        ({"dataset": {"toy": {"minority_count": 0}}}, "dataset.toy.minority_count"),
    ])
    def test_names_offending_key(self, tmp_path, capsys, patch, key):
        code, _ = run(tmp_path, "benchmark", {**SMALL, **patch})
        assert code == 1
        assert key in capsys.readouterr().err

    def test_missing_required(self):
        with pytest.raises(InvalidConfig, match="methods"):
            parse_config({"dataset": {"toy": {}}})

    def test_wrong_type(self):
        with pytest.raises(InvalidConfig, match="env.T_max"):
            parse_config({**SMALL, "env": {"T_max": 2.5}})

    def test_missing_file(self, tmp_path, capsys):
        with pytest.raises(MissingFile):
            load_config(tmp_path / "nope.json")
        assert main(["benchmark", "--config", str(tmp_path / "nope.json")]) == 1

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert main(["benchmark", "--config", str(p)]) == 1

    def test_csv_dataset_relative_to_config(self, tmp_path):
        rng = np.random.default_rng(0)
        save_csv(Dataset(rng.normal(size=(60, 3)), np.r_[np.zeros(48, int), np.ones(12, int)]),
                 tmp_path / "d.csv")
        code, out = run(tmp_path, "benchmark", {**SMALL, "methods": ["none"], "dataset": {"csv": "d.csv"}})
        assert code == 0
        assert json.loads((out / "report.json").read_text())["config"]["dataset"] == {"csv": "d.csv"}


class TestSweep:
    def test_k_values(self, tmp_path, schema):
        code, out = run(tmp_path, "sweep", {**SMALL, "methods": ["mixann"]},
                        extra=["--param", "K", "--values", "5", "10", "15", "20", "25"])
        assert code == 0
        sweep = json.loads((out / "sweep.json").read_text())
        assert sweep["parameter"] == "K" and sweep["values"] == [5, 10, 15, 20, 25]
        assert set(sweep["results"]) == {"5", "10", "15", "20", "25"}
        jsonschema.validate(json.loads((out / "report.json").read_text()), schema)

    def test_eta_values(self, tmp_path):
        code, out = run(tmp_path, "sweep", {**SMALL, "methods": ["mixboost"]},
                        extra=["--param", "eta", "--values", "0.1", "0.3", "0.5"])
        assert code == 0
        assert len(json.loads((out / "sweep.json").read_text())["results"]) == 3

    @pytest.mark.parametrize("values", [[], ["0"], ["abc"], ["5", "5"]])
    def test_bad_values(self, tmp_path, values):
        code, _ = run(tmp_path, "sweep", SMALL, extra=["--param", "K", "--values", *values])
        assert code == 1


class TestAblation:
    def test_four_rows_and_full_matches_benchmark(self, tmp_path, schema):
        code, out = run(tmp_path, "ablation", SMALL, "abl")
        assert code == 0
        doc = json.loads((out / "report.json").read_text())
        jsonschema.validate(doc, schema)
        assert [r["label"] for r in doc["rows"]] == ["full", "random", "no_improvement", "no_exploration"]
        _, bench = run(tmp_path, "benchmark", {**SMALL, "methods": ["mixann"]}, "bench")
        full = doc["rows"][0]
        mixann = json.loads((bench / "report.json").read_text())["rows"][0]
        assert full["mean"] == mixann["mean"] and full["per_seed"] == mixann["per_seed"]

    def test_deterministic(self, tmp_path):
        _, a = run(tmp_path, "ablation", SMALL, "a")
        _, b = run(tmp_path, "ablation", SMALL, "b")
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


class TestCaseStudy:
    def test_grid_and_synthetics(self, tmp_path, schema):
        cfg = {**SMALL, "methods": ["none", "smote"]}
        del cfg["grid_size"]
        code, out = run(tmp_path, "case-study", cfg)
        assert code == 0
        lines = (out / "grid_smote.csv").read_text().splitlines()
        assert lines[0] == "x1,x2,p_minority" and len(lines) == 40_000 + 1
        p = np.array([float(x.split(",")[2]) for x in lines[1:]])
        assert np.all((p >= 0) & (p <= 1))
        syn = (out / "synthetics_smote.csv").read_text().splitlines()
        assert syn[0] == "x1,x2,label" and len(syn) > 1
        assert all(x.endswith(",1") for x in syn[1:])
        assert (out / "synthetics_none.csv").read_text() == "x1,x2,label\n"
        jsonschema.validate(json.loads((out / "report.json").read_text()), schema)

    def test_rejects_non_2d(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        save_csv(Dataset(rng.normal(size=(60, 5)), np.r_[np.zeros(48, int), np.ones(12, int)]),
                 tmp_path / "d5.csv")
        code, _ = run(tmp_path, "case-study", {**SMALL, "dataset": {"csv": "d5.csv"}})
        assert code == 1
        assert "2-D" in capsys.readouterr().err


def test_format_table_alignment():
    rows = [{"label": "a", "classifier": "knn", "mean": {"precision": 0.5, "recall": 0.25, "f1": 1 / 3}},
            {"label": "longer", "classifier": "knn", "mean": {"precision": 1.0, "recall": 1.0, "f1": 1.0}}]
    lines = format_table(rows, ["knn"]).splitlines()
    assert len({len(x) for x in lines}) == 1
    assert lines[2].split() == ["a", "0.5000", "0.2500", "0.3333"]
