import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from rcpredict import pipeline
from rcpredict.cli import main
from rcpredict.dataset import CaseSpec, platform
from rcpredict.features import extract_features, feature_row
from rcpredict.ml import ClassifierSpec, train_arrays

from conftest import chain, make_lib, spec

TINY = """\
[paths]
output = out

[generator]
seed = 1
corpus_size = 30
nodes = 5-40

[evaluation]
cases = I, III
classifiers = all
folds = 3
seeds = 0

[classifier.MLP]
epochs = 20

[classifier.LinearSVM]
epochs = 20

[classifier.Stacking]
folds = 3

[baseline]
cases = III
classifier = DecisionTree
"""


def rows(path):
    return list(csv.reader(io.StringIO(Path(path).read_text())))


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipe")
    (root / "tiny.ini").write_text(TINY)
    assert main(["run", "-c", str(root / "tiny.ini")]) == 0
    return root


def test_run_writes_every_stage(run_dir):
    out = run_dir / "out"
    assert len(list((out / "corpus").glob("*.dfg"))) == 30
    for rel in ("sweep/case_I.csv", "datasets/case_III.csv", "reports/summary_case_I.csv",
                "models/case_III/DecisionTree.json", "baseline/case_III.csv",
                "report/accuracy_by_case.csv", "report/plot_accuracy.csv"):
        assert (out / rel).exists(), rel
        assert "inputs" in json.loads((out / rel).with_suffix(".manifest.json").read_text())


def test_evaluation_report_shape(run_dir):
    rep = run_dir / "out" / "reports"
    summary = rows(rep / "summary_case_I.csv")
    assert summary[0] == ["classifier", "mean_accuracy", "mean_auc"] and len(summary) == 10
    sig = rows(rep / "significance_case_I.csv")
    assert len(sig) == 10 and all(len(r) == 10 for r in sig)
    assert {c for r in sig[1:] for c in r[1:]} <= {"-", "improvement", "degradation", "not-significant"}
    timings = rows(rep / "timings_case_I.csv")
    assert [r[1] for r in timings[1:]] == [r[0] for r in summary[1:]]
    assert all(float(r[2]) >= 0 for r in timings[1:])
    assert len(rows(rep / "folds_case_I.csv")) == 1 + 9 * 3


def test_figures_are_png(run_dir):
    figs = sorted(p.name for p in (run_dir / "out" / "report").glob("*.png"))
    assert figs == ["accuracy_by_case.png", "baseline_case_III.png", "class_distribution.png"]
    for name in figs:
        assert (run_dir / "out" / "report" / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_baseline_table_invariant(run_dir):
    body = [r for r in rows(run_dir / "out" / "baseline" / "case_III.csv")[1:] if r[0] != "average"]
    assert body
    for dfg_id, rand, rand_exp, best, ml, best_c, ml_c, mark in body:
        assert float(best) <= float(rand) and float(best) <= float(rand_exp)
        if ml != "infeasible":
            assert float(best) <= float(ml)
            assert (mark == "*") == (ml != best)


def test_model_manifest_separates_training_and_heldout(run_dir):
    meta = pipeline.read_manifest(run_dir / "out" / "models" / "case_III" / "DecisionTree.json")
    assert set(meta["training_dfgs"]).isdisjoint(meta["heldout_dfgs"])
    assert len(meta["training_dfgs"]) + len(meta["heldout_dfgs"]) == 30


def test_rerun_is_byte_identical(run_dir):
    out = run_dir / "out"
    before = {p: p.read_bytes() for p in out.rglob("*") if p.is_file() and "timings" not in p.name}
    assert main(["sweep", "-c", str(run_dir / "tiny.ini"), "--case", "I"]) == 0
    assert main(["report", "-c", str(run_dir / "tiny.ini")]) == 0
    after = {p: p.read_bytes() for p in out.rglob("*") if p.is_file() and "timings" not in p.name}
    assert before == after


def test_predict_prints_one_line(run_dir, capsys):
    out = run_dir / "out"
    dfg = sorted((out / "corpus").glob("*.dfg"))[0]
    capsys.readouterr()
    code = main(["predict", "-c", str(run_dir / "tiny.ini"),
                 "--model", str(out / "models" / "case_I" / "NaiveBayes.json"), str(dfg)])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1
    dfg_id, label, dist = lines[0].split(",")
    pairs = dict(p.split("=") for p in dist.split(";"))
    assert dfg_id == dfg.stem and label in pairs
    assert abs(sum(float(v) for v in pairs.values()) - 1) < 1e-5
    assert max(pairs, key=lambda k: float(pairs[k])) == label


def test_baseline_refuses_training_dfgs(run_dir):
    out = run_dir / "out"
    meta = pipeline.read_manifest(out / "models" / "case_III" / "DecisionTree.json")
    trained = sorted(meta["training_dfgs"])[0]
    code = main(["baseline", "-c", str(run_dir / "tiny.ini"), "--dfg", str(out / "corpus" / f"{trained}.dfg")])
    assert code == 3
    held = meta["heldout_dfgs"][0]
    code = main(["baseline", "-c", str(run_dir / "tiny.ini"), "-o", str(run_dir / "other"),
                 "--model", str(out / "models" / "case_III" / "DecisionTree.json"),
                 "--dfg", str(out / "corpus" / f"{held}.dfg"), "--set", f"paths.corpus={out / 'corpus'}",
                 "--set", f"paths.library={out / 'library.txt'}"])
    assert code == 0


def test_degenerate_candidates_give_equal_columns():
    # hardware-only tasks never touch the GPP, so both candidates behave alike
    lib = make_lib(spec(1), spec(2, area=10, hw=30))
    case = CaseSpec("D", (platform(200, 4, 0, "S3"), platform(200, 4, 1, "S3")), "min_time", "gpp_prr")
    dfgs = [chain(n, 1 + n % 2, f"c{n}") for n in range(2, 7)]
    X = np.array([feature_row(extract_features(g, lib)) for g in dfgs])
    model = train_arrays(X, np.arange(5) % 2, case.class_names, ClassifierSpec("KNN"))
    table = pipeline.baseline(dfgs, lib, case, model, 0)
    assert len(table.rows) == 5
    for r in table.rows:
        assert r.random == r.random_expected == r.best == r.ml


def test_exit_codes(tmp_path, capsys):
    assert main(["sweep", "-c", str(tmp_path / "nope.ini")]) == 2
    assert main(["sweep", "-o", str(tmp_path / "empty")]) == 2
    assert main(["evaluate", "-o", str(tmp_path / "empty"), "--set", "evaluation.folds=x"]) == 3
    assert main(["sweep", "-o", str(tmp_path / "empty"), "--set", "novalue"]) == 3
    assert main(["sweep", "-o", str(tmp_path / "empty"), "--case", "IX"]) == 3
    assert main(["predict", "--model", str(tmp_path / "m.json"), str(tmp_path / "g.dfg")]) == 2
    assert "error" in capsys.readouterr().err


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(pipeline.ENV_OUTPUT, str(tmp_path / "env"))
    assert pipeline.load_config(None).output == tmp_path / "env"


def test_config_parsing(tmp_path):
    (tmp_path / "c.ini").write_text(
        "[case.VI]\nobjective = min_power\nclass_by = layout\n"
        "candidates = 1:2U@100:S3, 1:4S@100:S3\n"
        "[evaluation]\ncases = VI\nclassifiers = KNN, MLP\n[classifier.KNN]\nk = 5\n")
    cfg = pipeline.load_config(tmp_path / "c.ini")
    assert cfg.case_ids == ["VI"] and [s.kind for s in cfg.classifiers] == ["KNN", "MLP"]
    assert cfg.spec_for("KNN", 3) == ClassifierSpec("KNN", {"k": 5}, 3)
    assert len(cfg.case("VI").candidates) == 2
    with pytest.raises(pipeline.ValidationFailure):
        pipeline.load_config(None, {"classifier.KNN.k": "0", "evaluation.classifiers": "KNN"})
