from pathlib import Path

import pytest

from emodist.cli import DEFAULT_SEED, SEED_ENV, main, resolve_seed
from emodist.io import load_corpus, load_model, load_predictions, read_report_json
from emodist.lexicon import CATEGORIES

from oracles import combine_brute

DATA = Path(__file__).parent / "data"
SMALL = ["--synth-auto", "240", "--synth-manual", "80", "--folds", "2"]


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out-dir", str(out), "--n-auto", "200", "--n-manual", "80", "--n-terms", "60", "--seed", "3"]) == 0
    return out


def test_label_auto_scoring_samples(tmp_path):
    out = tmp_path / "labeled.tsv"
    assert main(["label-auto", "--corpus", str(DATA / "emoji_scoring_samples.tsv"), "--out", str(out)]) == 0
    docs = load_corpus(out)
    assert [d.auto_label.value for d in docs] == ["anger", "sadness", "joy"]
    assert all("☹" not in d.raw_text and "❤" not in d.raw_text for d in docs)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["labeled.tsv"]


def test_experiment_twice_identical(tmp_path, capsys):
    outs = []
    for run in ("a", "b"):
        report = tmp_path / f"{run}.txt"
        models = tmp_path / f"models-{run}"
        argv = ["experiment", "--spec", "paper_grid", "--seed", "7", "--out", str(report), "--models-dir", str(models), *SMALL]
        assert main(argv) == 0
        outs.append((report, models))
    (ra, ma), (rb, mb) = outs
    assert ra.read_bytes() == rb.read_bytes()
    names = sorted(p.name for p in ma.iterdir())
    assert names == sorted(p.name for p in mb.iterdir())
    assert "auto_vs_manual-auto.model" in names and "auto_vs_manual-manual-fold2.model" in names
    for name in names:
        assert (ma / name).read_bytes() == (mb / name).read_bytes()
    data = read_report_json(ra.read_text(encoding="utf-8"))
    assert [e["spec"]["name"] for e in data["experiments"]] == ["auto_vs_manual", "no_preprocessing", "single_emoji_only"]
    assert all(e["spec"]["seed"] == 7 for e in data["experiments"])
    assert load_model(ma / names[0]).seed == 7


def test_spec_file(tmp_path, synth_dir):
    spec = tmp_path / "exp.spec"
    spec.write_text("training_source = manual\nclassifiers = mnb\nrules = none\nn_folds = 2\nseed = 5\n", encoding="utf-8")
    out = tmp_path / "r.txt"
    assert main(["experiment", "--spec", spec, "--auto", synth_dir / "auto.tsv", "--manual", synth_dir / "manual.tsv", "--out", out]) == 0
    (exp,) = read_report_json(out.read_text(encoding="utf-8"))["experiments"]
    assert exp["spec"]["seed"] == 5
    assert {r["model"] for r in exp["rows"]} == {"mnb"}


def test_train_predict_evaluate(tmp_path, synth_dir, capsys):
    model = tmp_path / "m.model"
    preds = tmp_path / "p.tsv"
    assert main(["train", "--corpus", synth_dir / "manual.tsv", "--out", model, "--classifier", "mnb", "--classifier", "svm",
                 "--rule", "product", "--param", "svm.epochs=5"]) == 0
    assert load_model(model).models["svm"].epochs == 5
    assert main(["predict", "--model", model, "--corpus", synth_dir / "manual.tsv", "--out", preds]) == 0
    assert len(load_predictions(preds)) == 80
    capsys.readouterr()
    assert main(["evaluate", "--predictions", preds, "--gold", synth_dir / "manual.tsv"]) == 0
    text = capsys.readouterr().out
    assert "accuracy:" in text and "weighted" in text


def test_train_with_auto_label(tmp_path, synth_dir):
    model = tmp_path / "m.model"
    assert main(["train", "--corpus", synth_dir / "auto.tsv", "--out", model, "--auto-label", "--classifier", "rf",
                 "--param", "rf.n_estimators=5"]) == 0
    assert main(["train", "--corpus", synth_dir / "auto.tsv", "--out", model]) == 2


def test_combine_all_matches_oracle(tmp_path):
    rows = [
        [[0.9, 0.05, 0.03, 0.02], [0.1, 0.2, 0.3, 0.4], [0.25, 0.25, 0.25, 0.25]],
        [[0.1, 0.45, 0.25, 0.2], [0.2, 0.2, 0.2, 0.4], [0.05, 0.05, 0.85, 0.05]],
        [[0.1, 0.5, 0.25, 0.15], [0.5, 0.1, 0.1, 0.3], [0.4, 0.3, 0.2, 0.1]],
    ]
    inputs = []
    for k, dists in enumerate(rows):
        p = tmp_path / f"in{k}.tsv"
        p.write_text("".join(f"d{i}\tanger\t" + "\t".join(f"{v:.6f}" for v in d) + "\n" for i, d in enumerate(dists)), encoding="utf-8")
        inputs.append(p)
    out = tmp_path / "combined"
    assert main(["combine", *map(str, inputs), "--rule", "all", "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["average.tsv", "maximum.tsv", "minimum.tsv", "product.tsv"]
    parsed = [load_predictions(p) for p in inputs]
    for rule in ("average", "product", "maximum", "minimum"):
        got = load_predictions(out / f"{rule}.tsv")
        for i, pred in enumerate(got):
            _, label = combine_brute([run[i].proba for run in parsed], rule)
            assert pred.label is label
    assert main(["combine", *map(str, inputs), "--rule", "product", "--out", str(tmp_path / "one.tsv")]) == 0
    assert [p.label.value for p in load_predictions(tmp_path / "one.tsv")] == ["disgust", "sadness", "joy"]


def test_preprocess_dump(tmp_path):
    out = tmp_path / "tok.txt"
    assert main(["preprocess", "--corpus", DATA / "emoji_scoring_samples.tsv", "--out", out, "--disable", "stem"]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("s1\t") and len(lines) == 3


def test_usage_errors(tmp_path, capsys):
    assert main(["frobnicate"]) == 2
    assert main(["train", "--bogus"]) == 2
    assert main([]) == 2
    capsys.readouterr()
    assert main(["predict", "--model", tmp_path / "none.model", "--corpus", "x", "--out", tmp_path / "o"]) == 1
    assert "error" in capsys.readouterr().err


def test_seed_precedence(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert resolve_seed(None) == DEFAULT_SEED == 42
    monkeypatch.setenv(SEED_ENV, "9")
    assert resolve_seed(None) == 9
    assert resolve_seed(3) == 3


def test_env_seed_reaches_synth(tmp_path, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "11")
    assert main(["synth", "--out-dir", tmp_path / "env", "--n-auto", "20", "--n-manual", "8", "--n-terms", "20"]) == 0
    assert main(["synth", "--out-dir", tmp_path / "flag", "--n-auto", "20", "--n-manual", "8", "--n-terms", "20", "--seed", "11"]) == 0
    assert main(["synth", "--out-dir", tmp_path / "other", "--n-auto", "20", "--n-manual", "8", "--n-terms", "20", "--seed", "12"]) == 0
    env, flag, other = ((tmp_path / d / "auto.tsv").read_bytes() for d in ("env", "flag", "other"))
    assert env == flag != other
    monkeypatch.setenv(SEED_ENV, "x")
    assert main(["synth", "--out-dir", tmp_path / "bad"]) == 2
