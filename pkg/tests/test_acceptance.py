"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (visible even without ``-s``)
before asserting. Run just these with ``pytest -m acceptance``.
"""
import itertools
from pathlib import Path

import numpy as np
import pytest

from emodist.classifiers import MultinomialNaiveBayes, make_classifier
from emodist.cli import main
from emodist.ensemble import combine
from emodist.evaluation import compute_metrics, stratified_split
from emodist.features import TfidfFeaturizer
from emodist.io import read_report_json
from emodist.labeling import Document, Provenance, build_auto_corpus
from emodist.lexicon import CATEGORIES
from emodist.preprocess import PreprocessConfig, TextPreprocessor
from emodist.synth import SynthConfig, generate_corpus

from oracles import bayes_posterior, combine_brute

pytestmark = pytest.mark.acceptance

A, D, J, S = CATEGORIES
RULES = ("average", "product", "maximum", "minimum")
KINDS = ("svm", "mnb", "rf")
SEEDS = (0, 1, 2, 3, 4)
DATA = Path(__file__).parent / "data"


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else ""))
        return ok
    return emit


def _accuracy(train_texts, train_labels, test_texts, gold, kind, seed, config=None):
    prep = TextPreprocessor.from_config(config or PreprocessConfig())
    train_tokens = prep.transform(train_texts)
    fz = TfidfFeaturizer().fit(train_tokens)
    model = make_classifier(kind, random_state=seed).fit(fz.transform(train_tokens), train_labels)
    pred = model.predict(fz.transform(prep.transform(test_texts)))
    return float(np.mean(pred == np.array(gold, dtype=object)))


@pytest.fixture(scope="module")
def noisy_corpora(lexicon):
    """Per seed: full auto corpus, single-emoji auto corpus, 200 manual train docs, 400 test docs."""
    out = []
    for seed in SEEDS:
        c = generate_corpus(SynthConfig(n_auto=2000, n_manual=600, n_terms=300, label_noise=0.1), lexicon, seed=seed)
        out.append({
            "seed": seed,
            "auto": build_auto_corpus(c.auto, lexicon, seed=seed),
            "single": build_auto_corpus(c.auto, lexicon, seed=seed, single_emoji_only=True),
            "train": c.manual[:200],
            "test": c.manual[200:],
        })
    return out


def _arm_accuracy(corpora, arm, kind):
    accs = []
    for c in corpora:
        docs = c[arm]
        accs.append(_accuracy([d.raw_text for d in docs], [d.label for d in docs],
                              [d.raw_text for d in c["test"]], [d.gold_label for d in c["test"]], kind, c["seed"]))
    return float(np.mean(accs))


def test_emoji_scoring_situations(report, lexicon):
    raw = [Document("s1", "حادث مأساوي اليوم ☹"), Document("s2", "رحل صديقي 💔"),
           Document("s3", "نجحت أخيرا ❤❤ بعد تعب 😭")]
    got = [d.auto_label for d in build_auto_corpus(raw, lexicon, seed=0)]
    ok = got == [A, S, J]
    report(1, "emoji scoring: -5 anger, -3 sadness, +3+3 joy vs -4 sadness", ok, ", ".join(c.value for c in got))
    assert ok


def test_naive_bayes_oracle(report):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(50):
        n_terms = int(rng.integers(1, 6))
        n_docs = int(rng.integers(1, 9))
        rows = np.round(rng.random((n_docs, n_terms)) * (rng.random((n_docs, n_terms)) < 0.7), 6)
        labels = [CATEGORIES[i] for i in rng.integers(0, 4, n_docs)]
        x = np.round(rng.random(n_terms) * 2, 6)
        nb = MultinomialNaiveBayes(alpha=1.0).fit(rows, labels)
        got = nb.predict_proba(x[None, :])[0]
        want = np.array(bayes_posterior(rows.tolist(), labels, x.tolist(), 1.0))
        worst = max(worst, float(np.max(np.abs(got - want))))
    ok = worst <= 1e-9
    report(2, "MNB matches enumerated Bayes posterior on 50 instances", ok, f"max error {worst:.2e}")
    assert ok


def test_combining_rules_oracle(report):
    rng = np.random.default_rng(77)
    mismatches = 0
    for _ in range(1000):
        dists = list(rng.dirichlet(np.ones(4), size=3))
        for rule in RULES:
            scores, label = combine(dists, rule)
            want_scores, want_label = combine_brute(dists, rule)
            if [scores[c] for c in CATEGORIES] != want_scores or label is not want_label:
                mismatches += 1
    violations = 0
    for _ in range(1000):
        top = int(rng.integers(4))
        dists = []
        for _ in range(3):
            d = rng.dirichlet(np.ones(4))
            d[[top, int(np.argmax(d))]] = d[[int(np.argmax(d)), top]]
            if np.sum(d == d[top]) > 1:
                d[top] += 1e-6
                d /= d.sum()
            dists.append(d)
        for rule in RULES:
            base = combine(dists, rule)
            if base[1].index != top:
                violations += 1
            for perm in itertools.permutations(range(3)):
                if combine([dists[i] for i in perm], rule) != base:
                    violations += 1
    ok = mismatches == 0 and violations == 0
    report(3, "combining rules match brute force; unanimity and order invariance hold", ok,
           f"{mismatches} oracle mismatches, {violations} property violations")
    assert ok


def test_one_right_two_wrong(report):
    # only the first classifier ranks anger first; the wrong ones split their top votes
    right = [0.85, 0.05, 0.05, 0.05]
    wrong_a = [0.35, 0.45, 0.05, 0.15]
    wrong_b = [0.35, 0.05, 0.45, 0.15]
    firsts = [CATEGORIES[int(np.argmax(d))] for d in (right, wrong_a, wrong_b)]
    assert firsts == [A, D, J]
    labels = {rule: combine([right, wrong_a, wrong_b], rule)[1] for rule in RULES}
    ok = all(label is A for label in labels.values())
    report(4, "one correct classifier out of three; every rule outputs the true class", ok,
           ", ".join(f"{r}={l.value}" for r, l in labels.items()))
    assert ok


def test_auto_labeled_beats_small_clean_set(report, noisy_corpora):
    auto = {k: _arm_accuracy(noisy_corpora, "auto", k) for k in KINDS}
    manual = {k: _arm_accuracy(noisy_corpora, "train", k) for k in KINDS}
    wins = [k for k in KINDS if auto[k] > manual[k]]
    ok = len(wins) >= 2
    detail = "; ".join(f"{k} {100 * auto[k]:.1f} vs {100 * manual[k]:.1f}" for k in KINDS)
    report(5, "2,000 noisy auto-labeled docs beat 200 clean docs for >= 2 of 3 classifiers", ok, detail)
    assert ok


def test_preprocessing_helps_on_noisy_surface_forms(report, lexicon):
    on = {k: [] for k in KINDS}
    off = {k: [] for k in KINDS}
    for seed in SEEDS:
        c = generate_corpus(SynthConfig(n_auto=4, n_manual=600, n_terms=300, surface_noise=1.0), lexicon, seed=seed)
        train, test = c.manual[:200], c.manual[200:]
        args = ([d.raw_text for d in train], [d.gold_label for d in train],
                [d.raw_text for d in test], [d.gold_label for d in test])
        for k in KINDS:
            on[k].append(_accuracy(*args, k, seed, PreprocessConfig()))
            off[k].append(_accuracy(*args, k, seed, PreprocessConfig.all_off()))
    ok = all(np.mean(on[k]) >= np.mean(off[k]) for k in KINDS)
    detail = "; ".join(f"{k} {100 * np.mean(on[k]):.1f} vs {100 * np.mean(off[k]):.1f}" for k in KINDS)
    report(6, "pipeline on >= pipeline off for every classifier on elongated/alef-noised text", ok, detail)
    assert ok


def test_single_emoji_subset_close_to_all(report, noisy_corpora):
    gaps = {k: abs(_arm_accuracy(noisy_corpora, "single", k) - _arm_accuracy(noisy_corpora, "auto", k)) for k in KINDS}
    ok = all(g <= 0.05 for g in gaps.values())
    sizes = np.mean([len(c["single"]) for c in noisy_corpora])
    detail = "; ".join(f"{k} gap {100 * g:.2f}" for k, g in gaps.items()) + f"; single-emoji docs {sizes:.0f}/2000"
    report(7, "single-emoji training within 5 points of all-emoji training, per classifier", ok, detail)
    assert ok


def test_metrics_hand_computed(report, tmp_path):
    gold = [A, A, A, D, D, J, J, J, J, S, S, S]
    pred = [A, A, D, D, A, J, J, S, J, S, S, A]
    m = compute_metrics(gold, pred)
    # per class P = 1/2, 1/2, 1, 2/3; R = 2/3, 1/2, 3/4, 2/3; supports 3, 2, 4, 3
    hand = (8.5 / 12, 8 / 12, 57 / 84)
    # one ulp of slack: the weighted sums round differently from the fractions
    matches = abs(m.weighted_precision - hand[0]) < 1e-15 and abs(m.weighted_recall - hand[1]) < 1e-15 \
        and abs(m.weighted_f1 - hand[2]) < 1e-15
    out = tmp_path / "r.txt"
    assert main(["experiment", "--spec", "paper_grid", "--seed", "3", "--synth-auto", "300",
                 "--synth-manual", "120", "--out", str(out)]) == 0
    rows = [r for e in read_report_json(out.read_text(encoding="utf-8"))["experiments"] for r in e["rows"]]
    identity = all(abs(r["recall"] - r["accuracy"]) <= 1e-12 for r in rows)
    ok = matches and identity
    report(8, "hand-computed weighted P/R/F1; weighted recall equals accuracy in every row", ok,
           f"P {m.weighted_precision:.6f} R {m.weighted_recall:.6f} F1 {m.weighted_f1:.6f}; {len(rows)} rows checked")
    assert ok


def test_experiment_runs_are_byte_identical(report, tmp_path):
    runs = []
    for name in ("first", "second"):
        out, models = tmp_path / f"{name}.txt", tmp_path / f"{name}-models"
        assert main(["experiment", "--spec", "paper_grid", "--seed", "42", "--synth-auto", "400",
                     "--synth-manual", "200", "--out", str(out), "--models-dir", str(models)]) == 0
        runs.append((out.read_bytes(), {p.name: p.read_bytes() for p in sorted(models.iterdir())}))
    (r1, m1), (r2, m2) = runs
    ok = r1 == r2 and m1 == m2 and len(m1) > 0
    report(9, "two seeded experiment runs give identical report and model bytes", ok,
           f"{len(m1)} model artifacts compared")
    assert ok


def test_split_shape(report):
    docs = []
    for cat, n in zip(CATEGORIES, (630, 415, 620, 360)):
        docs += [Document(f"{cat.value}{i}", "نص", gold_label=cat, provenance=Provenance.MANUAL) for i in range(n)]
    _, test = stratified_split(docs, 0.2, seed=42)
    counts = tuple(sum(d.gold_label is c for d in test) for c in CATEGORIES)
    ok = counts == (126, 83, 124, 72)
    report(10, "stratified 20% split of (630, 415, 620, 360)", ok, f"test counts {counts}")
    assert ok
