"""File formats: corpora, prediction files, experiment specs, reports and model artifacts."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .classifiers import CLASSIFIERS, EmotionClassifier, classifier_from_params
from .ensemble import CombineRule, combine_proba
from .evaluation import ExperimentReport, ExperimentSpec
from .features import TfidfFeaturizer, Vocabulary
from .labeling import Document, Provenance
from .lexicon import CATEGORIES, EmotionCategory
from .preprocess import PreprocessConfig, TextPreprocessor

__all__ = [
    "FormatError",
    "ArtifactError",
    "parse_corpus",
    "load_corpus",
    "dump_corpus",
    "save_corpus",
    "Prediction",
    "dump_predictions",
    "save_predictions",
    "parse_predictions",
    "load_predictions",
    "parse_spec",
    "parse_scalar",
    "load_spec",
    "dump_report",
    "save_report",
    "read_report_json",
    "ModelArtifact",
    "save_model",
    "load_model",
    "ARTIFACT_VERSION",
]

ARTIFACT_VERSION = 1
_ARTIFACT_MAGIC = "emodist-model"
_REPORT_JSON_MARKER = "# --- machine-readable ---"


class FormatError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.path = path


class ArtifactError(ValueError):
    """Unreadable, corrupted or incompatible model artifact."""


def _read_text(path) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# corpus text is the last field, so tabs may stay raw; only line breaks and
# backslashes need escaping
def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def _unescape(text: str) -> str:
    if "\\" not in text:
        return text
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            if nxt in "\\nr":
                out.append({"\\": "\\", "n": "\n", "r": "\r"}[nxt])
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def _parse_label(field_: str, lineno: int, path) -> EmotionCategory | None:
    if field_ == "-":
        return None
    try:
        return EmotionCategory.parse(field_)
    except ValueError as exc:
        raise FormatError(str(exc), lineno, path) from None


def parse_corpus(text: str, path: str | None = None) -> list[Document]:
    """Parse ``id<TAB>label<TAB>provenance<TAB>text`` records.

    A label with provenance ``-`` makes a manual document. A label on an
    ``unlabeled`` record is kept as its gold label but plays no part in
    training. Blank lines and lines starting with ``#`` are skipped.
    """
    docs = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line.endswith("\r"):
            line = line[:-1]
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t", 3)
        if len(parts) != 4:
            raise FormatError(f"expected 4 tab-separated fields, found {len(parts)}", lineno, path)
        doc_id, label_f, prov_f, raw = parts
        if not doc_id or doc_id != doc_id.strip():
            raise FormatError(f"invalid document id {doc_id!r}", lineno, path)
        if doc_id in seen:
            raise FormatError(f"duplicate document id {doc_id!r}", lineno, path)
        seen.add(doc_id)
        label = _parse_label(label_f, lineno, path)
        if prov_f == "-":
            provenance = Provenance.MANUAL if label is not None else Provenance.UNLABELED
        else:
            try:
                provenance = Provenance.parse(prov_f)
            except ValueError as exc:
                raise FormatError(str(exc), lineno, path) from None
        body = _unescape(raw)
        if not body.strip():
            raise FormatError(f"document {doc_id!r} has empty text", lineno, path)
        try:
            if provenance is Provenance.AUTO:
                doc = Document(doc_id, body, auto_label=label, provenance=provenance)
            else:
                doc = Document(doc_id, body, gold_label=label, provenance=provenance)
        except ValueError as exc:
            raise FormatError(str(exc), lineno, path) from None
        docs.append(doc)
    return docs


def load_corpus(path) -> list[Document]:
    return parse_corpus(_read_text(path), str(path))


def _record(doc: Document) -> str:
    label = doc.label
    if doc.provenance is Provenance.UNLABELED:
        label = doc.gold_label or doc.auto_label
    return "\t".join([
        doc.id,
        label.value if label is not None else "-",
        doc.provenance.value,
        _escape(doc.raw_text),
    ])


def dump_corpus(docs: Iterable[Document]) -> str:
    return "".join(_record(d) + "\n" for d in docs)


def save_corpus(docs: Iterable[Document], path) -> None:
    _write_text(path, dump_corpus(docs))


@dataclass(frozen=True)
class Prediction:
    id: str
    label: EmotionCategory
    proba: np.ndarray  # category order

    def as_dist(self) -> dict[EmotionCategory, float]:
        return {c: float(p) for c, p in zip(CATEGORIES, self.proba)}


_PRED_HEADER = "#id\tlabel\t" + "\t".join(f"p_{c.value}" for c in CATEGORIES)


def dump_predictions(ids: Sequence[str], proba: np.ndarray, labels=None) -> str:
    """One line per document; ``labels`` default to the argmax of ``proba``."""
    proba = np.asarray(proba, dtype=np.float64)
    if proba.shape != (len(ids), len(CATEGORIES)):
        raise ValueError(f"expected a ({len(ids)}, {len(CATEGORIES)}) probability matrix, got {proba.shape}")
    if labels is None:
        labels = [CATEGORIES[i] for i in np.argmax(proba, axis=1)]
    lines = [_PRED_HEADER]
    for doc_id, label, row in zip(ids, labels, proba):
        lines.append("\t".join([doc_id, EmotionCategory.parse(label).value] + [f"{p:.6f}" for p in row]))
    return "\n".join(lines) + "\n"


def save_predictions(path, ids, proba, labels=None) -> None:
    _write_text(path, dump_predictions(ids, proba, labels))


def parse_predictions(text: str, path: str | None = None) -> list[Prediction]:
    out = []
    seen = set()
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 + len(CATEGORIES):
            raise FormatError(f"expected {2 + len(CATEGORIES)} tab-separated fields, found {len(parts)}", lineno, path)
        doc_id = parts[0]
        if doc_id in seen:
            raise FormatError(f"duplicate document id {doc_id!r}", lineno, path)
        seen.add(doc_id)
        label = _parse_label(parts[1], lineno, path)
        if label is None:
            raise FormatError("a prediction needs a label", lineno, path)
        try:
            proba = np.array([float(v) for v in parts[2:]])
        except ValueError:
            raise FormatError("probabilities must be numbers", lineno, path) from None
        if np.any(proba < 0) or not np.all(np.isfinite(proba)):
            raise FormatError("probabilities must be finite and nonnegative", lineno, path)
        # six decimals leave up to 2e-6 of rounding slack
        total = proba.sum()
        if abs(total - 1.0) > 1e-5:
            raise FormatError(f"probabilities sum to {total:.6f}, not 1", lineno, path)
        out.append(Prediction(doc_id, label, proba / total))
    return out


def load_predictions(path) -> list[Prediction]:
    return parse_predictions(_read_text(path), str(path))


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _bool(value: str, key: str, lineno: int, path) -> bool:
    v = value.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise FormatError(f"{key}: expected a boolean, got {value!r}", lineno, path)


def _list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_scalar(value: str):
    """Best-effort typed value: int, float, bool, None or the string itself."""
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    low = value.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    if low == "none":
        return None
    return value


def _spec_from_fields(fields: dict, path, default_seed: int | None = None) -> ExperimentSpec:
    kwargs: dict = {} if default_seed is None else {"seed": default_seed}
    hyper: dict = {}
    for key, (value, lineno) in fields.items():
        if "." in key:
            kind, _, param = key.partition(".")
            if kind not in CLASSIFIERS:
                raise FormatError(f"unknown classifier {kind!r} in {key!r}", lineno, path)
            hyper.setdefault(kind, {})[param] = parse_scalar(value)
        elif key in ("training_source", "sources"):
            v = value.strip().lower()
            kwargs["sources"] = ("auto", "manual") if v == "both" else tuple(_list(v))
        elif key in ("preprocess", "preprocess_on", "single_emoji_only", "fixed_split"):
            kwargs["preprocess" if key == "preprocess_on" else key] = _bool(value, key, lineno, path)
        elif key == "classifiers":
            kwargs[key] = tuple(v.lower() for v in _list(value))
        elif key == "rules":
            v = value.strip().lower()
            kwargs[key] = tuple(CombineRule) if v == "all" else () if v == "none" else tuple(_list(v))
        elif key in ("n_folds", "seed", "min_df"):
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise FormatError(f"{key}: expected an integer, got {value!r}", lineno, path) from None
        elif key == "test_fraction":
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise FormatError(f"{key}: expected a number, got {value!r}", lineno, path) from None
        elif key == "name":
            kwargs[key] = value.strip()
        else:
            raise FormatError(f"unknown key {key!r}", lineno, path)
    kwargs["hyperparams"] = hyper
    try:
        return ExperimentSpec(**kwargs)
    except ValueError as exc:
        raise FormatError(str(exc), path=path) from None


def parse_spec(text: str, path: str | None = None, default_seed: int | None = None) -> list[ExperimentSpec]:
    """Parse ``key = value`` experiment settings.

    A ``[name]`` header starts a new experiment; keys before the first
    header apply to every experiment in the file. Classifier
    hyperparameters are written ``svm.lambda_reg = 0.001``. Experiments
    without a ``seed`` key get ``default_seed`` when it is given.
    """
    shared: dict = {}
    sections: list[tuple[str, dict]] = []
    current = shared
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise FormatError("empty section name", lineno, path)
            if any(n == name for n, _ in sections):
                raise FormatError(f"duplicate experiment {name!r}", lineno, path)
            current = {}
            sections.append((name, current))
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"expected 'key = value', got {line!r}", lineno, path)
        key = key.strip().lower()
        if key in current:
            raise FormatError(f"duplicate key {key!r}", lineno, path)
        current[key] = (value.strip(), lineno)
    if not sections:
        return [_spec_from_fields(shared, path, default_seed)]
    specs = []
    for name, own in sections:
        merged = {**shared, **own}
        merged.setdefault("name", (name, 0))
        specs.append(_spec_from_fields(merged, path, default_seed))
    return specs


def load_spec(path, default_seed: int | None = None) -> list[ExperimentSpec]:
    return parse_spec(_read_text(path), str(path), default_seed)


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def dump_report(reports: Sequence[ExperimentReport]) -> str:
    """Tables for reading, then the same numbers as one JSON line."""
    text = "\n".join(r.render() for r in reports)
    payload = _canonical_json({"experiments": [r.to_dict() for r in reports]})
    return f"{text}\n{_REPORT_JSON_MARKER}\n{payload}\n"


def save_report(reports: Sequence[ExperimentReport], path) -> None:
    _write_text(path, dump_report(reports))


def read_report_json(text: str) -> dict:
    head, sep, tail = text.partition(f"\n{_REPORT_JSON_MARKER}\n")
    if not sep:
        raise FormatError("report has no machine-readable block")
    return json.loads(tail)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


@dataclass
class ModelArtifact:
    """Everything needed to go from raw text to probabilities.

    ``models`` maps classifier kind to a fitted classifier; with more than
    one model, ``rule`` says how their probabilities combine.
    """

    preprocess: PreprocessConfig
    vocabulary: Vocabulary
    models: dict[str, EmotionClassifier]
    seed: int
    rule: CombineRule | None = None
    meta: dict = field(default_factory=dict)
    version: int = ARTIFACT_VERSION

    def __post_init__(self):
        if not self.models:
            raise ValueError("an artifact needs at least one model")
        if self.rule is not None:
            self.rule = CombineRule.parse(self.rule)
        for kind, model in self.models.items():
            if kind not in CLASSIFIERS:
                raise ValueError(f"unknown classifier {kind!r}")
            if model.n_features_in_ != len(self.vocabulary):
                raise ValueError(f"{kind} expects {model.n_features_in_} features; the vocabulary has {len(self.vocabulary)}")

    @classmethod
    def from_fitted(cls, config: PreprocessConfig, featurizer: TfidfFeaturizer, models: dict, seed: int, **kw):
        return cls(config, featurizer.vocabulary_, dict(models), seed, **kw)

    def featurize(self, texts: Sequence[str]):
        featurizer = TfidfFeaturizer()
        featurizer.vocabulary_ = self.vocabulary
        featurizer.n_features_out_ = len(self.vocabulary)
        tokens = TextPreprocessor.from_config(self.preprocess).transform(list(texts))
        return featurizer.transform(tokens)

    def predict_proba(self, texts: Sequence[str], model: str | None = None) -> np.ndarray:
        X = self.featurize(texts)
        if model is not None:
            if model not in self.models:
                raise KeyError(f"the artifact has no {model!r} model; it has {', '.join(self.models)}")
            return self.models[model].predict_proba(X)
        if len(self.models) == 1:
            return next(iter(self.models.values())).predict_proba(X)
        rule = self.rule or CombineRule.AVERAGE
        scores, _ = combine_proba([m.predict_proba(X) for m in self.models.values()], rule)
        # combined scores are not distributions; rescale rows that still carry mass
        totals = scores.sum(axis=1, keepdims=True)
        uniform = np.full_like(scores, 1.0 / scores.shape[1])
        return np.where(totals > 0, scores / np.where(totals > 0, totals, 1.0), uniform)

    def to_dict(self) -> dict:
        return _plain({
            "version": self.version,
            "seed": int(self.seed),
            "rule": self.rule.value if self.rule is not None else None,
            "preprocess": self.preprocess.to_dict(),
            "vocabulary": self.vocabulary.to_dict(),
            "models": [{"kind": k, "params": m.to_params()} for k, m in self.models.items()],
            "meta": self.meta,
        })

    @classmethod
    def from_dict(cls, d: dict) -> "ModelArtifact":
        return cls(
            preprocess=PreprocessConfig.from_dict(d["preprocess"]),
            vocabulary=Vocabulary.from_dict(d["vocabulary"]),
            models={m["kind"]: classifier_from_params(m["kind"], m["params"]) for m in d["models"]},
            seed=int(d["seed"]),
            rule=d["rule"],
            meta=d.get("meta", {}),
            version=int(d["version"]),
        )

    def dumps(self) -> str:
        body = _canonical_json(self.to_dict())
        digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
        return f"{_ARTIFACT_MAGIC} {self.version} sha256={digest}\n{body}\n"

    @classmethod
    def loads(cls, text: str) -> "ModelArtifact":
        header, sep, rest = text.partition("\n")
        parts = header.split(" ")
        if len(parts) != 3 or parts[0] != _ARTIFACT_MAGIC or not parts[2].startswith("sha256="):
            raise ArtifactError("not a model artifact (bad header)")
        try:
            version = int(parts[1])
        except ValueError:
            raise ArtifactError(f"bad artifact version {parts[1]!r}") from None
        if version != ARTIFACT_VERSION:
            raise ArtifactError(f"artifact format version {version} is not supported (expected {ARTIFACT_VERSION})")
        if not sep or not rest.endswith("\n"):
            raise ArtifactError("artifact is truncated")
        body = rest[:-1]
        if hashlib.sha256(body.encode("utf-8")).hexdigest() != parts[2][len("sha256="):]:
            raise ArtifactError("artifact checksum mismatch; the file is corrupted")
        try:
            d = json.loads(body)
            if int(d["version"]) != version:
                raise ArtifactError("artifact header and body disagree on the version")
            return cls.from_dict(d)
        except ArtifactError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ArtifactError(f"artifact body is malformed: {exc}") from None


def save_model(artifact: ModelArtifact, path) -> None:
    _write_text(path, artifact.dumps())


def load_model(path) -> ModelArtifact:
    try:
        text = _read_text(path)
    except UnicodeDecodeError:
        raise ArtifactError("artifact is not valid UTF-8; the file is corrupted") from None
    return ModelArtifact.loads(text)
