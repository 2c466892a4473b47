"""Python access to the advtext attack library."""

import json

from ._advtext import (  # noqa: F401
    AttackConfig,
    AttackEngine,
    Classifier,
    DataError,
    Error,
    Example,
    InvalidArgument,
    KeywordClassifier,
    LabelSpace,
    LexiconTagger,
    LookupClassifier,
    MaskedLanguageModel,
    MaskedQuery,
    ModelClassifier,
    OracleUnavailable,
    OverlapSimilarity,
    PosTagger,
    Prediction,
    SimilarityScorer,
    SynonymCandidate,
    ThesaurusMlm,
    coarse_pos,
    keep_whole_words,
    word_importance,
)
from . import _advtext


def attack(engine, example, classifier, mlm, tagger, similarity):
    """Attack one example; returns the log entry as a dict."""
    return json.loads(engine.attack_json(example, classifier, mlm, tagger, similarity))


def read_log(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def metrics(entries):
    """Metrics over log entries given as dicts or JSON lines."""
    lines = [e if isinstance(e, str) else json.dumps(e) for e in entries]
    return json.loads(_advtext.metrics_json(lines))


def run_cli(*args):
    """Runs the command line in-process; returns (exit_code, stdout, stderr)."""
    return _advtext.run_cli([str(a) for a in args])
