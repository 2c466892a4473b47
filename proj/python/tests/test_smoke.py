import json
import threading
import urllib.request

import pytest

import advtext


def oracles():
    clf = advtext.KeywordClassifier(2, {"excellent": 1, "awful": 0})
    mlm = advtext.ThesaurusMlm({"excellent": ["awful", "fine"]})
    tagger = advtext.LexiconTagger({"excellent": "ADJ", "awful": "ADJ", "fine": "ADJ"})
    return clf, mlm, tagger, advtext.OverlapSimilarity()


def test_prediction():
    p = advtext.Prediction([0.2, 0.8])
    assert p.label == 1
    assert advtext.Prediction.uniform(4).scores == [0.25] * 4
    with pytest.raises(advtext.InvalidArgument):
        advtext.Prediction([0.5, 0.6])


def test_planted_attack():
    cfg = advtext.AttackConfig()
    cfg.sim_threshold = 0.3
    ex = advtext.Example("e1", "an excellent film overall", 1)
    entry = advtext.attack(advtext.AttackEngine(cfg), ex, *oracles())
    assert entry["status"] == "success"
    assert entry["adversarial_text"] == "an awful film overall"
    m = advtext.metrics([entry])
    assert m["att_sr"] == 100.0


def test_python_oracles():
    class Flip(advtext.Classifier):
        def classify(self, text):
            return advtext.Prediction([0.9, 0.1] if "bad" in text else [0.1, 0.9])

    class Mlm(advtext.MaskedLanguageModel):
        def mask_fill(self, q):
            word = q.tokens[q.mask_position]
            return [advtext.SynonymCandidate("bad", 0, 1.0)] if word == "nice" else []

    class Tagger(advtext.PosTagger):
        def pos_tag(self, tokens):
            return ["ADJ"] * len(tokens)

    class Sim(advtext.SimilarityScorer):
        def similarity(self, a, b):
            return 0.95

    cfg = advtext.AttackConfig()
    entry = advtext.attack(advtext.AttackEngine(cfg), advtext.Example("x", "a nice day", 1),
                           Flip(), Mlm(), Tagger(), Sim())
    assert entry["status"] == "success"
    assert entry["adversarial_text"] == "a bad day"


def test_word_importance():
    clf = advtext.KeywordClassifier(2, {"excellent": 1})
    ranked = advtext.word_importance("an excellent film", clf)
    assert ranked[0][1] == "excellent"
    assert ranked[0][2] == pytest.approx(0.4)


def test_keep_whole_words():
    raw = [advtext.SynonymCandidate(t, i, 1.0 / (i + 1))
           for i, t in enumerate(["##ing", "good", ",", "[MASK]", "fine"])]
    kept = advtext.keep_whole_words(raw, "[MASK]", 5)
    assert [c.token for c in kept] == ["good", "fine"]
    assert advtext.coarse_pos("JJ") == "ADJ"


def test_cli_roundtrip(tmp_path):
    ws = tmp_path / "ws"
    code, out, err = advtext.run_cli("ingest", "--root", ws, "--name", "toy",
                                     "--toy-size", "200")
    assert code == 0, err
    assert (ws / "datasets" / "toy").is_dir()
    code, out, err = advtext.run_cli("--help")
    assert code == 0
    code, out, err = advtext.run_cli("no-such-command")
    assert code != 0


def test_hf_server_contract():
    from http.server import ThreadingHTTPServer
    from advtext import hf_server

    class Fake(hf_server.Backends):
        def classify(self, text):
            return {"label": 0, "scores": [1.0, 0.0]}

        def similarity(self, a, b):
            return {"value": 1.0 if a == b else 0.5}

    srv = ThreadingHTTPServer(("127.0.0.1", 0), hf_server.make_handler(Fake(model_id="m")))
    threading.Thread(target=srv.serve_forever, daemon=True).start()
    try:
        def post(path, body):
            req = urllib.request.Request(
                f"http://127.0.0.1:{srv.server_port}{path}",
                data=json.dumps(body).encode(), headers={"Content-Type": "application/json"})
            return json.loads(urllib.request.urlopen(req).read())

        assert post("/classify", {"text": "x"})["scores"] == [1.0, 0.0]
        r = post("/similarity", {"text_a": "a", "text_b": "b"})
        assert r["value"] == 0.5 and r["model"] == "m"
        assert post("/pos_tag", {"tokens": ["a", "b"]})["tags"] == ["X", "X"]
    finally:
        srv.shutdown()
