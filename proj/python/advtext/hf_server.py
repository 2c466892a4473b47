"""Oracle server backed by Hugging Face models.

Speaks the same JSON contract as `advtext oracle-serve`, so attacks can use
pretrained models through `--oracles remote`:

    python -m advtext.hf_server --classifier path/to/finetuned --port 8100

Heavy dependencies are imported on first use.
"""

import argparse
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
import threading

VERSION = "hf-1"


class Backends:
    def __init__(self, classifier=None, mlm="bert-base-multilingual-cased",
                 encoder="sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2",
                 tagger=None, model_id=None):
        self.classifier_name = classifier
        self.mlm_name = mlm
        self.encoder_name = encoder
        self.tagger_name = tagger
        self.model_id = model_id or classifier or "hf"
        self._lock = threading.Lock()
        self._cache = {}

    def _get(self, key, build):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = build()
            return self._cache[key]

    def classify(self, text):
        if not self.classifier_name:
            raise LookupError("no classifier configured")

        def build():
            import torch
            from transformers import AutoModelForSequenceClassification, AutoTokenizer
            tok = AutoTokenizer.from_pretrained(self.classifier_name)
            model = AutoModelForSequenceClassification.from_pretrained(self.classifier_name)
            model.eval()
            return torch, tok, model

        torch, tok, model = self._get("clf", build)
        with torch.no_grad():
            logits = model(**tok(text, return_tensors="pt", truncation=True)).logits[0]
        scores = torch.softmax(logits, dim=-1).tolist()
        return {"label": int(max(range(len(scores)), key=scores.__getitem__)), "scores": scores}

    def mask_fill(self, tokens, position, top_k, mask_token=None):
        def build():
            from transformers import pipeline
            return pipeline("fill-mask", model=self.mlm_name, top_k=512)

        fill = self._get("mlm", build)
        masked = list(tokens)
        masked[position] = fill.tokenizer.mask_token
        out = fill(" ".join(masked), top_k=top_k)
        return {"candidates": [
            {"token": o["token_str"].strip(), "rank": i, "score": float(o["score"])}
            for i, o in enumerate(out)
        ]}

    def pos_tag(self, tokens):
        if not self.tagger_name:
            return {"tags": ["X"] * len(tokens)}

        def build():
            from transformers import pipeline
            return pipeline("token-classification", model=self.tagger_name,
                            aggregation_strategy="first")

        tag = self._get("pos", build)
        tags = []
        for t in tokens:
            out = tag(t)
            tags.append(out[0]["entity_group"] if out else "X")
        return {"tags": tags}

    def similarity(self, a, b):
        def build():
            from sentence_transformers import SentenceTransformer
            return SentenceTransformer(self.encoder_name)

        enc = self._get("sim", build)
        va, vb = enc.encode([a, b], normalize_embeddings=True)
        return {"value": float((va * vb).sum())}


def make_handler(backends):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def _send(self, status, body):
            data = json.dumps(body).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            if self.path == "/health":
                self._send(200, {"model": backends.model_id, "version": VERSION})
            else:
                self._send(404, {"error": "not found"})

        def do_POST(self):
            try:
                body = json.loads(self.rfile.read(int(self.headers.get("Content-Length", 0))))
                if self.path == "/classify":
                    out = backends.classify(body["text"])
                elif self.path == "/mask_fill":
                    out = backends.mask_fill(body["tokens"], int(body["mask_position"]),
                                             int(body.get("top_k", 50)))
                elif self.path == "/pos_tag":
                    out = backends.pos_tag(body["tokens"])
                elif self.path == "/similarity":
                    out = backends.similarity(body["text_a"], body["text_b"])
                else:
                    self._send(404, {"error": "not found"})
                    return
                out["model"] = backends.model_id
                out["version"] = VERSION
                self._send(200, out)
            except (KeyError, ValueError, TypeError) as e:
                self._send(400, {"error": str(e)})
            except LookupError as e:
                self._send(404, {"error": str(e)})

    return Handler


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8100)
    p.add_argument("--classifier")
    p.add_argument("--mlm", default="bert-base-multilingual-cased")
    p.add_argument("--encoder",
                   default="sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2")
    p.add_argument("--tagger")
    p.add_argument("--model-id")
    a = p.parse_args(argv)
    backends = Backends(a.classifier, a.mlm, a.encoder, a.tagger, a.model_id)
    ThreadingHTTPServer((a.host, a.port), make_handler(backends)).serve_forever()


if __name__ == "__main__":
    main()
