"""End-to-end command-line and HTTP service tests."""

import hashlib
import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest

from topicatlas.cli import main
from topicatlas.corpus import ingest_corpus, save_corpus
from topicatlas.inference import (
    ModelParams,
    TrainConfig,
    generate_corpus,
    load_model,
    train,
    save_model,
)
from topicatlas.serve import make_server
from topicatlas.topicweb import build_topic_web, export_graph


def write_jsonl(path, corpus):
    """Re-emit a generated corpus as ingestible records."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            rec = {
                "id": doc.id,
                "text": doc.raw_text,
                "links": [corpus.documents[j].id for j in doc.link_tokens],
            }
            fh.write(json.dumps(rec) + "\n")


def block_params(K, V, D):
    beta = np.full((K, V), 0.08 / V)
    for k in range(K):
        beta[k, k * (V // K):(k + 1) * (V // K)] += 0.92 / (V // K)
    beta /= beta.sum(axis=1, keepdims=True)
    eta = np.full((K, K), 0.025) + np.diag([0.95 - 0.025] * K)
    eta /= eta.sum(axis=1, keepdims=True)
    omega = np.full((K, D), 0.08 / D)
    for k in range(K):
        omega[k, k * (D // K):(k + 1) * (D // K)] += 0.92 / (D // K)
    omega /= omega.sum(axis=1, keepdims=True)
    return ModelParams(np.full(K, 0.08), beta, eta, omega)


@pytest.fixture(scope="module")
def network_jsonl(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    truth = block_params(2, 12, 12)
    corpus = generate_corpus(truth, [18] * 12, [4] * 12, seed=40)
    path = root / "network.jsonl"
    write_jsonl(path, corpus)
    return path


TRAIN_FLAGS = ["--kw", "2", "--ky", "2", "--min-count", "1",
               "--outer-iters", "4", "--seed", "11"]


class TestTrainCommand:
    def test_writes_checkpoint_trace_manifest(self, network_jsonl, tmp_path):
        out = tmp_path / "run"
        code = main(["train", str(network_jsonl), "--out", str(out)] + TRAIN_FLAGS)
        assert code == 0
        assert (out / "model.bin").exists()
        trace_lines = (out / "elbo_trace.csv").read_text().splitlines()
        assert trace_lines[0] == "iteration,elbo"
        assert len(trace_lines) >= 2
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "train"
        assert manifest["config"]["K_w"] == 2
        assert manifest["seed"] == 11
        assert set(manifest["hashes"]) == {"corpus", "model"}

    def test_same_seed_identical_checkpoint(self, network_jsonl, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["train", str(network_jsonl), "--out", str(out)]
                        + TRAIN_FLAGS) == 0
            outs.append(hashlib.sha256((out / "model.bin").read_bytes()).hexdigest())
        assert outs[0] == outs[1]

    def test_missing_corpus_path_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["train"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_unreadable_corpus_fails_cleanly(self, tmp_path, capsys):
        code = main(["train", str(tmp_path / "missing.jsonl"), "--out",
                     str(tmp_path / "o")] + TRAIN_FLAGS)
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_accepts_corpus_dump_input(self, network_jsonl, tmp_path):
        corpus = ingest_corpus(str(network_jsonl), min_count=1)
        dump = tmp_path / "corpus.bin"
        save_corpus(corpus, dump)
        code = main(["train", str(dump), "--out", str(tmp_path / "run")] + TRAIN_FLAGS)
        assert code == 0


class TestExportWebCommand:
    def test_export_after_train(self, network_jsonl, tmp_path):
        out = tmp_path / "run"
        assert main(["train", str(network_jsonl), "--out", str(out)] + TRAIN_FLAGS) == 0
        graph = tmp_path / "web.json"
        code = main(["export-web", str(out / "model.bin"), str(network_jsonl),
                     "--out", str(graph), "--min-count", "1", "--threshold", "0"])
        assert code == 0
        payload = json.loads(graph.read_text())
        assert payload["meta"]["prior"] == 0.0002
        assert payload["meta"]["kw"] == 2 and payload["meta"]["ky"] == 2
        # threshold 0 keeps every pair
        assert len(payload["edges"]) == 1 + 1 + 4
        assert (tmp_path / "web.json.manifest.json").exists()

    def test_hash_mismatch_refused(self, network_jsonl, tmp_path, capsys):
        out = tmp_path / "run"
        assert main(["train", str(network_jsonl), "--out", str(out)] + TRAIN_FLAGS) == 0
        other = tmp_path / "other.jsonl"
        other.write_text('{"id": "x", "text": "one token", "links": []}\n')
        code = main(["export-web", str(out / "model.bin"), str(other),
                     "--out", str(tmp_path / "web.json"), "--min-count", "1"])
        assert code != 0
        assert "refusing" in capsys.readouterr().err


class TestEvaluateCommand:
    def test_protocol_outputs(self, network_jsonl, tmp_path):
        out = tmp_path / "eval"
        code = main(["evaluate", str(network_jsonl), "--out", str(out),
                     "--folds", "3", "--min-links", "1", "--kw", "2", "--ky", "2",
                     "--min-count", "1", "--outer-iters", "2", "--seed", "3"])
        assert code == 0
        rows = (out / "heldout.csv").read_text().splitlines()
        assert rows[0] == "fold,text_ll,link_ll,total"
        assert len(rows) == 1 + 3
        assert (out / "word_coherence.csv").exists()
        assert (out / "doc_coherence.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["heldout"]["n_folds"] == 3
        assert (out / "manifest.json").exists()


@pytest.fixture(scope="module")
def service(tmp_path_factory):
    root = tmp_path_factory.mktemp("serve")
    truth = block_params(2, 12, 12)
    corpus = generate_corpus(truth, [18] * 12, [4] * 12, seed=41)
    model = train(corpus, TrainConfig(K_w=2, K_y=2, outer_max_iters=4, seed=12))
    model_path = root / "model.bin"
    save_model(model, model_path)
    graph_path = root / "web.json"
    export_graph(build_topic_web(model, corpus, prune_threshold=0.0), graph_path)
    checkpoint = load_model(model_path)
    server = make_server(graph_path, corpus=corpus, checkpoint=checkpoint, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = "http://127.0.0.1:%d" % server.server_address[1]
    yield base, graph_path, corpus
    server.shutdown()
    server.server_close()


def fetch(url):
    with urllib.request.urlopen(url) as resp:
        return resp.status, resp.read()


class TestServe:
    def test_graph_byte_equal_to_file(self, service):
        base, graph_path, _ = service
        status, body = fetch(base + "/api/graph")
        assert status == 200
        assert body == graph_path.read_bytes()

    def test_repeated_requests_identical(self, service):
        base, _, _ = service
        assert fetch(base + "/api/topic/w0") == fetch(base + "/api/topic/w0")

    def test_topic_detail_edges_sorted(self, service):
        base, _, _ = service
        status, body = fetch(base + "/api/topic/w0")
        assert status == 200
        payload = json.loads(body)
        weights = [e["weight"] for e in payload["edges"]]
        assert weights == sorted(weights, reverse=True)
        assert payload["kind"] == "word"
        assert len(payload["keywords"]) == 10

    def test_doc_topic_detail_has_titles(self, service):
        base, _, corpus = service
        _, body = fetch(base + "/api/topic/d0")
        payload = json.loads(body)
        # the DocTopic detail drives the UI panel: 5 documents, 10 indicative words
        assert len(payload["top_docs"]) == 5
        assert len(payload["keywords"]) == 10
        for entry in payload["top_docs"]:
            assert entry["title"] == corpus.documents[
                [d.id for d in corpus.documents].index(entry["doc"])].raw_text[:200]

    def test_unknown_topic_404(self, service):
        base, _, _ = service
        with pytest.raises(urllib.error.HTTPError) as exc:
            fetch(base + "/api/topic/w999")
        assert exc.value.code == 404

    def test_malformed_topic_400(self, service):
        base, _, _ = service
        with pytest.raises(urllib.error.HTTPError) as exc:
            fetch(base + "/api/topic/zzz")
        assert exc.value.code == 400

    def test_document_detail(self, service):
        base, _, corpus = service
        doc_id = corpus.documents[0].id
        status, body = fetch(base + f"/api/doc/{doc_id}")
        assert status == 200
        payload = json.loads(body)
        assert payload["snippet"] == corpus.documents[0].raw_text[:200]
        theta = payload["theta"]
        assert len(theta) == 2
        np.testing.assert_allclose(sum(theta), 1.0, atol=1e-9)

    def test_unknown_document_404(self, service):
        base, _, _ = service
        with pytest.raises(urllib.error.HTTPError) as exc:
            fetch(base + "/api/doc/nope")
        assert exc.value.code == 404

    def test_fallback_index_page(self, service):
        base, _, _ = service
        status, body = fetch(base + "/")
        assert status == 200
        assert b"topicatlas" in body
