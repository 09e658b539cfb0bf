"""Heterogeneous topic web built on top of a fitted model.

Nodes are the two topic kinds (WordTopics over the vocabulary, DocTopics over
documents); edges carry one of three relation kinds whose strength is a
topic-pair co-occurrence probability, reported as a weight relative to the
prior probability of a random edge.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_EDGE_PRIOR = 0.0002
DEFAULT_PRUNE_THRESHOLD = 1.0
KEYWORDS_PER_TOPIC = 10
DOCS_PER_TOPIC = 5


@dataclass
class PosteriorStats:
    """Corpus-level posterior summaries of a fitted model.

    theta_hat:        D x K_w posterior-expected WordTopic mixture per document.
    p_word_topic:     corpus marginal over WordTopics (word-token assignments).
    p_doc_topic:      corpus marginal over DocTopics (link-token assignments).
    word_soft_counts: D x K_w expected word-assignment counts (from phi).
    doc_soft_counts:  expected DocTopic assignment counts (from sigma).
    """

    theta_hat: np.ndarray
    p_word_topic: np.ndarray
    p_doc_topic: np.ndarray
    word_soft_counts: np.ndarray
    doc_soft_counts: np.ndarray


@dataclass
class TopicNode:
    kind: str  # "word" | "doc"
    index: int
    dominance: float
    keywords: list = field(default_factory=list)
    top_documents: list = field(default_factory=list)  # [(doc_id, weight)], doc nodes only

    @property
    def node_id(self):
        return ("w" if self.kind == "word" else "d") + str(self.index)


@dataclass
class TopicEdge:
    kind: str  # "ww" | "dd" | "wd"
    src: str
    dst: str
    cooccurrence: float
    weight: float


@dataclass
class TopicWeb:
    nodes: list
    edges: list
    prior_edge_probability: float
    prune_threshold: float
    provenance: dict = field(default_factory=dict)


def _params_of(model):
    return getattr(model, "params", model)


def posterior_stats(model):
    """Aggregate per-document responsibilities into corpus-level posteriors.

    Document mixtures follow the posterior-expectation rule
    ``theta_ik = (c_ik + alpha_k) / sum_k* (c_ik* + alpha_k*)`` with soft word
    counts ``c_ik`` summed from phi; topic marginals normalize total soft
    counts of word-token (phi) and link-token (sigma) assignments.
    """
    params = model.params
    if model.per_doc is None or any(v is None for v in model.per_doc):
        raise ValueError("model lacks per-document variational state; refit or re-infer")
    D, K_w, K_y = params.D, params.K_w, params.K_y

    word_soft = np.zeros((D, K_w))
    doc_soft = np.zeros(K_y)
    total_links = 0
    for i, var in enumerate(model.per_doc):
        if var.phi.size:
            word_soft[i] = var.phi.sum(axis=0)
        if var.sigma.size:
            doc_soft += var.sigma.sum(axis=0)
        total_links += var.sigma.shape[0]

    theta_hat = word_soft + params.alpha[None, :]
    theta_hat /= theta_hat.sum(axis=1, keepdims=True)

    total_words = word_soft.sum()
    if total_words <= 0:
        raise ValueError("corpus has no word tokens; WordTopic marginal is undefined")
    p_word_topic = word_soft.sum(axis=0) / total_words
    if total_links == 0:
        raise ValueError(
            "corpus has no link tokens; DocTopic statistics are undefined - "
            "use text-only mode (strip links) and skip DocTopic outputs")
    p_doc_topic = doc_soft / doc_soft.sum()
    return PosteriorStats(theta_hat, p_word_topic, p_doc_topic, word_soft, doc_soft)


def word_word_strength(stats, model):
    """Co-occurrence probability of every WordTopic pair.

    p(z1, z2) = sum over DocTopics k' and documents i of
    p(z'=k') * omega[k', i] * theta[i, z1] * theta[i, z2]; the result is a
    symmetric K_w x K_w matrix summing to 1.
    """
    omega = _params_of(model).omega
    doc_weight = stats.p_doc_topic @ omega  # length D
    weighted = stats.theta_hat * doc_weight[:, None]
    return stats.theta_hat.T @ weighted


def doc_doc_strength(stats, model):
    """Co-occurrence probability of every DocTopic pair.

    p(z1', z2') = sum over WordTopics k of p(z=k) * eta[k, z1'] * eta[k, z2'];
    symmetric K_y x K_y, sums to 1.
    """
    eta = _params_of(model).eta
    return eta.T @ (eta * stats.p_word_topic[:, None])


def word_doc_strength(stats, model):
    """Joint probability of (WordTopic, DocTopic): eta row scaled by p(z=k)."""
    eta = _params_of(model).eta
    return stats.p_word_topic[:, None] * eta


def top_keywords(model, k, m=KEYWORDS_PER_TOPIC):
    """Indices of the top-m words of WordTopic ``k``, ties broken by index."""
    row = _params_of(model).beta[k]
    order = np.argsort(-row, kind="stable")
    return order[:m].tolist()


def top_documents(model, k_prime, n=DOCS_PER_TOPIC):
    """Indices of the top-n documents of DocTopic ``k_prime`` by omega mass."""
    row = _params_of(model).omega[k_prime]
    order = np.argsort(-row, kind="stable")
    return order[:n].tolist()


def indicative_words(model, corpus, k_prime, m=KEYWORDS_PER_TOPIC):
    """Summarize DocTopic ``k_prime`` with the words of its heavy documents.

    Ranks words by expectancy ``E(w) = sum_d omega[k', d] * count(w, d)`` and
    returns the top-m terms, ties broken by vocabulary order.
    """
    params = _params_of(model)
    row = params.omega[k_prime]
    expectancy = np.zeros(corpus.V)
    for d, doc in enumerate(corpus.documents):
        if doc.n_words:
            expectancy += row[d] * np.bincount(doc.word_tokens, minlength=corpus.V)
    order = np.argsort(-expectancy, kind="stable")
    return [corpus.vocabulary.terms[i] for i in order[:m]]


def edge_weight(cooccurrence, prior):
    """Edge weight: co-occurrence probability relative to the random-edge prior."""
    return cooccurrence / prior


def _resolve_prior(prior, K_w, K_y):
    if prior == "auto":
        return 1.0 / (K_w * K_y)
    prior = float(prior)
    if prior <= 0:
        raise ValueError("edge prior must be > 0")
    return prior


def build_topic_web(model, corpus, prior=DEFAULT_EDGE_PRIOR,
                    prune_threshold=DEFAULT_PRUNE_THRESHOLD):
    """Assemble the full topic web from a fitted model.

    Edge weight is co-occurrence probability divided by ``prior`` (pass
    ``"auto"`` for 1/(K_w*K_y)); edges with weight below ``prune_threshold``
    are dropped. Word-Word and Doc-Doc self-pairs are never emitted. Node
    labels: top keywords for WordTopics, indicative words plus top documents
    for DocTopics.
    """
    params = model.params
    stats = posterior_stats(model)
    prior = _resolve_prior(prior, params.K_w, params.K_y)

    nodes = []
    for k in range(params.K_w):
        words = [corpus.vocabulary.terms[i] for i in top_keywords(model, k)]
        nodes.append(TopicNode("word", k, float(stats.p_word_topic[k]), words))
    for kp in range(params.K_y):
        words = indicative_words(model, corpus, kp)
        docs = [(corpus.documents[d].id, float(params.omega[kp, d]))
                for d in top_documents(model, kp)]
        nodes.append(TopicNode("doc", kp, float(stats.p_doc_topic[kp]), words, docs))

    ww = word_word_strength(stats, model)
    dd = doc_doc_strength(stats, model)
    wd = word_doc_strength(stats, model)

    edges = []

    def add_edge(kind, src, dst, cooc):
        weight = edge_weight(cooc, prior)
        if weight >= prune_threshold:
            edges.append(TopicEdge(kind, src, dst, float(cooc), float(weight)))

    for k1 in range(params.K_w):
        for k2 in range(k1 + 1, params.K_w):
            add_edge("ww", f"w{k1}", f"w{k2}", ww[k1, k2])
    for k1 in range(params.K_y):
        for k2 in range(k1 + 1, params.K_y):
            add_edge("dd", f"d{k1}", f"d{k2}", dd[k1, k2])
    for k in range(params.K_w):
        for kp in range(params.K_y):
            add_edge("wd", f"w{k}", f"d{kp}", wd[k, kp])

    provenance = {"model": params_hash(params), "corpus": model.corpus_ref}
    return TopicWeb(nodes, edges, prior, prune_threshold, provenance)


def params_hash(params):
    """Content hash of the global parameters (pins graphs to their model)."""
    h = hashlib.sha256()
    for arr in (params.alpha, params.beta, params.eta, params.omega):
        h.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
    return h.hexdigest()


def _format_float(x):
    if not np.isfinite(x):
        raise ValueError("graph export requires finite numbers")
    return "%.10g" % x


def canonical_json(obj):
    """Serialize with sorted keys and floats at 10 significant digits.

    The formatting is stable under parse/re-export, which makes exported
    graphs byte-reproducible.
    """
    if isinstance(obj, dict):
        items = (json.dumps(k, ensure_ascii=False) + ":" + canonical_json(obj[k])
                 for k in sorted(obj))
        return "{" + ",".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if obj is None:
        return "null"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def web_to_payload(web):
    kw = sum(1 for n in web.nodes if n.kind == "word")
    ky = len(web.nodes) - kw
    nodes = []
    for n in web.nodes:
        entry = {
            "id": n.node_id,
            "kind": n.kind,
            "dominance": n.dominance,
            "keywords": list(n.keywords),
            "top_docs": [{"doc": doc_id, "weight": w} for doc_id, w in n.top_documents],
        }
        nodes.append(entry)
    edges = [
        {"kind": e.kind, "src": e.src, "dst": e.dst,
         "cooccurrence": e.cooccurrence, "weight": e.weight}
        for e in web.edges
    ]
    return {
        "meta": {
            "kw": kw,
            "ky": ky,
            "model_hash": web.provenance.get("model", ""),
            "prior": web.prior_edge_probability,
            "threshold": web.prune_threshold,
        },
        "nodes": nodes,
        "edges": edges,
    }


def export_graph(web, destination=None):
    """Emit the graph JSON document; optionally write it to ``destination``."""
    text = canonical_json(web_to_payload(web))
    if destination is not None:
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def reexport_graph_text(text):
    """Parse exported graph JSON and re-serialize it canonically."""
    return canonical_json(json.loads(text))
