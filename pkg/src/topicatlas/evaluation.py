"""Model assessment: topic coherence, topic-number selection, held-out CV."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace

import numpy as np

from .corpus import Document, split_folds, strip_links
from .inference import document_elbo_parts, e_step_document, train
from .topicweb import indicative_words, top_keywords

logger = logging.getLogger(__name__)

COHERENCE_TOP_WORDS = 10


@dataclass
class CoherenceReport:
    """Per-topic coherence scores plus their arithmetic mean."""

    per_topic: dict
    mean: float
    top_words_used: dict

    @classmethod
    def from_scores(cls, per_topic, top_words_used):
        if not per_topic:
            raise ValueError("coherence report needs at least one topic")
        mean = float(np.mean(list(per_topic.values())))
        return cls(dict(per_topic), mean, dict(top_words_used))


@dataclass
class HeldoutReport:
    """Per-fold held-out log-likelihood bounds and their mean."""

    per_fold: dict  # fold -> (text_loglik, link_loglik, total)
    mean_total: float
    n_folds: int


def _doc_frequency_sets(corpus, words):
    """Map each word to the set of document positions containing it."""
    wanted = {w: set() for w in words}
    for i, doc in enumerate(corpus.documents):
        if not doc.n_words:
            continue
        present = {corpus.vocabulary.terms[t] for t in np.unique(doc.word_tokens)}
        for w in present & wanted.keys():
            wanted[w].add(i)
    return wanted


def topic_coherence(top_words, corpus):
    """Document co-occurrence coherence of a ranked word list.

    Score = sum over ranked pairs (l < m) of
    ``log((D(v_m, v_l) + 1) / D(v_l))`` where D counts documents containing a
    word (or both words). Words absent from the corpus are skipped with a
    warning; fewer than two usable words is an error.
    """
    doc_sets = _doc_frequency_sets(corpus, top_words)
    usable = []
    for w in top_words:
        if doc_sets[w]:
            usable.append(w)
        else:
            logger.warning("coherence: word %r occurs in no document; skipped", w)
    if len(usable) < 2:
        raise ValueError("fewer than 2 usable words for coherence")
    score = 0.0
    for m in range(1, len(usable)):
        for l in range(m):
            co = len(doc_sets[usable[m]] & doc_sets[usable[l]])
            score += np.log((co + 1) / len(doc_sets[usable[l]]))
    return float(score)


def doc_topic_coherence(model, corpus, k_prime, m=COHERENCE_TOP_WORDS):
    """Coherence of a DocTopic, scored through its indicative words."""
    return topic_coherence(indicative_words(model, corpus, k_prime, m), corpus)


def word_topic_coherence(model, corpus, k, m=COHERENCE_TOP_WORDS):
    """Coherence of a WordTopic's top keywords."""
    words = [corpus.vocabulary.terms[i] for i in top_keywords(model, k, m)]
    return topic_coherence(words, corpus)


def coherence_report(model, corpus, kind="word", m=COHERENCE_TOP_WORDS):
    """Score every topic of one kind; topic ids are ``w<k>`` / ``d<k'>``."""
    params = model.params
    scores, used = {}, {}
    if kind == "word":
        topics = [(f"w{k}", [corpus.vocabulary.terms[i] for i in top_keywords(model, k, m)])
                  for k in range(params.K_w)]
    elif kind == "doc":
        topics = [(f"d{kp}", indicative_words(model, corpus, kp, m))
                  for kp in range(params.K_y)]
    else:
        raise ValueError(f"unknown topic kind {kind!r}")
    for topic_id, words in topics:
        scores[topic_id] = topic_coherence(words, corpus)
        used[topic_id] = len(words)
    return CoherenceReport.from_scores(scores, used)


def select_topic_number(corpus, candidates, config):
    """Pick the candidate topic count with the best mean coherence.

    Each candidate is fit text-only (links stripped) with K_w = K_y = K; mean
    coherence of the WordTopics decides, ties going to the smaller K. Failed
    candidates are skipped with a warning.
    """
    if not candidates:
        raise ValueError("no candidate topic numbers")
    text_corpus = strip_links(corpus)
    scores = {}
    for K in candidates:
        cfg = replace(config, K_w=int(K), K_y=int(K))
        try:
            model = train(text_corpus, cfg)
            report = coherence_report(model, text_corpus, kind="word")
        except (ValueError, ArithmeticError) as exc:
            logger.warning("candidate K=%d failed: %s", K, exc)
            continue
        scores[int(K)] = report.mean
        logger.info("candidate K=%d mean coherence %.4f", K, report.mean)
    if not scores:
        raise ValueError("every candidate topic number failed")
    best = max(sorted(scores), key=lambda K: scores[K])
    return best


def heldout_log_likelihood(params, test_docs, config):
    """Variational lower bound on held-out documents under frozen parameters.

    Runs the per-document E-step with the trained globals and reports the
    document bounds summed over the test set, split into text terms and link
    terms. Links whose target lies outside omega's support are skipped (and
    counted in a warning).
    """
    if not test_docs:
        raise ValueError("empty test set")
    D = params.D
    text_total, link_total, skipped = 0.0, 0.0, 0
    for doc in test_docs:
        links = doc.link_tokens
        in_support = links[links < D] if len(links) else links
        skipped += len(links) - len(in_support)
        if len(in_support) != len(links):
            doc = Document(doc.id, doc.word_tokens, in_support, doc.raw_text)
        var, _ = e_step_document(doc, params, config)
        text, link = document_elbo_parts(doc, params, var)
        text_total += text
        link_total += link
    if skipped:
        logger.warning("held-out scoring skipped %d links with out-of-support targets", skipped)
    return float(text_total), float(link_total)


def run_cv(corpus, config, n_folds=5):
    """K-fold held-out evaluation: train on all but one fold, score the rest.

    Model dimensions span the full corpus so held-out link targets remain in
    omega's support; folds come from a seeded permutation (``config.seed``).
    """
    folds = split_folds(corpus, n_folds, config.seed)
    per_fold = {}
    for f in range(n_folds):
        train_idx, test_idx = folds.split(f)
        model = train(corpus, config, doc_indices=train_idx)
        test_docs = [corpus.documents[i] for i in test_idx]
        text, link = heldout_log_likelihood(model.params, test_docs, config)
        per_fold[f] = (text, link, text + link)
        logger.info("fold %d: text %.2f link %.2f total %.2f", f, text, link, text + link)
    mean_total = float(np.mean([v[2] for v in per_fold.values()]))
    return HeldoutReport(per_fold, mean_total, n_folds)


def coherence_csv(report):
    lines = ["topic_id,score"]
    lines += [f"{tid},{report.per_topic[tid]!r}" for tid in report.per_topic]
    return "\n".join(lines) + "\n"


def heldout_csv(report):
    lines = ["fold,text_ll,link_ll,total"]
    for f in sorted(report.per_fold):
        text, link, total = report.per_fold[f]
        lines.append(f"{f},{text!r},{link!r},{total!r}")
    return "\n".join(lines) + "\n"


def summary_json(coherence_reports=None, heldout=None):
    """JSON summary combining coherence and held-out results."""
    payload = {}
    if coherence_reports:
        payload["coherence"] = {
            kind: {"mean": rep.mean, "per_topic": rep.per_topic}
            for kind, rep in coherence_reports.items()
        }
    if heldout is not None:
        payload["heldout"] = {
            "n_folds": heldout.n_folds,
            "mean_total": heldout.mean_total,
            "per_fold": {
                str(f): {"text_ll": v[0], "link_ll": v[1], "total": v[2]}
                for f, v in heldout.per_fold.items()
            },
        }
    return json.dumps(payload, sort_keys=True, indent=2)
