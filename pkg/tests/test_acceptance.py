"""Acceptance suite: the binding correctness criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass line per
criterion. Tolerances are fixed here and not meant to be tuned.
"""

import json
import time

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from topicatlas.cli import main
from topicatlas.corpus import Corpus, Document, Vocabulary, strip_links
from topicatlas.evaluation import heldout_log_likelihood, topic_coherence
from topicatlas.inference import (
    DocVariational,
    ModelParams,
    SuffStats,
    TrainConfig,
    TrainedModel,
    compute_elbo,
    e_step_document,
    generate_corpus,
    init_model,
    m_step,
    train,
    update_alpha,
)
from topicatlas.topicweb import (
    PosteriorStats,
    build_topic_web,
    doc_doc_strength,
    edge_weight,
    indicative_words,
    posterior_stats,
    word_doc_strength,
    word_word_strength,
)


def block_truth(K=3, V=30, D=60, mass=0.92):
    """Well-separated ground truth used by the synthetic-data criteria."""
    beta = np.full((K, V), (1 - mass) / V)
    for k in range(K):
        beta[k, k * (V // K):(k + 1) * (V // K)] += mass / (V // K)
    beta /= beta.sum(axis=1, keepdims=True)
    eta = np.full((K, K), 0.025)
    np.fill_diagonal(eta, 0.95)
    eta /= eta.sum(axis=1, keepdims=True)
    omega = np.full((K, D), (1 - mass) / D)
    for k in range(K):
        omega[k, k * (D // K):(k + 1) * (D // K)] += mass / (D // K)
    omega /= omega.sum(axis=1, keepdims=True)
    return ModelParams(np.full(K, 0.08), beta, eta, omega)


def synthetic_corpus(seed=1, words=110, links=12, K=3, V=30, D=60):
    return generate_corpus(block_truth(K, V, D), [words] * D, [links] * D, seed=seed)


def test_elbo_monotonicity():
    """Outer ELBO trace non-decreasing within 1e-8 relative slack, >= 20 iters, < 30 s."""
    corpus = synthetic_corpus(seed=7)
    cfg = TrainConfig(K_w=3, K_y=3, outer_max_iters=22, outer_tol=1e-13, seed=5)
    started = time.perf_counter()
    model = train(corpus, cfg)
    elapsed = time.perf_counter() - started
    trace = np.array(model.elbo_trace)
    assert len(trace) >= 20
    diffs = np.diff(trace)
    assert np.all(diffs >= -1e-8 * np.abs(trace[:-1]))
    assert elapsed < 30.0
    print(f"PASS elbo-monotonicity: {len(trace)} iterations, {elapsed:.1f}s")


def test_normalization_suite():
    """After every M-step and E-step: stochastic rows at 1e-9, exact gamma identity."""
    corpus = synthetic_corpus(seed=8, words=40, links=6, D=24)
    cfg = TrainConfig(K_w=3, K_y=3, seed=9)
    params = init_model(corpus, cfg)
    per_doc = None
    for _ in range(4):
        stats = SuffStats.zeros(params.K_w, params.K_y, params.V, params.D)
        new_per_doc = []
        for i, doc in enumerate(corpus.documents):
            state = per_doc[i] if per_doc is not None else None
            var, _ = e_step_document(doc, params, cfg, state=state)
            for mat in (var.phi, var.lam, var.sigma):
                if mat.size:
                    np.testing.assert_allclose(mat.sum(axis=1), 1.0, rtol=0, atol=1e-9)
            recomputed = params.alpha + var.phi.sum(axis=0) + var.lam.sum(axis=0)
            np.testing.assert_array_equal(var.gamma, recomputed)
            stats.accumulate(doc, var)
            new_per_doc.append(var)
        alpha = update_alpha(stats.gamma_log_sums, params.alpha, stats.n_docs)
        params = m_step(stats, cfg, alpha)
        for mat in (params.beta, params.eta, params.omega):
            np.testing.assert_allclose(mat.sum(axis=1), 1.0, rtol=0, atol=1e-9)
        per_doc = new_per_doc
    print("PASS normalization-suite: 4 EM iterations checked")


def test_lda_reduction_bitwise():
    """Zero-link training is bitwise identical to a links-stripped run."""
    linked = synthetic_corpus(seed=10, words=30, links=5, D=18)
    stripped = strip_links(linked)
    zero_link = Corpus(
        [Document(d.id, d.word_tokens.copy(), np.array([], dtype=np.int64), d.raw_text)
         for d in linked.documents], linked.vocabulary)
    cfg = TrainConfig(K_w=3, K_y=3, outer_max_iters=6, seed=11)
    a, b = train(stripped, cfg), train(zero_link, cfg)
    assert np.array_equal(a.params.beta, b.params.beta)
    assert np.array_equal(a.params.eta, b.params.eta)
    assert np.array_equal(a.params.omega, b.params.omega)
    assert np.array_equal(a.params.alpha, b.params.alpha)
    assert a.elbo_trace == b.elbo_trace
    for va, vb in zip(a.per_doc, b.per_doc):
        assert np.array_equal(va.gamma, vb.gamma)
        assert np.array_equal(va.phi, vb.phi)
        assert va.lam.shape == (0, 3) and va.sigma.shape == (0, 3)
        assert vb.lam.shape == (0, 3) and vb.sigma.shape == (0, 3)
    print("PASS lda-reduction: bitwise-identical parameters and state")


def test_single_topic_exact_oracle():
    """K=1 bound equals direct multinomial log likelihood within 1e-9."""
    params = ModelParams(np.array([0.9]), np.array([[0.7, 0.3]]),
                         np.array([[1.0]]), np.array([[0.6, 0.4]]))
    docs = [Document("x", np.array([0, 0, 1]), np.array([1])),
            Document("y", np.array([1]), np.array([0, 0]))]
    corpus = Corpus(docs, Vocabulary(["a", "b"]))
    cfg = TrainConfig(K_w=1, K_y=1)
    exact = (2 * np.log(0.7) + 2 * np.log(0.3)   # word tokens of both docs
             + np.log(0.4) + 2 * np.log(0.6))    # link tokens of both docs
    per_doc = [e_step_document(d, params, cfg)[0] for d in docs]
    np.testing.assert_allclose(compute_elbo(corpus, params, per_doc), exact,
                               rtol=0, atol=1e-9)
    text, link = heldout_log_likelihood(params, docs, cfg)
    np.testing.assert_allclose(text + link, exact, rtol=0, atol=1e-9)
    print("PASS single-topic-exact: bound == multinomial log likelihood")


def best_permutation_min_cosine(estimate, truth):
    est = estimate / np.linalg.norm(estimate, axis=1, keepdims=True)
    ref = truth / np.linalg.norm(truth, axis=1, keepdims=True)
    cos = est @ ref.T
    rows, cols = linear_sum_assignment(-cos)
    return cos[rows, cols].min()


def test_parameter_recovery():
    """3 of 3 data seeds recover beta and omega (cosine > 0.9) in <= 3 restarts."""
    truth = block_truth()
    started = time.perf_counter()
    for data_seed in (1, 2, 3):
        corpus = generate_corpus(truth, [110] * 60, [12] * 60, seed=data_seed)
        recovered = False
        for restart in range(3):
            cfg = TrainConfig(K_w=3, K_y=3, outer_max_iters=25, outer_tol=1e-5,
                              seed=100 + restart)
            model = train(corpus, cfg)
            cos_beta = best_permutation_min_cosine(model.params.beta, truth.beta)
            cos_omega = best_permutation_min_cosine(model.params.omega, truth.omega)
            if cos_beta > 0.9 and cos_omega > 0.9:
                recovered = True
                break
        assert recovered, f"data seed {data_seed} failed all restarts"
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    print(f"PASS parameter-recovery: 3/3 seeds, {elapsed:.1f}s")


def test_relation_strength_normalization():
    """Strength matrices: sum 1 (1e-6), symmetry (1e-12), brute-force match (1e-12)."""
    corpus = synthetic_corpus(seed=12, words=35, links=6, D=24)
    model = train(corpus, TrainConfig(K_w=3, K_y=3, outer_max_iters=6, seed=13))
    stats = posterior_stats(model)
    ww = word_word_strength(stats, model)
    dd = doc_doc_strength(stats, model)
    wd = word_doc_strength(stats, model)
    for mat in (ww, dd, wd):
        assert np.all(mat >= 0)
        np.testing.assert_allclose(mat.sum(), 1.0, rtol=0, atol=1e-6)
    np.testing.assert_allclose(ww, ww.T, rtol=0, atol=1e-12)
    np.testing.assert_allclose(dd, dd.T, rtol=0, atol=1e-12)

    # toy brute force over (k', i, k1, k2)
    theta_hat = np.array([[0.7, 0.3], [0.2, 0.8]])
    omega = np.array([[0.9, 0.1], [0.4, 0.6]])
    p_doc = np.array([0.25, 0.75])
    toy_stats = PosteriorStats(theta_hat, np.array([0.5, 0.5]), p_doc,
                               theta_hat.copy(), p_doc.copy())
    toy_params = ModelParams(np.array([0.5, 0.5]), np.full((2, 2), 0.5),
                             np.full((2, 2), 0.5), omega)
    brute = np.zeros((2, 2))
    for kp in range(2):
        for i in range(2):
            for k1 in range(2):
                for k2 in range(2):
                    brute[k1, k2] += (p_doc[kp] * omega[kp, i]
                                      * theta_hat[i, k1] * theta_hat[i, k2])
    np.testing.assert_allclose(word_word_strength(toy_stats, toy_params), brute,
                               rtol=0, atol=1e-12)
    print("PASS relation-strength: normalization, symmetry, brute-force oracle")


def test_hand_computed_oracles():
    """Frozen hand-evaluated values at their stated tolerances."""
    # word-responsibility update: beta column (0.9, 0.2) at gamma=(1,1)
    params = ModelParams(np.array([0.5, 0.5]), np.array([[0.9, 0.1], [0.2, 0.8]]),
                         np.array([[1.0], [1.0]]), np.array([[1.0]]))
    cfg = TrainConfig(K_w=2, K_y=1, inner_max_iters=1)
    var, _ = e_step_document(Document("d", np.array([0]), np.array([], dtype=np.int64)),
                             params, cfg)
    np.testing.assert_allclose(var.phi[0], [0.8182, 0.1818], rtol=0, atol=1e-4)

    # posterior mixture: four words fully on topic 1, alpha = 0.01
    alpha = np.array([0.01, 0.01])
    p2 = ModelParams(alpha, np.full((2, 2), 0.5), np.full((2, 2), 0.5),
                     np.full((2, 2), 0.5))
    phi = np.tile([1.0, 0.0], (4, 1))
    var1 = DocVariational(alpha + phi.sum(0), phi, np.zeros((0, 2)),
                          np.array([[1.0, 0.0]]))
    var2 = DocVariational(alpha.copy(), np.zeros((0, 2)), np.zeros((0, 2)),
                          np.array([[1.0, 0.0]]))
    model = TrainedModel(p2, [var1, var2], [0.0], "hash")
    stats = posterior_stats(model)
    np.testing.assert_allclose(stats.theta_hat[0], [0.99751, 0.00249], rtol=0, atol=1e-5)

    # indicative words: omega (0.7, 0.3), counts {a:2,b:1} / {b:4} -> "b" first
    vocab = Vocabulary(["a", "b"])
    docs = [Document("d1", np.array([0, 0, 1]), np.array([], dtype=np.int64)),
            Document("d2", np.array([1, 1, 1, 1]), np.array([], dtype=np.int64))]
    ind_corpus = Corpus(docs, vocab)
    p3 = ModelParams(np.array([0.5]), np.array([[0.5, 0.5]]), np.array([[1.0]]),
                     np.array([[0.7, 0.3]]))
    assert indicative_words(p3, ind_corpus, 0, m=1) == ["b"]

    # doc-doc entry: p(z)=(0.6,0.4), eta=[[.7,.3],[.2,.8]] -> 0.31
    dd_stats = PosteriorStats(np.ones((2, 2)) / 2, np.array([0.6, 0.4]),
                              np.array([0.5, 0.5]), np.ones((2, 2)), np.ones(2))
    p4 = ModelParams(np.array([0.5, 0.5]), np.full((2, 2), 0.5),
                     np.array([[0.7, 0.3], [0.2, 0.8]]), np.full((2, 2), 0.5))
    np.testing.assert_allclose(doc_doc_strength(dd_stats, p4)[0, 0], 0.31,
                               rtol=0, atol=1e-12)

    # coherence toys
    def toy(token_lists):
        terms = sorted({t for toks in token_lists for t in toks})
        v = Vocabulary(terms)
        ds = [Document(f"d{i}", np.array([v.index[t] for t in toks], dtype=np.int64),
                       np.array([], dtype=np.int64)) for i, toks in enumerate(token_lists)]
        return Corpus(ds, v)

    cooccur = toy([["a", "b"]] * 4 + [["c"]])
    np.testing.assert_allclose(topic_coherence(["a", "b"], cooccur), np.log(5 / 4),
                               rtol=0, atol=1e-6)
    disjoint = toy([["a"]] * 5 + [["b"]])
    np.testing.assert_allclose(topic_coherence(["a", "b"], disjoint), np.log(1 / 5),
                               rtol=0, atol=1e-6)
    print("PASS hand-oracles: phi, theta-hat, indicative words, doc-doc, coherence")


def test_protocol_reproduction(tmp_path):
    """evaluate --folds 5 --min-links 3 end-to-end; weight 0.003/0.0002 == 15."""
    corpus = synthetic_corpus(seed=14, words=20, links=5, K=2, V=12, D=15)
    jsonl = tmp_path / "network.jsonl"
    with open(jsonl, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(json.dumps({
                "id": doc.id,
                "text": doc.raw_text,
                "links": [corpus.documents[j].id for j in doc.link_tokens],
            }) + "\n")
    out = tmp_path / "eval"
    code = main(["evaluate", str(jsonl), "--out", str(out),
                 "--folds", "5", "--min-links", "3",
                 "--kw", "2", "--ky", "2", "--min-count", "1",
                 "--outer-iters", "2", "--seed", "20"])
    assert code == 0
    rows = (out / "heldout.csv").read_text().splitlines()
    assert rows[0] == "fold,text_ll,link_ll,total"
    assert len(rows) == 1 + 5

    assert edge_weight(0.003, 0.0002) == 15.0
    # the same ratio through the full export path
    model = train(corpus, TrainConfig(K_w=2, K_y=2, outer_max_iters=2, seed=21))
    web = build_topic_web(model, corpus, prior=0.0002, prune_threshold=0.0)
    for edge in web.edges:
        assert edge.weight == edge_weight(edge.cooccurrence, 0.0002)
    print("PASS protocol-reproduction: 5 CV rows; weight ratio exact")
