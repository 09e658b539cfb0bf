"""Fit the joint text+link model on a synthetic network and inspect the fit.

The model couples two topic families: WordTopics emit words, DocTopics emit
linked documents, and a row-stochastic transition matrix maps the first onto
the second. Fitting alternates per-document variational E-steps with
closed-form M-steps while the evidence lower bound (ELBO) climbs.
"""

import numpy as np

from topicatlas import ModelParams, TrainConfig, generate_corpus, train
from topicatlas.topicweb import top_documents, top_keywords

# Ground truth with three clearly separated topics: each WordTopic owns a
# block of the vocabulary, each DocTopic concentrates on a block of documents.
K, V, D = 3, 30, 45
beta = np.full((K, V), 0.08 / V)
for k in range(K):
    beta[k, k * 10:(k + 1) * 10] += 0.92 / 10
beta /= beta.sum(axis=1, keepdims=True)
eta = np.full((K, K), 0.05)
np.fill_diagonal(eta, 0.9)
eta /= eta.sum(axis=1, keepdims=True)
omega = np.full((K, D), 0.08 / D)
for k in range(K):
    omega[k, k * 15:(k + 1) * 15] += 0.92 / 15
omega /= omega.sum(axis=1, keepdims=True)
truth = ModelParams(np.full(K, 0.1), beta, eta, omega)

corpus = generate_corpus(truth, doc_lengths=[80] * D, link_counts=[8] * D, seed=1)
print(f"synthetic network: {corpus.D} documents, {corpus.total_word_tokens} words, "
      f"{corpus.total_link_tokens} links")

config = TrainConfig(K_w=3, K_y=3, outer_max_iters=20, seed=4)
model = train(corpus, config)

trace = np.array(model.elbo_trace)
print(f"\ntrained in {len(trace)} outer iterations")
print("ELBO trace (should be non-decreasing):")
for i in range(0, len(trace), 4):
    print(f"  iter {i + 1:2d}: {trace[i]:.2f}")
assert np.all(np.diff(trace) >= -1e-8 * np.abs(trace[:-1]))

print("\ntop words per WordTopic (vocabulary blocks should reappear):")
for k in range(3):
    words = [corpus.vocabulary.terms[i] for i in top_keywords(model, k, m=5)]
    print(f"  topic {k}: {words}")

print("\ntop documents per DocTopic (document blocks should reappear):")
for kp in range(3):
    docs = [corpus.documents[d].id for d in top_documents(model, kp, n=4)]
    print(f"  topic {kp}: {docs}")

print("\nfitted transition matrix (rows: WordTopics, cols: DocTopics):")
print(np.round(model.params.eta, 3))
