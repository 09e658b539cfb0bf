"""Quantitative checks: topic coherence, topic-number selection, held-out CV.

Coherence scores a topic's top words by how often they share documents;
higher (closer to zero) is better. Held-out likelihood freezes the fitted
parameters and scores unseen documents with the variational bound, split into
a text part and a link part.
"""

import numpy as np

from topicatlas import (
    ModelParams,
    TrainConfig,
    generate_corpus,
    run_cv,
    select_topic_number,
    train,
    word_topic_coherence,
)
from topicatlas.evaluation import coherence_report, heldout_csv

K, V, D = 3, 24, 30
beta = np.full((K, V), 0.08 / V)
for k in range(K):
    beta[k, k * 8:(k + 1) * 8] += 0.92 / 8
beta /= beta.sum(axis=1, keepdims=True)
eta = np.full((K, K), 0.05)
np.fill_diagonal(eta, 0.9)
eta /= eta.sum(axis=1, keepdims=True)
omega = np.full((K, D), 0.08 / D)
for k in range(K):
    omega[k, k * 10:(k + 1) * 10] += 0.92 / 10
omega /= omega.sum(axis=1, keepdims=True)
truth = ModelParams(np.full(K, 0.1), beta, eta, omega)
corpus = generate_corpus(truth, [40] * D, [6] * D, seed=5)

model = train(corpus, TrainConfig(K_w=3, K_y=3, outer_max_iters=10, seed=6))

print("per-topic coherence of the fitted WordTopics:")
for k in range(3):
    print(f"  topic {k}: {word_topic_coherence(model, corpus, k, m=5):.3f}")

report = coherence_report(model, corpus, kind="doc", m=5)
print(f"mean DocTopic coherence (via indicative words): {report.mean:.3f}")

# Topic-number selection fits text-only models over a candidate grid and
# keeps the coherence argmax; the generating K should win here.
config = TrainConfig(K_w=2, K_y=2, outer_max_iters=8, outer_tol=1e-6, seed=7)
best = select_topic_number(corpus, [2, 3, 6], config)
print(f"\nselected topic number: {best} (ground truth 3)")

# Five-fold cross validation: each fold is scored under parameters fit on the
# other four; parameter dimensions span the full corpus so held-out link
# targets stay scorable.
cv = run_cv(corpus, TrainConfig(K_w=3, K_y=3, outer_max_iters=6, seed=8), n_folds=5)
print("\nheld-out log-likelihood bounds per fold:")
print(heldout_csv(cv), end="")
print(f"mean total: {cv.mean_total:.2f}")
