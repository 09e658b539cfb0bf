"""Derive the heterogeneous topic web from a fitted model and export it.

The web has one node per topic of either kind, sized by topic dominance, and
three kinds of edges (WordTopic-WordTopic, DocTopic-DocTopic, and the cross
kind) weighted by how strongly two topics co-occur relative to a random-edge
prior. Edges no stronger than the prior are pruned by default.
"""

import json

import numpy as np

from topicatlas import ModelParams, TrainConfig, generate_corpus, train
from topicatlas.topicweb import (
    build_topic_web,
    doc_doc_strength,
    export_graph,
    posterior_stats,
    word_doc_strength,
    word_word_strength,
)

rng = np.random.default_rng(0)
K, V, D = 3, 24, 30
mats = [rng.random((K, V)) + 0.1, rng.random((K, K)) + 0.1, rng.random((K, D)) + 0.1]
beta, eta, omega = (m / m.sum(axis=1, keepdims=True) for m in mats)
truth = ModelParams(np.full(K, 0.2), beta, eta, omega)
corpus = generate_corpus(truth, [50] * D, [6] * D, seed=2)

model = train(corpus, TrainConfig(K_w=3, K_y=3, outer_max_iters=10, seed=3))

# Posterior summaries feed every relation strength.
stats = posterior_stats(model)
print("WordTopic dominance p(z|corpus):   ", np.round(stats.p_word_topic, 3))
print("DocTopic dominance  p(z'|corpus):  ", np.round(stats.p_doc_topic, 3))

ww = word_word_strength(stats, model)
dd = doc_doc_strength(stats, model)
wd = word_doc_strength(stats, model)
print("\neach strength matrix is a joint distribution over topic pairs:")
print(f"  sums: ww={ww.sum():.9f} dd={dd.sum():.9f} wd={wd.sum():.9f}")
print(f"  ww symmetric: {np.allclose(ww, ww.T, atol=1e-12)}")

# With few topics the default random-edge prior (0.0002, sized for ~70x70
# topic grids) makes every weight huge; 'auto' uses 1/(K_w*K_y) instead.
web = build_topic_web(model, corpus, prior="auto", prune_threshold=1.0)
print(f"\nweb: {len(web.nodes)} nodes, {len(web.edges)} edges "
      f"(prior {web.prior_edge_probability:.4f}, threshold {web.prune_threshold})")
for edge in sorted(web.edges, key=lambda e: -e.weight)[:5]:
    print(f"  {edge.kind} {edge.src} -- {edge.dst}: weight {edge.weight:.2f}")

# The export is canonical JSON: sorted keys, 10-significant-digit floats,
# byte-stable under a parse/re-export round trip.
text = export_graph(web, "topic_web_demo.json")
payload = json.loads(text)
print(f"\nexported graph: {len(payload['nodes'])} nodes, "
      f"{len(payload['edges'])} edges -> topic_web_demo.json")
node = payload["nodes"][0]
print(f"sample node {node['id']}: dominance {node['dominance']:.3f}, "
      f"keywords {node['keywords'][:3]}...")
