"""Walk through corpus handling: ingest records, vocabulary, filtering, folds.

A text network is a set of documents that both carry text and point at each
other. The input format is one JSON record per line with an id, the text
(raw string or pre-split tokens), and the ids of linked documents.
"""

import json

from topicatlas import (
    build_vocabulary,
    filter_by_link_count,
    ingest_corpus,
    split_folds,
    tokenize,
)

records = [
    {"id": "lda", "text": "latent topic mixtures for text corpora",
     "links": ["plsa"]},
    {"id": "plsa", "text": "probabilistic semantic analysis of text",
     "links": ["lda"]},
    {"id": "linklda", "text": "joint topic models for text and citations",
     "links": ["lda", "plsa"]},
    {"id": "rtm", "text": "relational topic models predict citations",
     "links": ["lda", "linklda"]},
    {"id": "tfidf", "text": "term weighting without any citation links",
     "links": []},
    {"id": "survey", "text": "a survey of topic models and text mining",
     "links": ["lda", "plsa", "linklda", "rtm"]},
]
lines = [json.dumps(r) for r in records]

corpus = ingest_corpus(lines, min_count=1)
print(f"ingested {corpus.D} documents, vocabulary size {corpus.V}")
print(f"total word tokens {corpus.total_word_tokens}, "
      f"link tokens {corpus.total_link_tokens}")

# The built-in tokenizer lowercases and splits on non-alphanumerics.
print("tokenize('Graph-based Models!') ->", tokenize("Graph-based Models!"))

# Vocabulary construction is frequency-filtered and sorted for determinism.
vocab = build_vocabulary([r["text"].split() for r in records], min_count=2)
print("terms occurring at least twice:", vocab.terms)

# Held-out evaluation wants documents with enough links; filtering cascades
# until the remaining documents all satisfy the floor.
filtered = filter_by_link_count(corpus, min_links=1)
print(f"min_links=1 keeps {filtered.D} of {corpus.D} documents:",
      [d.id for d in filtered.documents])

# Cross-validation folds come from a seeded permutation; same seed, same folds.
folds = split_folds(corpus, n_folds=2, seed=7)
for f in range(2):
    ids = [corpus.documents[i].id for i in folds.fold_indices(f)]
    print(f"fold {f}: {ids}")
