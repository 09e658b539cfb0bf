"""Text-network corpus handling.

A corpus is an ordered collection of documents where each document carries a
bag of word tokens (vocabulary indices) and a bag of link tokens (positions of
the documents it points at). This module covers ingestion from line-delimited
JSON records, vocabulary construction, link-count filtering, fold splitting
for cross validation, and a versioned dump format.
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

CORPUS_MAGIC = "TOPICATLAS-CORPUS-V1"

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class CorpusError(ValueError):
    """Invalid corpus content (duplicate ids, empty vocabulary, ...)."""


class RecordParseError(CorpusError):
    """A malformed input record; the message names the offending line."""


def tokenize(text):
    """Minimal tokenizer: lowercase, split on non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(eq=False)
class Document:
    """One vertex of the text network.

    ``word_tokens`` holds vocabulary indices, ``link_tokens`` holds positions
    of linked documents within the owning corpus. Either bag may be empty.
    ``raw_text`` keeps the source text for display snippets.
    """

    id: str
    word_tokens: np.ndarray
    link_tokens: np.ndarray
    raw_text: str = ""

    def __post_init__(self):
        self.word_tokens = np.asarray(self.word_tokens, dtype=np.int64)
        self.link_tokens = np.asarray(self.link_tokens, dtype=np.int64)

    @property
    def n_words(self):
        return len(self.word_tokens)

    @property
    def n_links(self):
        return len(self.link_tokens)


@dataclass
class Vocabulary:
    """Bijection between term strings and contiguous indices."""

    terms: list[str]
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise CorpusError("vocabulary contains duplicate terms")

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index


@dataclass(eq=False)
class Corpus:
    """Immutable-by-convention container for documents plus vocabulary."""

    documents: list[Document]
    vocabulary: Vocabulary
    dropped_links: int = 0

    def __post_init__(self):
        ids = [d.id for d in self.documents]
        if len(set(ids)) != len(ids):
            raise CorpusError("duplicate document ids")
        V, D = len(self.vocabulary), len(self.documents)
        for doc in self.documents:
            if doc.n_words and doc.word_tokens.max() >= V:
                raise CorpusError(f"word token out of range in document {doc.id!r}")
            if doc.n_links and doc.link_tokens.max() >= D:
                raise CorpusError(f"link token out of range in document {doc.id!r}")

    @property
    def D(self):
        return len(self.documents)

    @property
    def V(self):
        return len(self.vocabulary)

    @property
    def total_word_tokens(self):
        return sum(d.n_words for d in self.documents)

    @property
    def total_link_tokens(self):
        return sum(d.n_links for d in self.documents)

    def doc_index(self, doc_id):
        for i, doc in enumerate(self.documents):
            if doc.id == doc_id:
                return i
        raise KeyError(doc_id)


@dataclass
class FoldAssignment:
    """Partition of document positions into ``n_folds`` near-equal folds."""

    n_folds: int
    assignment: np.ndarray
    seed: int

    def fold_indices(self, fold):
        return np.flatnonzero(self.assignment == fold)

    def split(self, fold):
        """Return (train_indices, test_indices) for one held-out fold."""
        test = self.fold_indices(fold)
        train = np.flatnonzero(self.assignment != fold)
        return train, test


def build_vocabulary(token_lists, min_count=5, stopwords=frozenset()):
    """Build a vocabulary over token lists.

    Keeps terms with corpus frequency >= ``min_count`` that are not stopwords,
    sorted lexicographically so the index is deterministic.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter()
    for tokens in token_lists:
        counts.update(tokens)
    terms = sorted(t for t, c in counts.items() if c >= min_count and t not in stopwords)
    if not terms:
        raise CorpusError("vocabulary is empty after frequency/stopword filtering")
    return Vocabulary(terms)


def _parse_record(line, lineno):
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordParseError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(record, dict):
        raise RecordParseError(f"line {lineno}: record is not an object")
    for key in ("id", "text", "links"):
        if key not in record:
            raise RecordParseError(f"line {lineno}: missing field {key!r}")
    if not isinstance(record["id"], str):
        raise RecordParseError(f"line {lineno}: 'id' must be a string")
    text = record["text"]
    if isinstance(text, str):
        tokens, raw = tokenize(text), text
    elif isinstance(text, list) and all(isinstance(t, str) for t in text):
        tokens, raw = list(text), " ".join(text)
    else:
        raise RecordParseError(f"line {lineno}: 'text' must be a string or string array")
    links = record["links"]
    if not isinstance(links, list) or not all(isinstance(t, str) for t in links):
        raise RecordParseError(f"line {lineno}: 'links' must be an array of ids")
    return record["id"], tokens, links, raw


def ingest_corpus(source, min_count=1, stopwords=frozenset()):
    """Read line-delimited ``{"id", "text", "links"}`` records into a Corpus.

    ``source`` may be a path or an iterable of lines. Links to unknown ids and
    self-links are dropped (counted in ``Corpus.dropped_links``); duplicate
    links are kept as repeated tokens. Document order follows input order.
    """
    if isinstance(source, (str, bytes)):
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = list(source)

    ids, token_lists, link_lists, raws = [], [], [], []
    seen = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        doc_id, tokens, links, raw = _parse_record(line, lineno)
        if doc_id in seen:
            raise CorpusError(f"duplicate document id {doc_id!r} (line {lineno})")
        seen.add(doc_id)
        ids.append(doc_id)
        token_lists.append(tokens)
        link_lists.append(links)
        raws.append(raw)
    if not ids:
        raise CorpusError("no records in input")

    vocab = build_vocabulary(token_lists, min_count=min_count, stopwords=stopwords)
    position = {doc_id: i for i, doc_id in enumerate(ids)}

    documents, dropped = [], 0
    for i, doc_id in enumerate(ids):
        words = [vocab.index[t] for t in token_lists[i] if t in vocab.index]
        links = []
        for target in link_lists[i]:
            j = position.get(target)
            if j is None or j == i:
                dropped += 1
            else:
                links.append(j)
        documents.append(Document(doc_id, np.array(words, dtype=np.int64),
                                  np.array(links, dtype=np.int64), raws[i]))
    return Corpus(documents, vocab, dropped_links=dropped)


def filter_by_link_count(corpus, min_links):
    """Keep documents with at least ``min_links`` links, to a fixed point.

    Dropping a document also drops links pointing at it, which can push other
    documents below the threshold, so removal is iterated until stable; this
    makes the operation idempotent.
    """
    if min_links < 0:
        raise ValueError("min_links must be >= 0")
    keep = np.ones(corpus.D, dtype=bool)
    while True:
        counts = np.zeros(corpus.D, dtype=np.int64)
        for i, doc in enumerate(corpus.documents):
            if keep[i]:
                targets = doc.link_tokens
                counts[i] = int(keep[targets].sum()) if len(targets) else 0
        next_keep = keep & (counts >= min_links)
        if np.array_equal(next_keep, keep):
            break
        keep = next_keep
    if not keep.any():
        raise CorpusError(f"no documents left with min_links={min_links}")

    new_pos = {}
    for i in np.flatnonzero(keep):
        new_pos[i] = len(new_pos)
    documents = []
    for i in np.flatnonzero(keep):
        doc = corpus.documents[i]
        links = [new_pos[j] for j in doc.link_tokens if keep[j]]
        documents.append(Document(doc.id, doc.word_tokens.copy(),
                                  np.array(links, dtype=np.int64), doc.raw_text))
    return Corpus(documents, corpus.vocabulary, dropped_links=corpus.dropped_links)


def strip_links(corpus):
    """Text-only view of the corpus: every link bag emptied."""
    empty = np.array([], dtype=np.int64)
    documents = [Document(d.id, d.word_tokens.copy(), empty.copy(), d.raw_text)
                 for d in corpus.documents]
    return Corpus(documents, corpus.vocabulary, dropped_links=0)


def split_folds(corpus, n_folds, seed):
    """Assign documents to folds by a seeded uniform permutation.

    Fold sizes differ by at most one; identical seeds yield identical folds.
    """
    if n_folds < 2:
        raise ValueError("n_folds must be >= 2")
    if n_folds > corpus.D:
        raise CorpusError(f"n_folds={n_folds} exceeds document count {corpus.D}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(corpus.D)
    assignment = np.empty(corpus.D, dtype=np.int64)
    assignment[perm] = np.arange(corpus.D) % n_folds
    return FoldAssignment(n_folds, assignment, seed)


def corpora_equal(a, b):
    """Field-wise equality of two corpora (used by round-trip checks)."""
    if a.D != b.D or a.vocabulary.terms != b.vocabulary.terms:
        return False
    if a.dropped_links != b.dropped_links:
        return False
    for da, db in zip(a.documents, b.documents):
        if da.id != db.id or da.raw_text != db.raw_text:
            return False
        if not np.array_equal(da.word_tokens, db.word_tokens):
            return False
        if not np.array_equal(da.link_tokens, db.link_tokens):
            return False
    return True


def corpus_to_bytes(corpus):
    payload = {
        "dropped_links": corpus.dropped_links,
        "documents": [
            {
                "id": d.id,
                "links": d.link_tokens.tolist(),
                "text": d.raw_text,
                "words": d.word_tokens.tolist(),
            }
            for d in corpus.documents
        ],
        "terms": corpus.vocabulary.terms,
    }
    body = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return (CORPUS_MAGIC + "\n" + body).encode("utf-8")


def corpus_from_bytes(blob):
    text = blob.decode("utf-8")
    header, _, body = text.partition("\n")
    if header != CORPUS_MAGIC:
        raise CorpusError(f"not a corpus dump (expected header {CORPUS_MAGIC!r})")
    payload = json.loads(body)
    vocab = Vocabulary(list(payload["terms"]))
    documents = [
        Document(rec["id"], np.array(rec["words"], dtype=np.int64),
                 np.array(rec["links"], dtype=np.int64), rec["text"])
        for rec in payload["documents"]
    ]
    return Corpus(documents, vocab, dropped_links=payload["dropped_links"])


def save_corpus(corpus, path):
    with open(path, "wb") as fh:
        fh.write(corpus_to_bytes(corpus))


def load_corpus(path):
    with open(path, "rb") as fh:
        return corpus_from_bytes(fh.read())


def corpus_hash(corpus):
    """Stable content hash used to pin models to the corpus they were fit on."""
    return hashlib.sha256(corpus_to_bytes(corpus)).hexdigest()
