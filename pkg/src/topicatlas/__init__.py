"""topicatlas: joint topic modeling of text networks and the topic web on top.

The package fits a generative model over documents that carry both word
tokens and link tokens, producing two coupled topic families (WordTopics over
the vocabulary, DocTopics over documents) plus the transition matrix between
them, and derives a weighted heterogeneous graph of topic relations for
exploration.
"""

from .corpus import (
    Corpus,
    CorpusError,
    Document,
    FoldAssignment,
    RecordParseError,
    Vocabulary,
    build_vocabulary,
    corpus_hash,
    filter_by_link_count,
    ingest_corpus,
    load_corpus,
    save_corpus,
    split_folds,
    strip_links,
    tokenize,
)
from .evaluation import (
    CoherenceReport,
    HeldoutReport,
    doc_topic_coherence,
    heldout_log_likelihood,
    run_cv,
    select_topic_number,
    topic_coherence,
    word_topic_coherence,
)
from .inference import (
    Checkpoint,
    DocVariational,
    ModelParams,
    NumericalError,
    SuffStats,
    TrainConfig,
    TrainedModel,
    compute_elbo,
    e_step_document,
    generate_corpus,
    infer_documents,
    init_model,
    load_model,
    m_step,
    save_model,
    train,
    update_alpha,
)
from .topicweb import (
    PosteriorStats,
    TopicEdge,
    TopicNode,
    TopicWeb,
    build_topic_web,
    doc_doc_strength,
    export_graph,
    indicative_words,
    posterior_stats,
    top_documents,
    top_keywords,
    word_doc_strength,
    word_word_strength,
)

__version__ = "0.1.0"
