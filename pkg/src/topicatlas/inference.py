"""Variational EM for the joint text+link topic model.

The generative story behind the fit: each document draws a WordTopic mixture
theta from a Dirichlet prior alpha; word tokens draw a WordTopic z from theta
and a word from beta[z]; link tokens draw a transition topic t from theta, a
DocTopic z' from the transition row eta[t], and a linked document from
omega[z']. Inference approximates the per-document posterior with a fully
factorized distribution q(theta|gamma) q(z|phi) q(t|lambda) q(z'|sigma) and
alternates per-document fixed-point E-steps with closed-form M-steps for
beta/eta/omega and a Newton update for alpha, tracking the evidence lower
bound (ELBO) across outer iterations.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import digamma, gammaln, polygamma, xlogy

from .corpus import Corpus, Document, Vocabulary, corpus_hash

logger = logging.getLogger(__name__)

MODEL_MAGIC = "TOPICATLAS-MODEL-V1"


class NumericalError(ArithmeticError):
    """A variational update or bound produced a non-finite value."""


@dataclass
class TrainConfig:
    """Knobs for the variational EM fit.

    Defaults mirror the standard operating point: symmetric alpha 0.01, inner
    fixed-point loop stopping at fractional ELBO increase 1e-9 or 100 sweeps,
    outer EM stopping at relative increase 1e-4 or 50 iterations.
    """

    K_w: int
    K_y: int
    alpha_init: float = 0.01
    inner_tol: float = 1e-9
    inner_max_iters: int = 100
    outer_tol: float = 1e-4
    outer_max_iters: int = 50
    smoothing_eps: float = 1e-10
    seed: int = 0
    update_alpha: bool = True

    def __post_init__(self):
        if self.K_w < 1 or self.K_y < 1:
            raise ValueError("topic counts must be >= 1")
        if self.inner_tol <= 0 or self.outer_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.inner_max_iters < 1 or self.outer_max_iters < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.alpha_init <= 0:
            raise ValueError("alpha_init must be > 0")
        if self.smoothing_eps < 0:
            raise ValueError("smoothing_eps must be >= 0")


@dataclass(eq=False)
class ModelParams:
    """Global model parameters.

    alpha: Dirichlet prior over WordTopics, length K_w.
    beta:  K_w x V row-stochastic WordTopic -> word emission matrix.
    eta:   K_w x K_y row-stochastic WordTopic -> DocTopic transition matrix.
    omega: K_y x D row-stochastic DocTopic -> document emission matrix.
    """

    alpha: np.ndarray
    beta: np.ndarray
    eta: np.ndarray
    omega: np.ndarray

    @property
    def K_w(self):
        return self.beta.shape[0]

    @property
    def K_y(self):
        return self.omega.shape[0]

    @property
    def V(self):
        return self.beta.shape[1]

    @property
    def D(self):
        return self.omega.shape[1]

    def validate(self, tol=1e-9):
        for name, mat in (("beta", self.beta), ("eta", self.eta), ("omega", self.omega)):
            if not np.all(mat > 0):
                raise ValueError(f"{name} has non-positive entries")
            if not np.allclose(mat.sum(axis=1), 1.0, rtol=0, atol=tol):
                raise ValueError(f"{name} rows do not sum to 1")
        if not np.all(self.alpha > 0):
            raise ValueError("alpha has non-positive entries")
        if len(self.alpha) != self.K_w or self.eta.shape != (self.K_w, self.K_y):
            raise ValueError("parameter dimensions are inconsistent")
        return self


@dataclass(eq=False)
class DocVariational:
    """Per-document variational parameters.

    gamma: Dirichlet parameter over WordTopics, length K_w.
    phi:   N x K_w word-token WordTopic responsibilities.
    lam:   L x K_w link-token transition-topic responsibilities.
    sigma: L x K_y link-token DocTopic responsibilities.
    """

    gamma: np.ndarray
    phi: np.ndarray
    lam: np.ndarray
    sigma: np.ndarray


@dataclass(eq=False)
class SuffStats:
    """Expected-count accumulators gathered over one E-step sweep."""

    beta_counts: np.ndarray
    eta_counts: np.ndarray
    omega_counts: np.ndarray
    gamma_log_sums: np.ndarray
    elbo_sum: float = 0.0
    n_docs: int = 0

    @classmethod
    def zeros(cls, K_w, K_y, V, D):
        return cls(np.zeros((K_w, V)), np.zeros((K_w, K_y)),
                   np.zeros((K_y, D)), np.zeros(K_w))

    def accumulate(self, doc, var):
        """Fold one document's responsibilities into the accumulators."""
        if var.phi.size:
            for k in range(self.beta_counts.shape[0]):
                self.beta_counts[k] += np.bincount(
                    doc.word_tokens, weights=var.phi[:, k],
                    minlength=self.beta_counts.shape[1])
        if var.sigma.size:
            self.eta_counts += var.lam.T @ var.sigma
            for k in range(self.omega_counts.shape[0]):
                self.omega_counts[k] += np.bincount(
                    doc.link_tokens, weights=var.sigma[:, k],
                    minlength=self.omega_counts.shape[1])
        self.gamma_log_sums += dirichlet_expected_log(var.gamma)
        self.n_docs += 1


@dataclass(eq=False)
class TrainedModel:
    """Fit result: global parameters plus the last E-sweep's per-document state."""

    params: ModelParams
    per_doc: list
    elbo_trace: list
    corpus_ref: str
    config: TrainConfig | None = None


def dirichlet_expected_log(gamma):
    """E[log theta_k] under Dirichlet(gamma): digamma(g_k) - digamma(sum g)."""
    return digamma(gamma) - digamma(gamma.sum())


def _row_normalize(mat, what):
    sums = mat.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        raise NumericalError(f"{what} has a row with zero total mass")
    return mat / sums


def _row_softmax(log_weights):
    shifted = log_weights - log_weights.max(axis=1, keepdims=True)
    out = np.exp(shifted)
    return out / out.sum(axis=1, keepdims=True)


def init_model(corpus, config):
    """Draw starting parameters: alpha constant, rows uniform-random then normalized."""
    K_w, K_y, V, D = config.K_w, config.K_y, corpus.V, corpus.D
    if V < 1 or D < 1:
        raise ValueError("corpus has zero vocabulary or zero documents")
    rng = np.random.default_rng(config.seed)
    # Draw order (beta, eta, omega) is fixed so a seed pins the whole init.
    beta = _row_normalize(np.clip(rng.random((K_w, V)), 1e-12, None), "beta init")
    eta = _row_normalize(np.clip(rng.random((K_w, K_y)), 1e-12, None), "eta init")
    omega = _row_normalize(np.clip(rng.random((K_y, D)), 1e-12, None), "omega init")
    alpha = np.full(K_w, config.alpha_init, dtype=float)
    return ModelParams(alpha, beta, eta, omega)


def document_elbo_parts(doc, params, var):
    """This document's ELBO contribution, split into (text_terms, link_terms).

    Text terms cover the Dirichlet prior/entropy of theta and everything
    involving word tokens; link terms cover everything involving link tokens
    (transition-topic draws, DocTopic draws, document emission, and the
    corresponding entropies). Their sum is the document's full bound.
    """
    alpha, gamma = params.alpha, var.gamma
    elog = dirichlet_expected_log(gamma)
    theta_terms = (
        gammaln(alpha.sum()) - gammaln(alpha).sum() + ((alpha - 1.0) * elog).sum()
        - (gammaln(gamma.sum()) - gammaln(gamma).sum() + ((gamma - 1.0) * elog).sum())
    )
    text = theta_terms
    if var.phi.size:
        log_beta_x = np.log(params.beta[:, doc.word_tokens]).T
        text += (var.phi * (elog[None, :] + log_beta_x)).sum()
        text -= xlogy(var.phi, var.phi).sum()
    link = 0.0
    if var.sigma.size:
        log_eta = np.log(params.eta)
        log_omega_y = np.log(params.omega[:, doc.link_tokens]).T
        link += (var.lam * elog[None, :]).sum()
        link += ((var.lam @ log_eta) * var.sigma).sum()
        link += (var.sigma * log_omega_y).sum()
        link -= xlogy(var.lam, var.lam).sum()
        link -= xlogy(var.sigma, var.sigma).sum()
    return float(text), float(link)


def document_elbo(doc, params, var):
    text, link = document_elbo_parts(doc, params, var)
    return text + link


def e_step_document(doc, params, config, state=None):
    """Per-document fixed point of the coupled variational updates.

    One sweep updates, in order: word responsibilities phi, gamma, transition
    responsibilities lambda, gamma again (so it stays consistent with the new
    lambda), then DocTopic responsibilities sigma. Each update is an exact
    coordinate maximization, so the document bound is non-decreasing across
    sweeps; sweeps stop once its fractional increase drops below
    ``config.inner_tol`` or ``config.inner_max_iters`` is hit.

    ``state`` warm-starts the iteration from a previous fixed point. The
    lambda/sigma coupling makes the per-document problem multimodal, so the
    outer EM loop passes the last sweep's state here; a cold start can land in
    a different basin and break the monotonicity of the outer bound.

    Returns the converged :class:`DocVariational` and the document's ELBO term.
    """
    K_w, K_y = params.K_w, params.K_y
    alpha = params.alpha
    N, L = doc.n_words, doc.n_links

    if N == 0 and L == 0:
        var = DocVariational(alpha.copy(), np.zeros((0, K_w)),
                             np.zeros((0, K_w)), np.zeros((0, K_y)))
        return var, document_elbo(doc, params, var)

    log_beta_x = np.log(params.beta[:, doc.word_tokens]).T if N else None
    log_eta = np.log(params.eta)
    log_omega_y = np.log(params.omega[:, doc.link_tokens]).T if L else None

    if state is not None:
        gamma = state.gamma.copy()
        phi = state.phi.copy()
        lam = state.lam.copy()
        sigma = state.sigma.copy()
    else:
        gamma = alpha + N / K_w
        phi = np.full((N, K_w), 1.0 / K_w)
        lam = np.full((L, K_w), 1.0 / K_w)
        sigma = np.full((L, K_y), 1.0 / K_y)

    prev = None
    var = DocVariational(gamma, phi, lam, sigma)
    for _ in range(config.inner_max_iters):
        if N:
            phi = _row_softmax(log_beta_x + digamma(gamma)[None, :])
            if not np.isfinite(phi).all():
                raise NumericalError("phi update produced non-finite values")
        gamma = alpha + phi.sum(axis=0) + lam.sum(axis=0)
        if L:
            lam = _row_softmax(digamma(gamma)[None, :] + sigma @ log_eta.T)
            if not np.isfinite(lam).all():
                raise NumericalError("lambda update produced non-finite values")
            gamma = alpha + phi.sum(axis=0) + lam.sum(axis=0)
            sigma = _row_softmax(log_omega_y + lam @ log_eta)
            if not np.isfinite(sigma).all():
                raise NumericalError("sigma update produced non-finite values")
        if not np.isfinite(gamma).all():
            raise NumericalError("gamma update produced non-finite values")

        var = DocVariational(gamma, phi, lam, sigma)
        elbo = document_elbo(doc, params, var)
        if not np.isfinite(elbo):
            raise NumericalError("document ELBO is non-finite")
        if prev is not None and (elbo - prev) < config.inner_tol * abs(prev):
            break
        prev = elbo
    return var, elbo


def m_step(stats, config, alpha):
    """Closed-form maximization of beta/eta/omega from expected counts.

    Every row gets ``config.smoothing_eps`` added to each cell before
    normalization so downstream log() calls stay finite. ``alpha`` is passed
    through; its Newton update lives in :func:`update_alpha`.
    """
    eps = config.smoothing_eps
    beta = _row_normalize(stats.beta_counts + eps, "beta")
    eta = _row_normalize(stats.eta_counts + eps, "eta")
    omega = _row_normalize(stats.omega_counts + eps, "omega")
    return ModelParams(np.asarray(alpha, dtype=float).copy(), beta, eta, omega)


def alpha_objective(alpha, gamma_log_sums, D):
    """The alpha-dependent ELBO terms (concave in alpha)."""
    alpha = np.asarray(alpha, dtype=float)
    return (D * (gammaln(alpha.sum()) - gammaln(alpha).sum())
            + ((alpha - 1.0) * gamma_log_sums).sum())


def update_alpha(gamma_log_sums, alpha, D, max_steps=100, tol=1e-10):
    """Newton-Raphson update of the Dirichlet prior.

    Maximizes :func:`alpha_objective`, i.e.
    ``D*(logGamma(sum a) - sum logGamma(a_k)) + sum_k (a_k - 1) * s_k`` where
    ``s_k`` sums E[log theta_k] over documents. The Hessian is diagonal plus
    rank-one, so each step is linear time. Steps are halved until the iterate
    is strictly positive and does not decrease the objective, which keeps the
    surrounding EM bound monotone.
    """
    alpha = np.asarray(alpha, dtype=float).copy()
    s = np.asarray(gamma_log_sums, dtype=float)
    value = alpha_objective(alpha, s, D)
    for _ in range(max_steps):
        grad = D * (digamma(alpha.sum()) - digamma(alpha)) + s
        h = -D * polygamma(1, alpha)
        z = D * polygamma(1, alpha.sum())
        c = (grad / h).sum() / (1.0 / z + (1.0 / h).sum())
        step = (grad - c) / h
        if not np.isfinite(step).all():
            logger.warning("alpha update: non-finite Newton step; keeping last iterate")
            return alpha
        scale = 1.0
        while True:
            candidate = alpha - scale * step
            if np.all(candidate > 0):
                new_value = alpha_objective(candidate, s, D)
                if new_value >= value:
                    break
            scale *= 0.5
            if scale < 1e-12:
                logger.warning("alpha update: step shrank to zero; keeping last iterate")
                return alpha
        alpha, value = candidate, new_value
        if np.max(np.abs(scale * step)) < tol * max(1.0, np.max(alpha)):
            return alpha
    logger.warning("alpha update: no convergence after %d steps", max_steps)
    return alpha


def compute_elbo(corpus, params, per_doc):
    """Full-corpus evidence lower bound for the given variational state."""
    total = 0.0
    for doc, var in zip(corpus.documents, per_doc):
        if var is None:
            continue
        total += document_elbo(doc, params, var)
    if not np.isfinite(total):
        raise NumericalError("corpus ELBO is non-finite")
    return total


def _worker_count():
    raw = os.environ.get("TOPICATLAS_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def _e_sweep(corpus, params, config, doc_indices, warm=None):
    """Run the E-step over the given documents.

    Documents may be processed concurrently; sufficient statistics are always
    folded in ascending document order so results are bitwise reproducible
    regardless of worker count.
    """
    stats = SuffStats.zeros(params.K_w, params.K_y, params.V, params.D)
    per_doc = [None] * corpus.D
    workers = _worker_count()

    def run(i):
        state = warm[i] if warm is not None else None
        return e_step_document(corpus.documents[i], params, config, state=state)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, doc_indices))
    else:
        results = [run(i) for i in doc_indices]
    for i, (var, elbo) in zip(doc_indices, results):
        per_doc[i] = var
        stats.accumulate(corpus.documents[i], var)
        stats.elbo_sum += elbo
    return per_doc, stats


def train(corpus, config, doc_indices=None):
    """Alternate E-sweeps and M-steps until the outer ELBO settles.

    ``doc_indices`` restricts the sweep to a subset of documents (used by
    cross validation); the parameter dimensions always span the full corpus so
    link targets outside the subset stay scorable. The recorded trace holds
    the post-E-step bound of each outer iteration, and training stops when its
    relative increase falls below ``config.outer_tol``. Variational state is
    carried across outer iterations (see :func:`e_step_document`).
    """
    if corpus.D == 0:
        raise ValueError("corpus is empty")
    if doc_indices is None:
        doc_indices = list(range(corpus.D))
    else:
        doc_indices = sorted(int(i) for i in doc_indices)
        if not doc_indices:
            raise ValueError("doc_indices is empty")

    params = init_model(corpus, config)
    trace = []
    per_doc = None
    for outer in range(config.outer_max_iters):
        try:
            per_doc, stats = _e_sweep(corpus, params, config, doc_indices, warm=per_doc)
            alpha = params.alpha
            if config.update_alpha:
                alpha = update_alpha(stats.gamma_log_sums, alpha, stats.n_docs)
            params = m_step(stats, config, alpha)
        except NumericalError as exc:
            raise NumericalError(f"outer iteration {outer + 1}: {exc}") from exc
        trace.append(stats.elbo_sum)
        if len(trace) >= 2:
            prev, cur = trace[-2], trace[-1]
            if (cur - prev) < config.outer_tol * abs(prev):
                break
    return TrainedModel(params, per_doc, trace, corpus_hash(corpus), config)


def infer_documents(corpus, params, config, doc_indices=None):
    """E-step under frozen global parameters; returns per-document state.

    Used to score held-out documents and to reconstruct per-document
    responsibilities from a checkpoint.
    """
    if doc_indices is None:
        doc_indices = range(corpus.D)
    per_doc = [None] * corpus.D
    for i in doc_indices:
        per_doc[i], _ = e_step_document(corpus.documents[i], params, config)
    return per_doc


def generate_corpus(params, doc_lengths, link_counts, seed):
    """Forward-sample a corpus from the generative process.

    Per document: theta ~ Dir(alpha); each word draws a WordTopic from theta
    and a word from that topic's emission row; each link draws a transition
    topic from theta, a DocTopic from the transition row, and a target
    document from that DocTopic's row. Deterministic given ``seed``.
    """
    params.validate()
    if len(doc_lengths) != len(link_counts):
        raise ValueError("doc_lengths and link_counts must have equal length")
    D, V = params.D, params.V
    if len(doc_lengths) != D:
        raise ValueError(f"need exactly {D} documents to match omega's support")
    rng = np.random.default_rng(seed)
    width = max(2, len(str(V - 1)))
    vocab = Vocabulary([f"w{i:0{width}d}" for i in range(V)])

    documents = []
    for i, (n_words, n_links) in enumerate(zip(doc_lengths, link_counts)):
        theta = rng.dirichlet(params.alpha)
        z = rng.choice(params.K_w, size=n_words, p=theta)
        words = np.array([rng.choice(V, p=params.beta[k]) for k in z], dtype=np.int64)
        t = rng.choice(params.K_w, size=n_links, p=theta)
        zprime = np.array([rng.choice(params.K_y, p=params.eta[k]) for k in t], dtype=np.int64)
        links = np.array([rng.choice(D, p=params.omega[kp]) for kp in zprime], dtype=np.int64)
        raw = " ".join(vocab.terms[w] for w in words)
        documents.append(Document(f"doc{i:04d}", words, links, raw))
    return Corpus(documents, vocab)


@dataclass
class Checkpoint:
    """Loaded model file: global parameters plus fit provenance."""

    params: ModelParams
    config: TrainConfig
    corpus_hash: str
    elbo_trace: list


def save_model(model, path):
    """Write a versioned checkpoint with deterministic bytes.

    Layout: magic line, JSON header line (dimensions, config, corpus hash,
    ELBO trace), then raw float64 buffers for alpha, beta, eta, omega.
    """
    p = model.params
    header = {
        "config": asdict(model.config),
        "corpus_hash": model.corpus_ref,
        "dims": {"K_w": p.K_w, "K_y": p.K_y, "V": p.V, "D": p.D},
        "elbo_trace": list(map(float, model.elbo_trace)),
        "version": 1,
    }
    with open(path, "wb") as fh:
        fh.write((MODEL_MAGIC + "\n").encode("utf-8"))
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        for arr in (p.alpha, p.beta, p.eta, p.omega):
            fh.write(np.ascontiguousarray(arr, dtype=np.float64).tobytes())


def load_model(path):
    with open(path, "rb") as fh:
        magic = fh.readline().decode("utf-8").rstrip("\n")
        if magic != MODEL_MAGIC:
            raise ValueError(f"not a model checkpoint (expected header {MODEL_MAGIC!r})")
        header = json.loads(fh.readline().decode("utf-8"))
        dims = header["dims"]
        K_w, K_y, V, D = dims["K_w"], dims["K_y"], dims["V"], dims["D"]

        def read(shape):
            n = int(np.prod(shape))
            buf = fh.read(n * 8)
            if len(buf) != n * 8:
                raise ValueError("truncated model checkpoint")
            return np.frombuffer(buf, dtype=np.float64).reshape(shape).copy()

        alpha = read((K_w,))
        beta = read((K_w, V))
        eta = read((K_w, K_y))
        omega = read((K_y, D))
    params = ModelParams(alpha, beta, eta, omega).validate()
    config = TrainConfig(**header["config"])
    return Checkpoint(params, config, header["corpus_hash"], list(header["elbo_trace"]))
