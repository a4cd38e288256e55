"""Topic model trained by collapsed Gibbs sampling.

The sampler is the plain collapsed conditional

    p(z_t = k) proportional to (n_dk + alpha) * (n_kw + beta) / (n_k + V*beta)

with phi and theta estimated as averages over lagged post-burn-in count
snapshots. All randomness comes from one seeded generator consumed in a fixed
order, so training is bitwise reproducible; the per-token sweep itself is JIT
compiled, with the uniform draws handed in from outside.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .corpus import Corpus

logger = logging.getLogger(__name__)

__all__ = [
    "TopicConfig",
    "TopicModel",
    "TopicScore",
    "build_documents",
    "distinctive_topics",
    "doc_topics",
    "train_lda",
    "write_theta_csv",
]


@dataclass
class TopicConfig:
    """Gibbs sampling configuration. alpha defaults to 50/k."""

    k: int = 100
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 500
    sample_lag: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.alpha is None:
            self.alpha = 50.0 / self.k
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError(
                f"burn_in must lie in [0, iterations), got {self.burn_in}/{self.iterations}"
            )
        if self.sample_lag < 1:
            raise ValueError(f"sample_lag must be >= 1, got {self.sample_lag}")
        if self.burn_in + self.sample_lag > self.iterations:
            raise ValueError(
                "no samples would be taken: need burn_in + sample_lag <= iterations"
            )
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@njit(cache=True)
def _gibbs_sweep(doc_of, word_of, z, n_dk, n_kw, n_k, alpha, beta, u, cum):
    k_topics = n_k.shape[0]
    vbeta = n_kw.shape[1] * beta
    for t in range(doc_of.shape[0]):
        d = doc_of[t]
        w = word_of[t]
        old = z[t]
        n_dk[d, old] -= 1
        n_kw[old, w] -= 1
        n_k[old] -= 1
        total = 0.0
        for k in range(k_topics):
            total += (n_dk[d, k] + alpha) * (n_kw[k, w] + beta) / (n_k[k] + vbeta)
            cum[k] = total
        target = u[t] * total
        new = 0
        while new < k_topics - 1 and cum[new] < target:
            new += 1
        z[t] = new
        n_dk[d, new] += 1
        n_kw[new, w] += 1
        n_k[new] += 1


@njit(cache=True)
def _foldin_sweep(word_of, z, m_k, phi, alpha, u, cum):
    k_topics = m_k.shape[0]
    for t in range(word_of.shape[0]):
        w = word_of[t]
        old = z[t]
        m_k[old] -= 1
        total = 0.0
        for k in range(k_topics):
            total += phi[k, w] * (m_k[k] + alpha)
            cum[k] = total
        target = u[t] * total
        new = 0
        while new < k_topics - 1 and cum[new] < target:
            new += 1
        z[t] = new
        m_k[new] += 1


@dataclass
class TopicModel:
    """Fitted model: topic-word matrix phi (k x v), document-topic matrix
    theta (d x k), vocabulary, document ids, and the training config."""

    phi: np.ndarray
    theta: np.ndarray
    vocab: tuple[str, ...]
    doc_ids: tuple[str, ...]
    config: TopicConfig
    vocab_index: dict[str, int] = field(init=False, repr=False)
    doc_index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.vocab_index = {w: i for i, w in enumerate(self.vocab)}
        self.doc_index = {d: i for i, d in enumerate(self.doc_ids)}

    @property
    def k(self) -> int:
        return self.phi.shape[0]

    def theta_for(self, doc_id: str) -> np.ndarray:
        return self.theta[self.doc_index[doc_id]]

    def top_words(self, topic: int, n: int = 10) -> list[str]:
        row = self.phi[topic]
        # vocab is stored sorted, so index order doubles as the lexicographic
        # tie-break
        order = np.lexsort((np.arange(len(self.vocab)), -row))
        return [self.vocab[int(i)] for i in order[:n]]

    def save(self, path: str | Path) -> None:
        """Binary-free text export; round-trips exactly via load()."""
        cfg = self.config
        with Path(path).open("w", encoding="utf-8") as handle:
            handle.write("meterhalo-lda 1\n")
            handle.write(f"k {self.k} v {len(self.vocab)} docs {len(self.doc_ids)}\n")
            handle.write(
                f"alpha {cfg.alpha:.17g} beta {cfg.beta:.17g} seed {cfg.seed} "
                f"iterations {cfg.iterations} burn_in {cfg.burn_in} "
                f"sample_lag {cfg.sample_lag}\n"
            )
            for word in self.vocab:
                handle.write(word + "\n")
            for doc_id in self.doc_ids:
                handle.write(doc_id + "\n")
            for row in self.phi:
                handle.write(" ".join(f"{x:.17g}" for x in row) + "\n")
            for row in self.theta:
                handle.write(" ".join(f"{x:.17g}" for x in row) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "TopicModel":
        with Path(path).open("r", encoding="utf-8") as handle:
            magic = handle.readline().strip()
            if magic != "meterhalo-lda 1":
                raise ValueError(f"not a model file (header {magic!r})")
            sizes = handle.readline().split()
            k, v, d = int(sizes[1]), int(sizes[3]), int(sizes[5])
            params = handle.readline().split()
            config = TopicConfig(
                k=k,
                alpha=float(params[1]),
                beta=float(params[3]),
                seed=int(params[5]),
                iterations=int(params[7]),
                burn_in=int(params[9]),
                sample_lag=int(params[11]),
            )
            vocab = tuple(handle.readline().rstrip("\n") for _ in range(v))
            doc_ids = tuple(handle.readline().rstrip("\n") for _ in range(d))
            phi = np.array(
                [[float(x) for x in handle.readline().split()] for _ in range(k)]
            )
            theta = np.array(
                [[float(x) for x in handle.readline().split()] for _ in range(d)]
            )
        return cls(phi=phi, theta=theta, vocab=vocab, doc_ids=doc_ids, config=config)


def build_documents(
    corpus: Corpus,
    pos_filter: frozenset[str] | set[str] = frozenset({"NOUN", "ADJ", "VERB"}),
    min_frequency: int = 5,
) -> tuple[list[str], list[list[str]]]:
    """Lemma bags for training: POS-filtered, rare lemmas dropped.

    Lemmas below ``min_frequency`` corpus occurrences are excluded from the
    vocabulary. Poems left with zero admitted tokens are dropped with a
    warning (they would have no valid topic vector).
    """
    pos_filter = frozenset(pos_filter)
    streams = {poem.id: poem.lemma_stream(pos_filter) for poem in corpus}
    freq: dict[str, int] = {}
    for stream in streams.values():
        for lemma in stream:
            freq[lemma] = freq.get(lemma, 0) + 1
    admitted = {lemma for lemma, n in freq.items() if n >= min_frequency}
    doc_ids: list[str] = []
    docs: list[list[str]] = []
    dropped = 0
    for poem in corpus:
        bag = [lemma for lemma in streams[poem.id] if lemma in admitted]
        if bag:
            doc_ids.append(poem.id)
            docs.append(bag)
        else:
            dropped += 1
    if dropped:
        logger.warning(
            "dropped %d poem(s) with no admitted tokens "
            "(pos_filter=%s, min_frequency=%d)",
            dropped,
            sorted(pos_filter),
            min_frequency,
        )
    return doc_ids, docs


def _verify_counts(n_dk, n_kw, n_k, doc_len, z, word_of, v):
    if not np.array_equal(n_dk.sum(axis=1), doc_len):
        raise AssertionError("document-topic counts lost tokens")
    if not np.array_equal(n_kw.sum(axis=1), n_k):
        raise AssertionError("topic-word counts disagree with topic totals")
    if not np.array_equal(np.bincount(z, minlength=n_k.shape[0]), n_k):
        raise AssertionError("assignments disagree with topic totals")
    if not np.array_equal(
        np.bincount(word_of, minlength=v), n_kw.sum(axis=0)
    ):
        raise AssertionError("topic-word counts disagree with word totals")


def train_lda(
    docs: list[list[str]],
    config: TopicConfig,
    doc_ids: list[str] | None = None,
    check_counts: bool = False,
) -> TopicModel:
    """Collapsed Gibbs training over lemma bags.

    Every document must be non-empty. phi/theta are averages of the
    (smoothed, normalized) count snapshots taken every ``sample_lag`` sweeps
    after burn-in. ``check_counts`` verifies count conservation after every
    sweep (slow; meant for tests).
    """
    if not docs:
        raise ValueError("no documents")
    if doc_ids is None:
        doc_ids = [f"doc-{i:05d}" for i in range(len(docs))]
    if len(doc_ids) != len(docs):
        raise ValueError("doc_ids length must match docs")
    if len(set(doc_ids)) != len(doc_ids):
        raise ValueError("doc_ids must be unique")
    for i, doc in enumerate(docs):
        if not doc:
            raise ValueError(f"document {doc_ids[i]!r} is empty")
    vocab = sorted({lemma for doc in docs for lemma in doc})
    vocab_index = {w: i for i, w in enumerate(vocab)}
    v = len(vocab)
    k = config.k
    doc_of = np.concatenate(
        [np.full(len(doc), d, dtype=np.int64) for d, doc in enumerate(docs)]
    )
    word_of = np.array(
        [vocab_index[lemma] for doc in docs for lemma in doc], dtype=np.int64
    )
    tokens = doc_of.shape[0]
    doc_len = np.bincount(doc_of, minlength=len(docs))
    rng = np.random.default_rng(config.seed)
    z = rng.integers(0, k, size=tokens, dtype=np.int64)
    n_dk = np.zeros((len(docs), k), dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    n_kw = np.zeros((k, v), dtype=np.int64)
    np.add.at(n_kw, (z, word_of), 1)
    n_k = np.bincount(z, minlength=k)
    cum = np.zeros(k, dtype=np.float64)
    alpha = float(config.alpha)
    beta = float(config.beta)
    phi_acc = np.zeros((k, v))
    theta_acc = np.zeros((len(docs), k))
    samples = 0
    for sweep in range(1, config.iterations + 1):
        u = rng.random(tokens)
        _gibbs_sweep(doc_of, word_of, z, n_dk, n_kw, n_k, alpha, beta, u, cum)
        if check_counts:
            _verify_counts(n_dk, n_kw, n_k, doc_len, z, word_of, v)
        if sweep > config.burn_in and (sweep - config.burn_in) % config.sample_lag == 0:
            phi_acc += (n_kw + beta) / (n_k + v * beta)[:, None]
            theta_acc += (n_dk + alpha) / (doc_len + k * alpha)[:, None]
            samples += 1
    phi = phi_acc / samples
    theta = theta_acc / samples
    phi /= phi.sum(axis=1, keepdims=True)
    theta /= theta.sum(axis=1, keepdims=True)
    return TopicModel(
        phi=phi,
        theta=theta,
        vocab=tuple(vocab),
        doc_ids=tuple(doc_ids),
        config=config,
    )


def doc_topics(
    model: TopicModel,
    doc: list[str],
    fold_in_iterations: int = 500,
    seed: int | None = None,
) -> np.ndarray:
    """Topic vector for an unseen document, by Gibbs fold-in with phi fixed.

    Out-of-vocabulary lemmas are dropped; the first half of the sweeps is
    burn-in and the rest are averaged. Deterministic: the default seed
    derives from the model's training seed.
    """
    if fold_in_iterations < 2:
        raise ValueError("fold_in_iterations must be >= 2")
    word_of = np.array(
        [model.vocab_index[lemma] for lemma in doc if lemma in model.vocab_index],
        dtype=np.int64,
    )
    if word_of.size == 0:
        raise ValueError("document has no in-vocabulary tokens")
    k = model.k
    alpha = float(model.config.alpha)
    rng = np.random.default_rng(
        [model.config.seed, 9973] if seed is None else seed
    )
    z = rng.integers(0, k, size=word_of.size, dtype=np.int64)
    m_k = np.bincount(z, minlength=k)
    cum = np.zeros(k, dtype=np.float64)
    burn = fold_in_iterations // 2
    acc = np.zeros(k)
    samples = 0
    for sweep in range(1, fold_in_iterations + 1):
        u = rng.random(word_of.size)
        _foldin_sweep(word_of, z, m_k, model.phi, alpha, u, cum)
        if sweep > burn:
            acc += (m_k + alpha) / (word_of.size + k * alpha)
            samples += 1
    vector = acc / samples
    return vector / vector.sum()


@dataclass(frozen=True)
class TopicScore:
    """One distinctive topic for a meter: index, z-score, top words."""

    topic: int
    z_score: float
    words: tuple[str, ...]


def distinctive_topics(
    model: TopicModel,
    labels: dict[str, str],
    top: int = 5,
    n_words: int = 3,
) -> dict[str, list[TopicScore]]:
    """Per meter, the topics whose mean weight most exceeds the other meters'.

    z-scores are taken per topic across the meter means (population std;
    zero-variance topics score 0). Only labeled poems present in the model
    count.
    """
    by_meter: dict[str, list[int]] = {}
    for poem_id, meter in labels.items():
        row = model.doc_index.get(poem_id)
        if row is not None:
            by_meter.setdefault(meter, []).append(row)
    if len(by_meter) < 2:
        raise ValueError(
            f"need at least 2 meters with poems in the model, got {sorted(by_meter)}"
        )
    meters = sorted(by_meter)
    means = np.stack([model.theta[by_meter[m]].mean(axis=0) for m in meters])
    mu = means.mean(axis=0)
    sd = means.std(axis=0)
    with np.errstate(invalid="ignore"):
        z = np.where(sd > 0.0, (means - mu) / np.where(sd > 0.0, sd, 1.0), 0.0)
    out: dict[str, list[TopicScore]] = {}
    for i, meter in enumerate(meters):
        order = np.lexsort((np.arange(model.k), -z[i]))
        chosen = order[: min(top, model.k)]
        out[meter] = [
            TopicScore(
                topic=int(t),
                z_score=float(z[i, t]),
                words=tuple(model.top_words(int(t), n_words)),
            )
            for t in chosen
        ]
    return out


def write_theta_csv(model: TopicModel, path: str | Path) -> None:
    """Document-topic matrix as CSV: poem_id, t0..t{k-1}."""
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        handle.write("poem_id," + ",".join(f"t{i}" for i in range(model.k)) + "\n")
        for doc_id, row in zip(model.doc_ids, model.theta):
            handle.write(doc_id + "," + ",".join(f"{x:.17g}" for x in row) + "\n")
