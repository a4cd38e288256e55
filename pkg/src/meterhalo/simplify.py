"""Rare-lemma simplification over count-based distributional embeddings.

Rare lemmas (outside the top-n frequency list) are replaced by their closest
embedding neighbor that is both common (inside top-n) and strictly more
frequent. The embeddings come from a deterministic pipeline: symmetric-window
co-occurrence counts, PPMI with context-distribution smoothing, truncated SVD.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, Provenance, _config_digest, _now

logger = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_POS_FILTER",
    "EmbeddingModel",
    "SimplifyReport",
    "VocabStats",
    "build_vocab",
    "load_vectors",
    "nearest_neighbors",
    "save_vectors",
    "simplify",
    "train_embeddings",
    "write_simplify_report",
]

DEFAULT_POS_FILTER = frozenset({"NOUN", "ADJ", "VERB"})


@dataclass(frozen=True)
class VocabStats:
    """Lemma frequencies and frequency ranks over the POS-filtered stream.

    Ranks are 1-based, ordered by descending frequency with lexicographic
    tie-breaks, so they are total and reproducible.
    """

    freq: dict[str, int]
    rank: dict[str, int]
    top_n: int
    pos_filter: frozenset[str]

    def is_top(self, lemma: str, top_n: int | None = None) -> bool:
        n = self.top_n if top_n is None else top_n
        r = self.rank.get(lemma)
        return r is not None and r <= n


def build_vocab(
    corpus: Corpus,
    pos_filter: frozenset[str] | set[str] = DEFAULT_POS_FILTER,
    top_n: int = 1000,
) -> VocabStats:
    """Count lemma frequencies over tokens whose POS is admitted."""
    pos_filter = frozenset(pos_filter)
    freq: dict[str, int] = {}
    for poem in corpus:
        for lemma in poem.lemma_stream(pos_filter):
            freq[lemma] = freq.get(lemma, 0) + 1
    if not freq:
        raise ValueError(
            f"no lemmas left after POS filtering with {sorted(pos_filter)}"
        )
    ordered = sorted(freq, key=lambda lemma: (-freq[lemma], lemma))
    rank = {lemma: i for i, lemma in enumerate(ordered, 1)}
    return VocabStats(freq=freq, rank=rank, top_n=top_n, pos_filter=pos_filter)


@dataclass(frozen=True)
class EmbeddingModel:
    """Dense lemma vectors with a lemma -> row index."""

    lemmas: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.lemmas):
            raise ValueError("vectors must be one row per lemma")
        object.__setattr__(
            self, "index", {lemma: i for i, lemma in enumerate(self.lemmas)}
        )

    def covers(self, lemma: str) -> bool:
        return lemma in self.index

    def vector(self, lemma: str) -> np.ndarray:
        return self.vectors[self.index[lemma]]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def train_embeddings(
    corpus: Corpus,
    window: int = 5,
    dim: int = 100,
    pos_filter: frozenset[str] | set[str] = DEFAULT_POS_FILTER,
    smoothing: float = 0.75,
) -> EmbeddingModel:
    """PPMI + truncated SVD vectors over the POS-filtered lemma stream.

    Co-occurrence uses a symmetric window of ``window`` positions within each
    poem's stream. PPMI applies context-distribution smoothing (context counts
    raised to ``smoothing`` before normalizing). The whole pipeline is
    deterministic: identical corpus and parameters give identical vectors.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    pos_filter = frozenset(pos_filter)
    streams = [poem.lemma_stream(pos_filter) for poem in corpus]
    lemmas = sorted({lemma for stream in streams for lemma in stream})
    v = len(lemmas)
    if v < dim:
        raise ValueError(f"vocabulary size {v} smaller than embedding dim {dim}")
    index = {lemma: i for i, lemma in enumerate(lemmas)}
    counts = np.zeros((v, v), dtype=np.float64)
    for stream in streams:
        ids = [index[lemma] for lemma in stream]
        for i, wi in enumerate(ids):
            for j in range(max(0, i - window), i):
                wj = ids[j]
                counts[wi, wj] += 1.0
                counts[wj, wi] += 1.0
    total = counts.sum()
    if total == 0.0:
        raise ValueError("no co-occurrence mass: every stream has a single token")
    word_p = counts.sum(axis=1) / total
    ctx = counts.sum(axis=0) ** smoothing
    ctx_p = ctx / ctx.sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log((counts / total) / np.outer(word_p, ctx_p))
    ppmi = np.where(counts > 0.0, np.maximum(pmi, 0.0), 0.0)
    u, s, _ = np.linalg.svd(ppmi, full_matrices=False)
    vectors = u[:, :dim] * np.sqrt(s[:dim])
    return EmbeddingModel(lemmas=tuple(lemmas), vectors=vectors)


def nearest_neighbors(
    model: EmbeddingModel, lemma: str, k: int = 10
) -> list[tuple[str, float]]:
    """k nearest lemmas by cosine similarity, excluding the query.

    Ordered by descending similarity; exact ties resolve lexicographically.
    Zero vectors have similarity 0 to everything.
    """
    if not model.covers(lemma):
        raise KeyError(f"lemma {lemma!r} not covered by the embedding model")
    norms = np.linalg.norm(model.vectors, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    unit = model.vectors / safe[:, None]
    q = model.index[lemma]
    sims = unit @ unit[q]
    sims[norms == 0.0] = 0.0
    if norms[q] == 0.0:
        sims[:] = 0.0
    order = sorted(
        (i for i in range(len(model.lemmas)) if i != q),
        key=lambda i: (-sims[i], model.lemmas[i]),
    )
    return [(model.lemmas[i], float(sims[i])) for i in order[:k]]


@dataclass
class SimplifyReport:
    """What the simplification pass did."""

    replacements: dict[str, str]
    similarities: dict[str, float]
    replaced_tokens: int
    retained_rare_tokens: int
    vocab_before: int
    vocab_after: int


def simplify(
    corpus: Corpus,
    vocab: VocabStats,
    model: EmbeddingModel,
    top_n: int = 1000,
    k: int = 10,
) -> tuple[Corpus, SimplifyReport]:
    """Replace rare lemmas with their best qualifying embedding neighbor.

    A rare lemma (rank > top_n) is replaced by the most similar of its k
    nearest neighbors that is itself inside the top-n list and strictly more
    frequent; with no qualifying neighbor it is retained. A single pass: the
    map is computed before any replacement, so substitutions never cascade.
    Top-n lemmas never change. POS tags and surfaces are untouched.
    """
    replacements: dict[str, str] = {}
    similarities: dict[str, float] = {}
    rare = sorted(l for l, r in vocab.rank.items() if r > top_n)
    for lemma in rare:
        if not model.covers(lemma):
            continue
        for neighbor, sim in nearest_neighbors(model, lemma, k):
            neighbor_rank = vocab.rank.get(neighbor)
            if (
                neighbor_rank is not None
                and neighbor_rank <= top_n
                and vocab.freq[neighbor] > vocab.freq[lemma]
            ):
                replacements[lemma] = neighbor
                similarities[lemma] = sim
                break
    replaced = 0
    retained = 0
    new_poems = []
    for poem in corpus:
        new_lines = []
        for line in poem.lines:
            new_tokens = []
            for tok in line.tokens:
                if tok.pos in vocab.pos_filter and vocab.rank.get(tok.lemma, 0) > top_n:
                    target = replacements.get(tok.lemma)
                    if target is not None:
                        new_tokens.append(dataclasses.replace(tok, lemma=target))
                        replaced += 1
                        continue
                    retained += 1
                new_tokens.append(tok)
            new_lines.append(dataclasses.replace(line, tokens=tuple(new_tokens)))
        new_poems.append(dataclasses.replace(poem, lines=tuple(new_lines)))
    after: set[str] = set()
    for poem in new_poems:
        after.update(poem.lemma_stream(vocab.pos_filter))
    result = Corpus(
        poems=new_poems,
        provenance=Provenance(
            source=corpus.provenance.source,
            loaded_at=_now(),
            config_digest=_config_digest(
                {"op": "simplify", "top_n": top_n, "k": k},
                parent=corpus.provenance.config_digest,
            ),
        ),
    )
    report = SimplifyReport(
        replacements=replacements,
        similarities=similarities,
        replaced_tokens=replaced,
        retained_rare_tokens=retained,
        vocab_before=len(vocab.freq),
        vocab_after=len(after),
    )
    return result, report


def write_simplify_report(
    report: SimplifyReport, vocab: VocabStats, path: str | Path
) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["source", "target", "similarity", "freq_source", "freq_target"])
        for source in sorted(report.replacements):
            target = report.replacements[source]
            writer.writerow(
                [
                    source,
                    target,
                    f"{report.similarities[source]:.17g}",
                    vocab.freq[source],
                    vocab.freq[target],
                ]
            )


def save_vectors(model: EmbeddingModel, path: str | Path) -> None:
    """Text export: one lemma per line followed by its vector components."""
    with Path(path).open("w", encoding="utf-8") as handle:
        for lemma, row in zip(model.lemmas, model.vectors):
            handle.write(lemma + " " + " ".join(f"{x:.17g}" for x in row) + "\n")


def load_vectors(path: str | Path) -> EmbeddingModel:
    """Import externally trained vectors (lemma + d floats per line)."""
    lemmas: list[str] = []
    rows: list[list[float]] = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_num, raw in enumerate(handle, 1):
            if not raw.strip():
                continue
            parts = raw.split()
            if len(parts) < 2:
                raise ValueError(f"line {line_num}: expected lemma plus components")
            lemmas.append(parts[0])
            try:
                rows.append([float(x) for x in parts[1:]])
            except ValueError as exc:
                raise ValueError(f"line {line_num}: bad float: {exc}") from exc
            if len(rows[-1]) != len(rows[0]):
                raise ValueError(
                    f"line {line_num}: dimension {len(rows[-1])} != {len(rows[0])}"
                )
    if not lemmas:
        raise ValueError("empty vector file")
    if len(set(lemmas)) != len(lemmas):
        raise ValueError("duplicate lemma in vector file")
    return EmbeddingModel(lemmas=tuple(lemmas), vectors=np.array(rows, dtype=np.float64))
