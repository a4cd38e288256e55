"""Shared builders for test fixtures, plus the acceptance-result registry."""

from __future__ import annotations

import numpy as np

from meterhalo.corpus import AnnotatedLine, Corpus, Poem, Provenance, Token
from meterhalo.topics import TopicConfig, TopicModel


def make_line(stress: str, lemmas: list[str] | None = None, pos: str = "NOUN") -> AnnotatedLine:
    lemmas = lemmas if lemmas is not None else ["word"]
    return AnnotatedLine(
        stress=stress, tokens=tuple(Token(lemma=w, pos=pos) for w in lemmas)
    )


def make_poem(
    poem_id: str,
    stresses: list[str],
    year: int | None = None,
    author: str | None = None,
    rhyme: tuple[str, ...] | None = None,
    lemmas_per_line: list[list[str]] | None = None,
    pos: str = "NOUN",
) -> Poem:
    lines = []
    for i, stress in enumerate(stresses):
        lemmas = lemmas_per_line[i] if lemmas_per_line else ["word"]
        lines.append(make_line(stress, lemmas, pos))
    return Poem(id=poem_id, lines=tuple(lines), author=author, year=year, rhyme=rhyme)


def make_corpus(poems: list[Poem], source: str = "test") -> Corpus:
    return Corpus(
        poems=poems,
        provenance=Provenance(
            source=source, loaded_at="2000-01-01T00:00:00+00:00", config_digest="0" * 64
        ),
    )


def make_topic_model(
    theta: np.ndarray,
    doc_ids: list[str],
    phi: np.ndarray | None = None,
    vocab: tuple[str, ...] | None = None,
) -> TopicModel:
    """A model with prescribed theta; phi defaults to uniform rows."""
    theta = np.asarray(theta, dtype=np.float64)
    k = theta.shape[1]
    if phi is None:
        v = max(k, 2)
        phi = np.full((k, v), 1.0 / v)
    if vocab is None:
        vocab = tuple(f"w{i:03d}" for i in range(phi.shape[1]))
    config = TopicConfig(k=k, iterations=10, burn_in=1, sample_lag=1, seed=0)
    return TopicModel(
        phi=phi, theta=theta, vocab=vocab, doc_ids=tuple(doc_ids), config=config
    )


# One entry per acceptance criterion; the conftest terminal-summary hook
# prints the table after the run so the verdicts survive output capturing.
ACCEPTANCE_RESULTS: list[tuple[int, str, str, str]] = []


def record_criterion(number: int, title: str, status: str, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((number, title, status, detail))
    extra = f" ({detail})" if detail else ""
    print(f"criterion {number:2d} {status}: {title}{extra}")


def conclude_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    record_criterion(number, title, "PASS" if passed else "FAIL", detail)
    assert passed, f"criterion {number} failed: {title} ({detail})"
