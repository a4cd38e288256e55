"""Poem corpus model and JSON Lines IO.

A corpus file holds one poem per line as a JSON object:

    {"id": "cz-0001", "author": "...", "year": 1885,
     "lines": [{"stress": "0101010101",
                "tokens": [{"lemma": "night", "pos": "NOUN", "surface": "nights"}]}],
     "rhyme": ["A", "B", "A", "B"]}

``stress`` is the prosodic annotation (one character per syllable, ``1`` =
stressed), ``tokens`` carries the lemmatized words of the line, and ``rhyme``
(optional) gives one rhyme-scheme letter per line. ``author`` and ``year``
may be null. Unknown fields anywhere in a record are ignored with a warning.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

logger = logging.getLogger(__name__)

__all__ = [
    "AnnotatedLine",
    "Corpus",
    "CorpusFormatError",
    "Poem",
    "Provenance",
    "Token",
    "filter_by_size",
    "load_corpus",
    "save_corpus",
    "split_by_period",
]

_POEM_FIELDS = {"id", "author", "year", "lines", "rhyme"}
_LINE_FIELDS = {"stress", "tokens"}
_TOKEN_FIELDS = {"lemma", "pos", "surface"}


class CorpusFormatError(ValueError):
    """A corpus file or record violates the input contract."""


@dataclass(frozen=True)
class Token:
    """One lemmatized word: lemma, part-of-speech tag, optional surface form."""

    lemma: str
    pos: str
    surface: str | None = None

    def __post_init__(self) -> None:
        if not self.lemma or not self.lemma.strip():
            raise ValueError("token lemma must be non-empty")
        if not self.pos or not self.pos.strip():
            raise ValueError("token pos must be non-empty")


@dataclass(frozen=True)
class AnnotatedLine:
    """One verse line: stress string over {0,1} plus its tokens.

    The stress string and the token list are independent annotation layers;
    their lengths are unrelated. Tokens may be empty (prosody-only corpora).
    """

    stress: str
    tokens: tuple[Token, ...] = ()

    def __post_init__(self) -> None:
        if not self.stress:
            raise ValueError("stress string must be non-empty")
        bad = set(self.stress) - {"0", "1"}
        if bad:
            raise ValueError(f"stress symbols outside {{0,1}}: {sorted(bad)!r}")


@dataclass(frozen=True)
class Poem:
    """A poem: id, optional author/year, lines, optional rhyme scheme."""

    id: str
    lines: tuple[AnnotatedLine, ...]
    author: str | None = None
    year: int | None = None
    rhyme: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("poem id must be non-empty")
        if not self.lines:
            raise ValueError("poem must have at least one line")
        if self.rhyme is not None and len(self.rhyme) != len(self.lines):
            raise ValueError(
                f"rhyme length {len(self.rhyme)} != line count {len(self.lines)}"
            )

    def token_count(self) -> int:
        return sum(len(line.tokens) for line in self.lines)

    def lemma_stream(self, pos_filter: frozenset[str] | set[str] | None = None) -> list[str]:
        """Lemmas of all tokens in document order, optionally POS-filtered."""
        out = []
        for line in self.lines:
            for tok in line.tokens:
                if pos_filter is None or tok.pos in pos_filter:
                    out.append(tok.lemma)
        return out


@dataclass(frozen=True)
class Provenance:
    """Where a corpus came from and under which configuration."""

    source: str
    loaded_at: str
    config_digest: str


def _config_digest(config: dict, parent: str | None = None) -> str:
    payload = dict(config)
    if parent is not None:
        payload["parent"] = parent
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True).encode("utf-8")
    ).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class Corpus:
    """An ordered list of poems with unique ids.

    Provenance is carried along but excluded from equality so that a
    load/serialize/load round trip compares equal.
    """

    poems: list[Poem]
    provenance: Provenance = field(
        compare=False,
        default=Provenance(source="<memory>", loaded_at="", config_digest=""),
    )

    def __post_init__(self) -> None:
        index: dict[str, Poem] = {}
        for poem in self.poems:
            if poem.id in index:
                raise CorpusFormatError(f"duplicate poem id {poem.id!r}")
            index[poem.id] = poem
        self._index = index

    def __len__(self) -> int:
        return len(self.poems)

    def __iter__(self):
        return iter(self.poems)

    def __getitem__(self, poem_id: str) -> Poem:
        return self._index[poem_id]

    def __contains__(self, poem_id: str) -> bool:
        return poem_id in self._index


def _parse_token(raw: object, where: str, unknown: set[str]) -> Token:
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"{where}: token must be an object")
    unknown.update(k for k in raw if k not in _TOKEN_FIELDS)
    lemma = raw.get("lemma")
    pos = raw.get("pos")
    surface = raw.get("surface")
    if not isinstance(lemma, str):
        raise CorpusFormatError(f"{where}: token lemma must be a string")
    if not isinstance(pos, str):
        raise CorpusFormatError(f"{where}: token pos must be a string")
    if surface is not None and not isinstance(surface, str):
        raise CorpusFormatError(f"{where}: token surface must be a string")
    try:
        return Token(lemma=lemma, pos=pos, surface=surface)
    except ValueError as exc:
        raise CorpusFormatError(f"{where}: {exc}") from exc


def _parse_line(raw: object, where: str, unknown: set[str]) -> AnnotatedLine:
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"{where}: line must be an object")
    unknown.update(k for k in raw if k not in _LINE_FIELDS)
    stress = raw.get("stress")
    if not isinstance(stress, str):
        raise CorpusFormatError(f"{where}: stress must be a string")
    raw_tokens = raw.get("tokens", [])
    if not isinstance(raw_tokens, list):
        raise CorpusFormatError(f"{where}: tokens must be an array")
    tokens = tuple(
        _parse_token(t, f"{where} token {i}", unknown)
        for i, t in enumerate(raw_tokens)
    )
    try:
        return AnnotatedLine(stress=stress, tokens=tokens)
    except ValueError as exc:
        raise CorpusFormatError(f"{where}: {exc}") from exc


def _parse_poem(raw: dict, where: str, unknown: set[str]) -> Poem:
    unknown.update(k for k in raw if k not in _POEM_FIELDS)
    poem_id = raw.get("id")
    if not isinstance(poem_id, str) or not poem_id:
        raise CorpusFormatError(f"{where}: id must be a non-empty string")
    where = f"{where} (id {poem_id!r})"
    author = raw.get("author")
    if author is not None and not isinstance(author, str):
        raise CorpusFormatError(f"{where}: author must be a string or null")
    year = raw.get("year")
    if year is not None and (isinstance(year, bool) or not isinstance(year, int)):
        raise CorpusFormatError(f"{where}: year must be an integer or null")
    raw_lines = raw.get("lines")
    if not isinstance(raw_lines, list) or not raw_lines:
        raise CorpusFormatError(f"{where}: lines must be a non-empty array")
    lines = tuple(
        _parse_line(l, f"{where} line {i}", unknown) for i, l in enumerate(raw_lines)
    )
    rhyme_raw = raw.get("rhyme")
    rhyme: tuple[str, ...] | None = None
    if rhyme_raw is not None:
        if not isinstance(rhyme_raw, list) or not all(
            isinstance(r, str) and len(r) == 1 for r in rhyme_raw
        ):
            raise CorpusFormatError(
                f"{where}: rhyme must be an array of single-letter strings"
            )
        rhyme = tuple(rhyme_raw)
    try:
        return Poem(id=poem_id, lines=lines, author=author, year=year, rhyme=rhyme)
    except ValueError as exc:
        raise CorpusFormatError(f"{where}: {exc}") from exc


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSON Lines corpus file.

    Raises:
        CorpusFormatError: on malformed records (with the file line number),
            duplicate ids, bad stress symbols, or schema violations.
        OSError: on IO failure.
    """
    path = Path(path)
    poems: list[Poem] = []
    seen: dict[str, int] = {}
    unknown: set[str] = set()
    with path.open("r", encoding="utf-8") as handle:
        for line_num, raw_line in enumerate(handle, 1):
            if not raw_line.strip():
                continue
            try:
                record = json.loads(raw_line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {line_num}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"line {line_num}: record must be an object")
            poem = _parse_poem(record, f"line {line_num}", unknown)
            if poem.id in seen:
                raise CorpusFormatError(
                    f"line {line_num}: duplicate poem id {poem.id!r} "
                    f"(first seen at line {seen[poem.id]})"
                )
            seen[poem.id] = line_num
            poems.append(poem)
    if unknown:
        logger.warning(
            "%s: ignored unknown field(s): %s", path, ", ".join(sorted(unknown))
        )
    provenance = Provenance(
        source=str(path), loaded_at=_now(), config_digest=_config_digest({})
    )
    return Corpus(poems=poems, provenance=provenance)


def _poem_to_record(poem: Poem) -> dict:
    record: dict = {
        "id": poem.id,
        "author": poem.author,
        "year": poem.year,
        "lines": [
            {
                "stress": line.stress,
                "tokens": [
                    {"lemma": t.lemma, "pos": t.pos}
                    if t.surface is None
                    else {"lemma": t.lemma, "pos": t.pos, "surface": t.surface}
                    for t in line.tokens
                ],
            }
            for line in poem.lines
        ],
    }
    if poem.rhyme is not None:
        record["rhyme"] = list(poem.rhyme)
    return record


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus back out as JSON Lines (round-trips with load_corpus)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for poem in corpus.poems:
            handle.write(json.dumps(_poem_to_record(poem), ensure_ascii=True))
            handle.write("\n")


def filter_by_size(
    corpus: Corpus, min_tokens: int = 20, max_tokens: int = 2000
) -> Corpus:
    """Keep poems whose total token count lies in [min_tokens, max_tokens].

    Bounds are inclusive; poem order is preserved; the operation is
    idempotent. The bounds are recorded in the result's provenance digest.
    """
    if min_tokens < 0:
        raise ValueError(f"min_tokens must be >= 0, got {min_tokens}")
    if min_tokens > max_tokens:
        raise ValueError(
            f"min_tokens {min_tokens} exceeds max_tokens {max_tokens}"
        )
    kept = [p for p in corpus.poems if min_tokens <= p.token_count() <= max_tokens]
    provenance = Provenance(
        source=corpus.provenance.source,
        loaded_at=_now(),
        config_digest=_config_digest(
            {"op": "filter_by_size", "min_tokens": min_tokens, "max_tokens": max_tokens},
            parent=corpus.provenance.config_digest,
        ),
    )
    return Corpus(poems=kept, provenance=provenance)


def split_by_period(corpus: Corpus, boundary_year: int) -> tuple[Corpus, Corpus]:
    """Split into (early, late): year < boundary vs year >= boundary.

    Undated poems land in neither half; they stay available in the full
    corpus for model training.
    """
    early = [p for p in corpus.poems if p.year is not None and p.year < boundary_year]
    late = [p for p in corpus.poems if p.year is not None and p.year >= boundary_year]
    digest = corpus.provenance.config_digest
    make = lambda poems, tag: Corpus(  # noqa: E731
        poems=poems,
        provenance=Provenance(
            source=corpus.provenance.source,
            loaded_at=_now(),
            config_digest=_config_digest(
                {"op": "split_by_period", "boundary_year": boundary_year, "half": tag},
                parent=digest,
            ),
        ),
    )
    return make(early, "early"), make(late, "late")
