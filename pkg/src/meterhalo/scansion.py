"""Accentual-syllabic scansion: meter templates, poem labeling, form codes.

A meter template is a foot pattern repeated a fixed number of times. Strong
positions may carry stress or stay unstressed (stress omission); weak
positions must never carry stress; up to two extra-metrical unstressed
syllables may trail the last strong position (masculine / feminine / dactylic
endings). A poem gets a meter label when at least ``threshold`` of its lines
match one template.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .corpus import Corpus, Poem

__all__ = [
    "FOOT_ORDER",
    "FOOT_PATTERNS",
    "Foot",
    "FormCode",
    "MeterLabel",
    "MeterTemplate",
    "best_match",
    "clausula_sequence",
    "default_templates",
    "form_code",
    "label_poem",
    "line_matches",
    "minimal_period",
    "scan_corpus",
    "write_scan_report",
]

# Canonical foot inventory; the tuple order doubles as the labeling
# tie-break order.
FOOT_PATTERNS: dict[str, str] = {
    "iamb": "WS",
    "trochee": "SW",
    "dactyl": "SWW",
    "amphibrach": "WSW",
    "anapest": "WWS",
}
FOOT_ORDER: tuple[str, ...] = ("iamb", "trochee", "dactyl", "amphibrach", "anapest")
_LABEL_PREFIX: dict[str, str] = {
    "iamb": "I",
    "trochee": "T",
    "dactyl": "D",
    "amphibrach": "A",
    "anapest": "An",
}
# Extra-metrical unstressed syllables tolerated after the last strong position.
MAX_TAIL = 2


@dataclass(frozen=True)
class Foot:
    """A metrical foot: its name and strong/weak pattern (e.g. iamb = WS)."""

    kind: str
    pattern: str = field(init=False)

    def __post_init__(self) -> None:
        if self.kind not in FOOT_PATTERNS:
            raise ValueError(
                f"unknown foot {self.kind!r}; expected one of {FOOT_ORDER}"
            )
        object.__setattr__(self, "pattern", FOOT_PATTERNS[self.kind])

    def __len__(self) -> int:
        return len(self.pattern)


@dataclass(frozen=True)
class MeterTemplate:
    """A foot repeated ``feet`` times.

    strong_offsets are the 1-based syllable positions that may carry stress;
    anchor_length is the position of the last strong offset, i.e. the minimum
    admissible line length.
    """

    foot: Foot
    feet: int
    strong_offsets: tuple[int, ...] = field(init=False)
    anchor_length: int = field(init=False)

    def __post_init__(self) -> None:
        if self.feet < 1:
            raise ValueError(f"feet must be >= 1, got {self.feet}")
        flen = len(self.foot)
        s_pos = self.foot.pattern.index("S") + 1
        offsets = tuple(i * flen + s_pos for i in range(self.feet))
        object.__setattr__(self, "strong_offsets", offsets)
        object.__setattr__(self, "anchor_length", offsets[-1])

    @classmethod
    def of(cls, kind: str, feet: int) -> "MeterTemplate":
        return cls(foot=Foot(kind), feet=feet)

    @property
    def label(self) -> str:
        return f"{_LABEL_PREFIX[self.foot.kind]}{self.feet}"


@dataclass(frozen=True)
class MeterLabel:
    """A poem-level meter label plus the fraction of lines that matched."""

    code: str
    match_fraction: float


def default_templates(
    max_binary_feet: int = 8, max_ternary_feet: int = 6, min_feet: int = 2
) -> tuple[MeterTemplate, ...]:
    """The standard candidate set: binary feet 2-8, ternary feet 2-6."""
    out = []
    for kind in FOOT_ORDER:
        hi = max_binary_feet if len(FOOT_PATTERNS[kind]) == 2 else max_ternary_feet
        for feet in range(min_feet, hi + 1):
            out.append(MeterTemplate.of(kind, feet))
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def _matches(stress: str, kind: str, feet: int) -> bool:
    template = MeterTemplate.of(kind, feet)
    length = len(stress)
    if not template.anchor_length <= length <= template.anchor_length + MAX_TAIL:
        return False
    strong = set(template.strong_offsets)
    for pos, symbol in enumerate(stress, 1):
        if symbol == "1" and pos not in strong:
            return False
    return True


def line_matches(line, template: MeterTemplate) -> bool:
    """True iff the line's stress string realizes the template.

    The line length must lie in [anchor, anchor + 2] and every stressed
    syllable must sit on a strong offset; strong positions left unstressed
    are admissible omissions. ``line`` may be an AnnotatedLine or a raw
    stress string.
    """
    stress = getattr(line, "stress", line)
    return _matches(stress, template.foot.kind, template.feet)


def _canonical(templates) -> list[MeterTemplate]:
    return sorted(templates, key=lambda t: (FOOT_ORDER.index(t.foot.kind), t.feet))


def best_match(
    poem: Poem, templates: tuple[MeterTemplate, ...] | None = None
) -> tuple[MeterTemplate, float]:
    """The template matching the largest fraction of the poem's lines.

    Ties resolve by foot order (iamb, trochee, dactyl, amphibrach, anapest),
    then by ascending feet; independent of the input template order.
    """
    if templates is None:
        templates = default_templates()
    ordered = _canonical(templates)
    if not ordered:
        raise ValueError("template set must be non-empty")
    total = len(poem.lines)
    best_template = ordered[0]
    best_hits = -1
    for template in ordered:
        hits = sum(1 for line in poem.lines if line_matches(line, template))
        if hits > best_hits:
            best_hits = hits
            best_template = template
    return best_template, best_hits / total


def label_poem(
    poem: Poem,
    templates: tuple[MeterTemplate, ...] | None = None,
    threshold: float = 0.8,
) -> MeterLabel | None:
    """Label the poem with its best-matching meter, or None if below threshold."""
    template, fraction = best_match(poem, templates)
    if fraction >= threshold:
        return MeterLabel(code=template.label, match_fraction=fraction)
    return None


def clausula_sequence(poem: Poem) -> str:
    """Line-ending types: m (0 syllables after the last stress), f (1),
    d (2 or more), x (no stress at all)."""
    out = []
    for line in poem.lines:
        last = line.stress.rfind("1")
        if last < 0:
            out.append("x")
        else:
            tail = len(line.stress) - 1 - last
            out.append("m" if tail == 0 else "f" if tail == 1 else "d")
    return "".join(out)


def minimal_period(seq):
    """Shortest prefix p with p <= len/2 that reproduces seq by repetition.

    Returns the whole sequence when it is aperiodic. Works on strings and
    on tuples/lists; the return type matches the input slice type.
    """
    n = len(seq)
    for p in range(1, n // 2 + 1):
        if all(seq[i] == seq[i % p] for i in range(n)):
            return seq[:p]
    return seq


def _parse_label_code(code: str) -> tuple[str, int]:
    for kind, prefix in sorted(
        _LABEL_PREFIX.items(), key=lambda kv: -len(kv[1])
    ):
        if code.startswith(prefix) and code[len(prefix):].isdigit():
            return kind, int(code[len(prefix):])
    raise ValueError(f"unrecognized meter label code {code!r}")


def _line_foot_count(stress: str, kind: str) -> int | None:
    """Largest feet count of ``kind`` the line realizes, or None."""
    flen = len(FOOT_PATTERNS[kind])
    s_pos = FOOT_PATTERNS[kind].index("S") + 1
    hi = (len(stress) - s_pos) // flen + 1
    for feet in range(hi, 0, -1):
        if _matches(stress, kind, feet):
            return feet
    return None


@dataclass(frozen=True)
class FormCode:
    """Hierarchical form description: meter, foot-count period, optional
    rhyme period, clausula period; rendered as e.g. Trochee-888884-ABCBBB-fmfmmm."""

    meter: str
    foot_counts: tuple[str, ...]
    clausulas: str
    rhyme: tuple[str, ...] | None = None

    @property
    def code(self) -> str:
        parts = [self.meter, "".join(self.foot_counts)]
        if self.rhyme is not None:
            parts.append("".join(self.rhyme))
        parts.append(self.clausulas)
        return "-".join(parts)


def form_code(poem: Poem, label: MeterLabel) -> FormCode:
    """Compress the poem's line structure to its minimal repeating form.

    Foot counts take the largest feet count of the label's foot each line
    realizes; a line realizing none is coded "?". Each component (foot
    counts, rhyme, clausulas) is reduced to its minimal period separately.
    """
    kind, _ = _parse_label_code(label.code)
    counts = []
    for line in poem.lines:
        n = _line_foot_count(line.stress, kind)
        counts.append("?" if n is None else str(n))
    clausulas = minimal_period(clausula_sequence(poem))
    rhyme = minimal_period(poem.rhyme) if poem.rhyme is not None else None
    return FormCode(
        meter=kind.capitalize(),
        foot_counts=tuple(minimal_period(tuple(counts))),
        clausulas=clausulas,
        rhyme=rhyme,
    )


def scan_corpus(
    corpus: Corpus,
    templates: tuple[MeterTemplate, ...] | None = None,
    threshold: float = 0.8,
) -> list[tuple[str, str, float, str]]:
    """Label every poem; rows of (poem_id, label or "", match_fraction, form_code)."""
    rows = []
    for poem in corpus:
        template, fraction = best_match(poem, templates)
        if fraction >= threshold:
            label = MeterLabel(code=template.label, match_fraction=fraction)
            code = form_code(poem, label).code
            rows.append((poem.id, label.code, fraction, code))
        else:
            rows.append((poem.id, "", fraction, ""))
    return rows


def write_scan_report(
    rows: list[tuple[str, str, float, str]], path: str | Path
) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["poem_id", "label", "match_fraction", "form_code"])
        for poem_id, label, fraction, code in rows:
            writer.writerow([poem_id, label, f"{fraction:.17g}", code])
