"""Synthetic corpus generator with planted meter-topic structure.

Each meter gets a Dirichlet prior over the true topics; poems draw their
topic mixture from their meter's prior, then draw lemmas topic-wise. Stress
strings realize the meter's template exactly, with strong positions omitted
at a fixed rate (weak positions are never promoted), so the scansion labeler
recovers the planted meter. Drift mixes each late-period poem's prior toward
a fresh permutation of it, which preserves overall topic usage while
destroying the meter-topic association.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import AnnotatedLine, Corpus, Poem, Provenance, Token, _config_digest, _now
from .scansion import MAX_TAIL, MeterTemplate

__all__ = [
    "GroundTruth",
    "SynthMeter",
    "SynthSpec",
    "block_priors",
    "generate",
    "generate_files",
    "shuffle_prior",
    "spec_from_dict",
    "write_ground_truth",
]

_DEFAULT_POS_PROFILE = {"NOUN": 1.0 / 3.0, "ADJ": 1.0 / 3.0, "VERB": 1.0 / 3.0}


@dataclass
class SynthMeter:
    """One planted meter: its template, topic prior, optional POS profile."""

    template: MeterTemplate
    prior: np.ndarray
    pos_profile: dict[str, float] | None = None

    def __post_init__(self) -> None:
        self.prior = np.asarray(self.prior, dtype=np.float64)
        if self.prior.ndim != 1 or not np.all(self.prior > 0):
            raise ValueError("prior must be a 1-D positive vector")
        if self.pos_profile is not None:
            weights = np.array(list(self.pos_profile.values()), dtype=np.float64)
            if not np.all(weights > 0):
                raise ValueError("pos_profile weights must be positive")


@dataclass
class SynthSpec:
    meters: list[SynthMeter]
    vocab_size: int
    poems_per_meter: int
    k_true: int = 0  # 0 means: take it from the prior length
    lines: tuple[int, int] = (8, 40)
    tokens_per_line: tuple[int, int] = (3, 8)
    omission_rate: float = 0.2
    drift: float = 0.0
    boundary_year: int = 1860
    years: tuple[int, int] = (1800, 1919)
    topic_word: np.ndarray | None = None
    topic_word_concentration: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.meters:
            raise ValueError("need at least one meter")
        k = len(self.meters[0].prior)
        if self.k_true == 0:
            self.k_true = k
        if self.k_true != k:
            raise ValueError(f"k_true {self.k_true} != prior length {k}")
        for meter in self.meters:
            if len(meter.prior) != self.k_true:
                raise ValueError("all priors must have length k_true")
        labels = [m.template.label for m in self.meters]
        if len(set(labels)) != len(labels):
            raise ValueError(f"meter labels must be distinct, got {labels}")
        if self.vocab_size < 2:
            raise ValueError("vocab_size must be >= 2")
        if self.poems_per_meter < 1:
            raise ValueError("poems_per_meter must be >= 1")
        for name, (lo, hi) in (("lines", self.lines), ("tokens_per_line", self.tokens_per_line)):
            if lo < 1 or lo > hi:
                raise ValueError(f"bad {name} range ({lo}, {hi})")
        if not 0.0 <= self.omission_rate < 1.0:
            raise ValueError("omission_rate must lie in [0, 1)")
        if not 0.0 <= self.drift <= 1.0:
            raise ValueError("drift must lie in [0, 1]")
        if not self.years[0] < self.boundary_year <= self.years[1]:
            raise ValueError(
                f"boundary_year {self.boundary_year} must split the year range {self.years}"
            )
        if self.topic_word is not None:
            tw = np.asarray(self.topic_word, dtype=np.float64)
            if tw.shape != (self.k_true, self.vocab_size) or not np.all(tw >= 0):
                raise ValueError("topic_word must be a non-negative k x v matrix")
            self.topic_word = tw / tw.sum(axis=1, keepdims=True)
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class GroundTruth:
    """Planted values per poem plus the per-meter priors."""

    meters: dict[str, str]
    periods: dict[str, str]
    thetas: dict[str, np.ndarray]
    priors: dict[str, np.ndarray] = field(default_factory=dict)


def shuffle_prior(prior: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """A random permutation of the prior's components (a new array)."""
    return rng.permutation(np.asarray(prior, dtype=np.float64))


def block_priors(
    n_meters: int,
    k_true: int,
    concentration: float = 6.0,
    background: float = 0.25,
) -> list[np.ndarray]:
    """Distinct priors: each meter concentrates on its own topic block.

    Meter m puts (1 - background) of its mass on block m of size
    k_true // n_meters and spreads the rest uniformly; scaled by
    ``concentration`` to set the Dirichlet tightness.
    """
    if k_true < n_meters:
        raise ValueError(f"k_true {k_true} must be >= number of meters {n_meters}")
    if not 0.0 < background < 1.0:
        raise ValueError("background must lie in (0, 1)")
    block = k_true // n_meters
    priors = []
    for m in range(n_meters):
        p = np.full(k_true, background / (k_true - block))
        p[m * block : (m + 1) * block] = (1.0 - background) / block
        priors.append(concentration * p / p.sum())
    return priors


def _stress_string(
    template: MeterTemplate, tail: int, omission_rate: float, rng: np.random.Generator
) -> str:
    chars = ["0"] * (template.anchor_length + tail)
    for offset in template.strong_offsets:
        if omission_rate == 0.0 or rng.random() >= omission_rate:
            chars[offset - 1] = "1"
    return "".join(chars)


def _categorical(cum: np.ndarray, rng: np.random.Generator, size: int) -> np.ndarray:
    return np.searchsorted(cum, rng.random(size), side="right")


def generate(spec: SynthSpec) -> tuple[Corpus, GroundTruth]:
    """Build the corpus and its ground truth.

    Poems alternate early/late period by index, so both halves are balanced
    per meter. Each poem is generated from its own derived seed; generation
    order does not matter.
    """
    rng_topics = np.random.default_rng([spec.seed, 11])
    if spec.topic_word is not None:
        topic_word = spec.topic_word
    else:
        topic_word = rng_topics.dirichlet(
            np.full(spec.vocab_size, spec.topic_word_concentration), size=spec.k_true
        )
    cum_words = np.cumsum(topic_word, axis=1)
    cum_words[:, -1] = 1.0
    lemmas = [f"w{j:04d}" for j in range(spec.vocab_size)]
    poems: list[Poem] = []
    truth = GroundTruth(meters={}, periods={}, thetas={})
    y0, y1 = spec.years
    for mi, meter in enumerate(spec.meters):
        label = meter.template.label
        truth.priors[label] = meter.prior.copy()
        profile = meter.pos_profile or _DEFAULT_POS_PROFILE
        tags = sorted(profile)
        tag_w = np.array([profile[t] for t in tags], dtype=np.float64)
        cum_tags = np.cumsum(tag_w / tag_w.sum())
        cum_tags[-1] = 1.0
        for pi in range(spec.poems_per_meter):
            rng = np.random.default_rng([spec.seed, 17, mi, pi])
            early = pi % 2 == 0
            year = (
                int(rng.integers(y0, spec.boundary_year))
                if early
                else int(rng.integers(spec.boundary_year, y1 + 1))
            )
            prior = meter.prior
            if not early and spec.drift > 0.0:
                prior = (1.0 - spec.drift) * prior + spec.drift * shuffle_prior(
                    prior, rng
                )
            theta = rng.dirichlet(prior)
            cum_theta = np.cumsum(theta)
            cum_theta[-1] = 1.0
            n_lines = int(rng.integers(spec.lines[0], spec.lines[1] + 1))
            lines = []
            for _ in range(n_lines):
                tail = int(rng.integers(0, MAX_TAIL + 1))
                stress = _stress_string(meter.template, tail, spec.omission_rate, rng)
                n_tok = int(
                    rng.integers(spec.tokens_per_line[0], spec.tokens_per_line[1] + 1)
                )
                topics = _categorical(cum_theta, rng, n_tok)
                tokens = []
                for topic in topics:
                    word = int(_categorical(cum_words[topic], rng, 1)[0])
                    tag = tags[int(_categorical(cum_tags, rng, 1)[0])]
                    tokens.append(Token(lemma=lemmas[word], pos=tag))
                lines.append(AnnotatedLine(stress=stress, tokens=tuple(tokens)))
            poem_id = f"{label}-{pi:05d}"
            poems.append(
                Poem(id=poem_id, lines=tuple(lines), author=None, year=year)
            )
            truth.meters[poem_id] = label
            truth.periods[poem_id] = "early" if early else "late"
            truth.thetas[poem_id] = theta
    digest = _config_digest(
        {
            "op": "synth",
            "seed": spec.seed,
            "meters": [m.template.label for m in spec.meters],
            "poems_per_meter": spec.poems_per_meter,
            "vocab_size": spec.vocab_size,
            "k_true": spec.k_true,
            "drift": spec.drift,
            "omission_rate": spec.omission_rate,
        }
    )
    corpus = Corpus(
        poems=poems,
        provenance=Provenance(
            source="synthetic", loaded_at=_now(), config_digest=digest
        ),
    )
    return corpus, truth


def write_ground_truth(truth: GroundTruth, path: str | Path) -> None:
    poem_ids = sorted(truth.meters)
    k = len(next(iter(truth.thetas.values()))) if truth.thetas else 0
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["poem_id", "meter", "period"] + [f"theta_{i}" for i in range(k)]
        )
        for poem_id in poem_ids:
            writer.writerow(
                [poem_id, truth.meters[poem_id], truth.periods[poem_id]]
                + [f"{x:.17g}" for x in truth.thetas[poem_id]]
            )


def generate_files(
    spec: SynthSpec, corpus_path: str | Path, truth_path: str | Path
) -> tuple[Corpus, GroundTruth]:
    from .corpus import save_corpus

    corpus, truth = generate(spec)
    save_corpus(corpus, corpus_path)
    write_ground_truth(truth, truth_path)
    return corpus, truth


def spec_from_dict(raw: dict) -> SynthSpec:
    """Build a SynthSpec from a plain JSON-style dict (the CLI format).

    Meters are given as {"foot": ..., "feet": ...} with an optional explicit
    "prior"; when no meter carries a prior, distinct block priors are
    generated (or one shared prior for every meter if "shared_prior" is
    true, which plants no halo at all).
    """
    raw = dict(raw)
    meters_raw = raw.pop("meters", None)
    if not meters_raw:
        raise ValueError("spec needs a non-empty 'meters' list")
    k_true = int(raw.pop("k_true", 0))
    shared = bool(raw.pop("shared_prior", False))
    concentration = float(raw.pop("prior_concentration", 6.0))
    background = float(raw.pop("prior_background", 0.25))
    with_prior = [m for m in meters_raw if "prior" in m]
    if with_prior and len(with_prior) != len(meters_raw):
        raise ValueError("either every meter or no meter may carry a 'prior'")
    if with_prior:
        priors = [np.asarray(m["prior"], dtype=np.float64) for m in meters_raw]
        if k_true == 0:
            k_true = len(priors[0])
    else:
        if k_true == 0:
            raise ValueError("k_true is required when priors are generated")
        priors = block_priors(len(meters_raw), k_true, concentration, background)
        if shared:
            mean = np.mean(priors, axis=0)
            priors = [mean.copy() for _ in meters_raw]
    meters = []
    for m, prior in zip(meters_raw, priors):
        meters.append(
            SynthMeter(
                template=MeterTemplate.of(m["foot"], int(m["feet"])),
                prior=prior,
                pos_profile=m.get("pos_profile"),
            )
        )
    known = {
        "vocab_size",
        "poems_per_meter",
        "lines",
        "tokens_per_line",
        "omission_rate",
        "drift",
        "boundary_year",
        "years",
        "topic_word_concentration",
        "seed",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown spec field(s): {sorted(unknown)}")
    kwargs = {key: raw[key] for key in known if key in raw}
    for pair_key in ("lines", "tokens_per_line", "years"):
        if pair_key in kwargs:
            kwargs[pair_key] = tuple(kwargs[pair_key])
    return SynthSpec(meters=meters, k_true=k_true, **kwargs)
