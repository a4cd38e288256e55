"""Hypothesis protocols over sampled, aggregated topic vectors.

Three experiments plus one baseline:

  * same-meter clustering: k-means over mean topic vectors of random
    same-meter poem samples, scored by adjusted Rand index,
  * period-split clustering: the same protocol run independently on the
    early and late halves of the corpus with one shared meter whitelist,
  * cross-period classification: polynomial-kernel SVM accuracy as a
    function of sample size, trained on one period and tested on the
    other (plus a leave-one-out series over the whole corpus),
  * POS baseline: the clustering protocol with part-of-speech frequency
    vectors instead of topic vectors.

Every iteration derives its own generator from the master seed and the
iteration index, so iterations can run in any order or in parallel and
still produce the same multiset of metric values.
"""

from __future__ import annotations

import csv
import json
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import Corpus
from .mlcore import adjusted_rand_index, kmeans, pca_biplot, svm_predict, svm_train
from .topics import TopicModel

__all__ = [
    "BiplotData",
    "ExperimentConfig",
    "ExperimentReport",
    "aggregate",
    "biplot_data",
    "draw_samples",
    "pos_baseline",
    "run_h1",
    "run_h2",
    "run_h3",
    "summarize",
    "write_biplot_csv",
    "write_h3_csv",
    "write_h3_json",
    "write_report_csv",
    "write_report_json",
]

DEFAULT_SAMPLE_SIZES = (1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)

# Prefixes keep the derived seed streams of the protocols disjoint.
_H1_PREFIX = (0,)
_H2_EARLY_PREFIX = (1,)
_H2_LATE_PREFIX = (2,)
_H3_PREFIX = 3
_POS_PREFIX = (4,)


@dataclass
class ExperimentConfig:
    meters: Sequence[str] | None = None
    min_poems: int = 500
    sample_size: int = 100
    samples_per_meter: int | None = None
    iterations: int = 1000
    seed: int = 0
    boundary_year: int | None = None
    sample_sizes: tuple[int, ...] = DEFAULT_SAMPLE_SIZES
    svm_c: float = 1.0
    svm_degree: int = 3
    kmeans_restarts: int = 10
    pos_filter: tuple[str, ...] = ("NOUN", "ADJ", "VERB")
    threads: int = 1

    def __post_init__(self) -> None:
        if self.sample_size < 1:
            raise ValueError("sample_size must be >= 1")
        if self.samples_per_meter is not None and self.samples_per_meter < 1:
            raise ValueError("samples_per_meter must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not self.sample_sizes or any(s < 1 for s in self.sample_sizes):
            raise ValueError("sample_sizes must be a non-empty list of sizes >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not self.pos_filter:
            raise ValueError("pos_filter must not be empty")


@dataclass
class ExperimentReport:
    kind: str
    values: list[float]
    summary: dict[str, float]
    config: dict
    seed: int
    period: str | None = None
    series: str | None = None
    sample_size: int | None = None


def summarize(values: Sequence[float]) -> dict[str, float]:
    """Mean, sample std (0 for a single value), median, 5th/95th percentiles."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no values to summarize")
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
        "median": float(np.median(arr)),
        "p05": float(np.percentile(arr, 5)),
        "p95": float(np.percentile(arr, 95)),
    }


def draw_samples(
    pools: dict[str, Sequence[str]],
    sample_size: int,
    samples_per_meter: int,
    rng: np.random.Generator,
) -> list[tuple[str, tuple[str, ...]]]:
    """Disjoint same-meter samples, balanced across meters.

    Returns (meter, member ids) pairs, meters in sorted order. Within one
    call the samples of a meter never share a poem.
    """
    if sample_size < 1 or samples_per_meter < 1:
        raise ValueError("sample_size and samples_per_meter must be >= 1")
    out: list[tuple[str, tuple[str, ...]]] = []
    for meter in sorted(pools):
        ids = pools[meter]
        need = sample_size * samples_per_meter
        if len(ids) < need:
            raise ValueError(
                f"meter {meter!r} has {len(ids)} usable poems; need {need} "
                f"({samples_per_meter} samples x {sample_size} poems)"
            )
        order = rng.permutation(len(ids))
        for s in range(samples_per_meter):
            chunk = order[s * sample_size : (s + 1) * sample_size]
            out.append((meter, tuple(ids[int(i)] for i in chunk)))
    return out


def aggregate(member_vectors: Iterable[np.ndarray]) -> np.ndarray:
    """Arithmetic mean of the member vectors."""
    stacked = np.asarray(list(member_vectors), dtype=np.float64)
    if stacked.size == 0:
        raise ValueError("cannot aggregate an empty sample")
    return stacked.mean(axis=0)


def _resolve_whitelist(
    counts: Counter, config: ExperimentConfig
) -> list[str]:
    if config.meters is not None:
        meters = sorted(set(config.meters))
        missing = [m for m in meters if counts.get(m, 0) == 0]
        if missing:
            raise ValueError(f"whitelisted meter(s) not present: {missing}")
    else:
        meters = sorted(m for m, c in counts.items() if c > config.min_poems)
    if len(meters) < 2:
        raise ValueError(
            f"need at least 2 meters, got {meters} "
            f"(counts: {dict(sorted(counts.items()))})"
        )
    return meters


def _build_pools(
    ordered_ids: Sequence[str], labels: dict[str, str], meters: Sequence[str]
) -> dict[str, list[str]]:
    pools: dict[str, list[str]] = {m: [] for m in meters}
    for pid in ordered_ids:
        label = labels.get(pid)
        if label in pools:
            pools[label].append(pid)
    return pools


def _resolve_spm(
    pools: dict[str, list[str]], config: ExperimentConfig, default: int | None = None
) -> int:
    """Samples per meter: explicit, or a fixed default, or the balanced
    minimum over meters capped at 10."""
    if config.samples_per_meter is not None:
        return config.samples_per_meter
    if default is not None:
        return default
    spm = min(len(ids) // config.sample_size for ids in pools.values())
    if spm < 1:
        thin = min(pools, key=lambda m: len(pools[m]))
        raise ValueError(
            f"meter {thin!r} has {len(pools[thin])} usable poems; "
            f"fewer than one sample of {config.sample_size}"
        )
    return min(spm, 10)


def _map_iterations(
    fn: Callable[[int], float], iterations: int, threads: int
) -> list[float]:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(iterations)))
    return [fn(i) for i in range(iterations)]


def _cluster_iteration(
    vectors: dict[str, np.ndarray],
    pools: dict[str, list[str]],
    meters: list[str],
    config: ExperimentConfig,
    spm: int,
    prefix: tuple[int, ...],
    iteration: int,
) -> float:
    rng = np.random.default_rng([config.seed, *prefix, iteration])
    samples = draw_samples(pools, config.sample_size, spm, rng)
    points = np.stack(
        [aggregate(vectors[pid] for pid in members) for _, members in samples]
    )
    true = [meters.index(meter) for meter, _ in samples]
    km_seed = int(rng.integers(0, 2**31 - 1))
    assignment = kmeans(
        points, k=len(meters), seed=km_seed, restarts=config.kmeans_restarts
    )
    return adjusted_rand_index(true, assignment.labels)


def _run_clustering(
    vectors: dict[str, np.ndarray],
    labels: dict[str, str],
    config: ExperimentConfig,
    kind: str,
    prefix: tuple[int, ...],
    meters: list[str] | None = None,
    spm_default: int | None = None,
    period: str | None = None,
    id_subset: set[str] | None = None,
) -> ExperimentReport:
    ordered_ids = [
        pid
        for pid in vectors
        if pid in labels and (id_subset is None or pid in id_subset)
    ]
    if meters is None:
        counts = Counter(labels[pid] for pid in ordered_ids)
        meters = _resolve_whitelist(counts, config)
    pools = _build_pools(ordered_ids, labels, meters)
    spm = _resolve_spm(pools, config, spm_default)
    values = _map_iterations(
        lambda i: _cluster_iteration(vectors, pools, meters, config, spm, prefix, i),
        config.iterations,
        config.threads,
    )
    echo = _config_echo(config, meters, spm)
    return ExperimentReport(
        kind=kind,
        values=values,
        summary=summarize(values),
        config=echo,
        seed=config.seed,
        period=period,
    )


def _config_echo(
    config: ExperimentConfig, meters: list[str], spm: int
) -> dict:
    return {
        "meters": list(meters),
        "min_poems": config.min_poems,
        "sample_size": config.sample_size,
        "samples_per_meter": spm,
        "iterations": config.iterations,
        "seed": config.seed,
        "boundary_year": config.boundary_year,
        "sample_sizes": list(config.sample_sizes),
        "svm_c": config.svm_c,
        "svm_degree": config.svm_degree,
        "kmeans_restarts": config.kmeans_restarts,
        "pos_filter": list(config.pos_filter),
        "threads": config.threads,
    }


def _model_vectors(model: TopicModel, labels: dict[str, str]) -> dict[str, np.ndarray]:
    return {
        pid: model.theta[model.doc_index[pid]]
        for pid in model.doc_ids
        if pid in labels
    }


def run_h1(
    model: TopicModel, labels: dict[str, str], config: ExperimentConfig
) -> ExperimentReport:
    """Same-meter clustering over the whole corpus."""
    vectors = _model_vectors(model, labels)
    return _run_clustering(vectors, labels, config, kind="h1", prefix=_H1_PREFIX)


def _split_ids(corpus: Corpus, boundary_year: int) -> tuple[set[str], set[str]]:
    early = {p.id for p in corpus if p.year is not None and p.year < boundary_year}
    late = {p.id for p in corpus if p.year is not None and p.year >= boundary_year}
    return early, late


def run_h2(
    corpus: Corpus,
    model: TopicModel,
    labels: dict[str, str],
    config: ExperimentConfig,
) -> tuple[ExperimentReport, ExperimentReport]:
    """Clustering run independently on the early and late halves.

    The meter whitelist is resolved once on the whole labeled corpus, so
    both halves cluster the same set of meters.
    """
    if config.boundary_year is None:
        raise ValueError("boundary_year is required for the period split")
    vectors = _model_vectors(model, labels)
    counts = Counter(labels[pid] for pid in vectors)
    meters = _resolve_whitelist(counts, config)
    early_ids, late_ids = _split_ids(corpus, config.boundary_year)
    reports = []
    for period, ids, prefix in (
        ("early", early_ids, _H2_EARLY_PREFIX),
        ("late", late_ids, _H2_LATE_PREFIX),
    ):
        reports.append(
            _run_clustering(
                vectors,
                labels,
                config,
                kind="h2",
                prefix=prefix,
                meters=meters,
                spm_default=5,
                period=period,
                id_subset=ids,
            )
        )
    return reports[0], reports[1]


def _svm_accuracy(
    train_x: np.ndarray,
    train_y: list[str],
    test_x: np.ndarray,
    test_y: list[str],
    config: ExperimentConfig,
) -> float:
    machine = svm_train(train_x, train_y, c=config.svm_c, degree=config.svm_degree)
    predicted = svm_predict(machine, test_x)
    return float(np.mean([p == t for p, t in zip(predicted, test_y)]))


def _h3_iteration(
    series: str,
    vectors: dict[str, np.ndarray],
    pools_train: dict[str, list[str]],
    pools_test: dict[str, list[str]] | None,
    config: ExperimentConfig,
    size: int,
    spm: int,
    prefix: tuple[int, ...],
    iteration: int,
) -> float:
    rng = np.random.default_rng([config.seed, *prefix, iteration])
    train = draw_samples(pools_train, size, spm, rng)
    train_x = np.stack(
        [aggregate(vectors[pid] for pid in members) for _, members in train]
    )
    train_y = [meter for meter, _ in train]
    if series == "loo":
        n = len(train)
        correct = 0
        for hold in range(n):
            keep = [j for j in range(n) if j != hold]
            prediction = _svm_accuracy(
                train_x[keep],
                [train_y[j] for j in keep],
                train_x[hold : hold + 1],
                [train_y[hold]],
                config,
            )
            correct += prediction
        return correct / n
    assert pools_test is not None
    test = draw_samples(pools_test, size, spm, rng)
    test_x = np.stack(
        [aggregate(vectors[pid] for pid in members) for _, members in test]
    )
    test_y = [meter for meter, _ in test]
    return _svm_accuracy(train_x, train_y, test_x, test_y, config)


def run_h3(
    corpus: Corpus,
    model: TopicModel,
    labels: dict[str, str],
    config: ExperimentConfig,
) -> list[ExperimentReport]:
    """Classification accuracy versus sample size, three series:
    leave-one-out over the whole corpus, train early / test late, and
    train late / test early."""
    if config.boundary_year is None:
        raise ValueError("boundary_year is required for the period split")
    vectors = _model_vectors(model, labels)
    ordered_ids = list(vectors)
    counts = Counter(labels[pid] for pid in ordered_ids)
    meters = _resolve_whitelist(counts, config)
    early_ids, late_ids = _split_ids(corpus, config.boundary_year)
    pools_all = _build_pools(ordered_ids, labels, meters)
    pools_early = _build_pools(
        [pid for pid in ordered_ids if pid in early_ids], labels, meters
    )
    pools_late = _build_pools(
        [pid for pid in ordered_ids if pid in late_ids], labels, meters
    )
    spm = config.samples_per_meter if config.samples_per_meter is not None else 5
    series_table = (
        ("loo", pools_all, None),
        ("early-late", pools_early, pools_late),
        ("late-early", pools_late, pools_early),
    )
    reports = []
    for series_idx, (series, pools_train, pools_test) in enumerate(series_table):
        for size_idx, size in enumerate(config.sample_sizes):
            prefix = (_H3_PREFIX, series_idx, size_idx)
            values = _map_iterations(
                lambda i: _h3_iteration(
                    series,
                    vectors,
                    pools_train,
                    pools_test,
                    config,
                    size,
                    spm,
                    prefix,
                    i,
                ),
                config.iterations,
                config.threads,
            )
            reports.append(
                ExperimentReport(
                    kind="h3",
                    values=values,
                    summary=summarize(values),
                    config=_config_echo(config, meters, spm),
                    seed=config.seed,
                    series=series,
                    sample_size=size,
                )
            )
    return reports


def pos_vectors(
    corpus: Corpus, pos_filter: Sequence[str]
) -> dict[str, np.ndarray]:
    """Per-poem relative frequencies of the admitted POS tags."""
    tags = sorted(set(pos_filter))
    index = {t: i for i, t in enumerate(tags)}
    out: dict[str, np.ndarray] = {}
    skipped = []
    for poem in corpus:
        vec = np.zeros(len(tags))
        for line in poem.lines:
            for token in line.tokens:
                slot = index.get(token.pos)
                if slot is not None:
                    vec[slot] += 1.0
        total = vec.sum()
        if total > 0:
            out[poem.id] = vec / total
        else:
            skipped.append(poem.id)
    if skipped:
        warnings.warn(
            f"{len(skipped)} poem(s) without admitted POS tags skipped "
            f"(first: {skipped[0]})"
        )
    return out


def pos_baseline(
    corpus: Corpus, labels: dict[str, str], config: ExperimentConfig
) -> ExperimentReport:
    """The clustering protocol over POS-frequency vectors."""
    vectors = pos_vectors(corpus, config.pos_filter)
    return _run_clustering(
        vectors, labels, config, kind="pos-baseline", prefix=_POS_PREFIX
    )


@dataclass
class BiplotData:
    sample_ids: list[str]
    meters: list[str]
    coordinates: np.ndarray
    loadings: np.ndarray
    explained_variance: np.ndarray
    top_topics: list[int] = field(default_factory=list)


def biplot_data(
    model: TopicModel,
    labels: dict[str, str],
    config: ExperimentConfig,
    iteration: int = 0,
) -> BiplotData:
    """PCA projection of one clustering iteration's aggregated samples.

    Reuses the same derived seed as that iteration of the whole-corpus
    clustering run, so the plotted samples are exactly the clustered ones.
    """
    vectors = _model_vectors(model, labels)
    ordered_ids = list(vectors)
    counts = Counter(labels[pid] for pid in ordered_ids)
    meters = _resolve_whitelist(counts, config)
    pools = _build_pools(ordered_ids, labels, meters)
    spm = _resolve_spm(pools, config)
    rng = np.random.default_rng([config.seed, *_H1_PREFIX, iteration])
    samples = draw_samples(pools, config.sample_size, spm, rng)
    points = np.stack(
        [aggregate(vectors[pid] for pid in members) for _, members in samples]
    )
    result = pca_biplot(points, components=2, top_features=5)
    counters: Counter = Counter()
    sample_ids = []
    sample_meters = []
    for meter, _ in samples:
        sample_ids.append(f"{meter}-{counters[meter]}")
        counters[meter] += 1
        sample_meters.append(meter)
    return BiplotData(
        sample_ids=sample_ids,
        meters=sample_meters,
        coordinates=result.coordinates,
        loadings=result.loadings,
        explained_variance=result.explained_variance,
        top_topics=list(result.top_features),
    )


def write_report_csv(report: ExperimentReport, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["iteration", "value"])
        for i, value in enumerate(report.values):
            writer.writerow([i, f"{value:.17g}"])


def _report_payload(report: ExperimentReport) -> dict:
    payload = {
        "kind": report.kind,
        "seed": report.seed,
        "summary": report.summary,
        "config": report.config,
    }
    for key in ("period", "series", "sample_size"):
        value = getattr(report, key)
        if value is not None:
            payload[key] = value
    return payload


def write_report_json(report: ExperimentReport, path: str | Path) -> None:
    text = json.dumps(_report_payload(report), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_h3_csv(reports: Sequence[ExperimentReport], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["series", "sample_size", "iteration", "value"])
        for report in reports:
            for i, value in enumerate(report.values):
                writer.writerow(
                    [report.series, report.sample_size, i, f"{value:.17g}"]
                )


def write_h3_json(reports: Sequence[ExperimentReport], path: str | Path) -> None:
    payload = {
        "kind": "h3",
        "seed": reports[0].seed if reports else None,
        "config": reports[0].config if reports else {},
        "series": [
            {
                "series": r.series,
                "sample_size": r.sample_size,
                "summary": r.summary,
            }
            for r in reports
        ],
    }
    text = json.dumps(payload, sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_biplot_csv(
    data: BiplotData, points_path: str | Path, loadings_path: str | Path
) -> None:
    with Path(points_path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["sample_id", "meter", "x", "y"])
        for sid, meter, (x, y) in zip(data.sample_ids, data.meters, data.coordinates):
            writer.writerow([sid, meter, f"{x:.17g}", f"{y:.17g}"])
    with Path(loadings_path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["topic", "x", "y"])
        for t in data.top_topics:
            writer.writerow(
                [t, f"{data.loadings[t, 0]:.17g}", f"{data.loadings[t, 1]:.17g}"]
            )
