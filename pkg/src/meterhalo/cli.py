"""Command-line pipeline driver.

Subcommands cover the full workflow: ingest, scan, simplify, train-lda,
h1, h2, h3, pos-baseline, distinctive-topics, biplot, synth. Every run
writes a JSON manifest beside its outputs recording the resolved
configuration, input digests, output paths, tool version, and timing, so
any result file can be traced to the exact invocation that produced it.

Configuration resolution order: built-in defaults, then an optional
--config JSON file, then explicit flags (flags win).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .corpus import CorpusFormatError, _now, filter_by_size, load_corpus, save_corpus
from .experiments import (
    DEFAULT_SAMPLE_SIZES,
    ExperimentConfig,
    biplot_data,
    pos_baseline,
    run_h1,
    run_h2,
    run_h3,
    write_biplot_csv,
    write_h3_csv,
    write_h3_json,
    write_report_csv,
    write_report_json,
)
from .scansion import default_templates, scan_corpus, write_scan_report
from .simplify import (
    build_vocab,
    save_vectors,
    simplify,
    train_embeddings,
    write_simplify_report,
)
from .synth import generate_files, spec_from_dict
from .topics import (
    TopicConfig,
    TopicModel,
    build_documents,
    distinctive_topics,
    train_lda,
    write_theta_csv,
)

_INGEST_DEFAULTS = {"min_tokens": 20, "max_tokens": 2000}
_SCAN_DEFAULTS = {"threshold": 0.8, "max_binary_feet": 8, "max_ternary_feet": 6}
_SIMPLIFY_DEFAULTS = {
    "top_n": 1000,
    "window": 5,
    "dim": 100,
    "neighbors": 10,
    "smoothing": 0.75,
    "pos": ["NOUN", "ADJ", "VERB"],
}
_TRAIN_DEFAULTS = {
    "topics": 100,
    "alpha": None,
    "beta": 0.01,
    "iterations": 1000,
    "burn_in": 500,
    "sample_lag": 50,
    "seed": 0,
    "min_frequency": 5,
    "pos": ["NOUN", "ADJ", "VERB"],
}
_EXP_DEFAULTS = {
    "meters": None,
    "min_poems": 500,
    "sample_size": 100,
    "samples_per_meter": None,
    "iterations": 1000,
    "seed": 0,
    "boundary_year": None,
    "sample_sizes": list(DEFAULT_SAMPLE_SIZES),
    "svm_c": 1.0,
    "svm_degree": 3,
    "kmeans_restarts": 10,
    "pos_filter": ["NOUN", "ADJ", "VERB"],
    "threads": 1,
}
_BIPLOT_DEFAULTS = {**_EXP_DEFAULTS, "iteration": 0}
_DISTINCTIVE_DEFAULTS = {"top": 5, "words": 3}


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(
    path: str | Path,
    subcommand: str,
    config: dict,
    seed: int | None,
    inputs: list,
    outputs: list,
    started: float,
) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "seed": seed,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "duration_seconds": round(time.monotonic() - started, 3),
        "created_utc": _now(),
    }
    Path(path).write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _load_config_file(args: argparse.Namespace) -> dict:
    if getattr(args, "config", None) is None:
        return {}
    with Path(args.config).open("r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError(f"{args.config}: config file must hold a JSON object")
    return data


def _merge(args: argparse.Namespace, defaults: dict, file_cfg: dict) -> dict:
    unknown = set(file_cfg) - set(defaults)
    if unknown:
        raise ValueError(f"unknown config key(s): {sorted(unknown)}")
    cfg = dict(defaults)
    cfg.update(file_cfg)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _apply_paper_scale(args: argparse.Namespace, file_cfg: dict, cfg: dict) -> None:
    explicit = getattr(args, "iterations", None) is not None or "iterations" in file_cfg
    if getattr(args, "paper_scale", False) and not explicit:
        cfg["iterations"] = 10000


def _split_csv(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def _normalize_exp(cfg: dict) -> dict:
    if isinstance(cfg.get("meters"), str):
        cfg["meters"] = _split_csv(cfg["meters"])
    if isinstance(cfg.get("sample_sizes"), str):
        cfg["sample_sizes"] = [int(s) for s in _split_csv(cfg["sample_sizes"])]
    if isinstance(cfg.get("pos_filter"), str):
        cfg["pos_filter"] = _split_csv(cfg["pos_filter"])
    return cfg


def _experiment_config(cfg: dict) -> ExperimentConfig:
    return ExperimentConfig(
        meters=cfg.get("meters"),
        min_poems=int(cfg["min_poems"]),
        sample_size=int(cfg["sample_size"]),
        samples_per_meter=(
            None
            if cfg.get("samples_per_meter") is None
            else int(cfg["samples_per_meter"])
        ),
        iterations=int(cfg["iterations"]),
        seed=int(cfg["seed"]),
        boundary_year=(
            None if cfg.get("boundary_year") is None else int(cfg["boundary_year"])
        ),
        sample_sizes=tuple(int(s) for s in cfg["sample_sizes"]),
        svm_c=float(cfg["svm_c"]),
        svm_degree=int(cfg["svm_degree"]),
        kmeans_restarts=int(cfg["kmeans_restarts"]),
        pos_filter=tuple(cfg["pos_filter"]),
        threads=int(cfg["threads"]),
    )


def _read_labels(path: str | Path) -> dict[str, str]:
    """Poem labels from a scan report (or a ground-truth CSV with a
    'meter' column); unlabeled rows are skipped."""
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        fields = reader.fieldnames or []
        if "poem_id" not in fields:
            raise ValueError(f"{path}: expected a CSV with a poem_id column")
        column = "label" if "label" in fields else "meter" if "meter" in fields else None
        if column is None:
            raise ValueError(f"{path}: expected a label or meter column")
        return {row["poem_id"]: row[column] for row in reader if row.get(column)}


def _extra_inputs(args: argparse.Namespace) -> list[str]:
    return [args.config] if getattr(args, "config", None) else []


def _cmd_ingest(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = _merge(args, _INGEST_DEFAULTS, _load_config_file(args))
    corpus = load_corpus(args.input)
    kept = filter_by_size(
        corpus, min_tokens=int(cfg["min_tokens"]), max_tokens=int(cfg["max_tokens"])
    )
    save_corpus(kept, args.output)
    _write_manifest(
        f"{args.output}.manifest.json",
        "ingest",
        cfg,
        None,
        [args.input] + _extra_inputs(args),
        [args.output],
        started,
    )
    print(f"ingest: kept {len(kept)} of {len(corpus)} poems -> {args.output}")
    return 0


def _cmd_scan(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = _merge(args, _SCAN_DEFAULTS, _load_config_file(args))
    corpus = load_corpus(args.input)
    templates = default_templates(
        max_binary_feet=int(cfg["max_binary_feet"]),
        max_ternary_feet=int(cfg["max_ternary_feet"]),
    )
    rows = scan_corpus(corpus, templates, threshold=float(cfg["threshold"]))
    write_scan_report(rows, args.output)
    _write_manifest(
        f"{args.output}.manifest.json",
        "scan",
        cfg,
        None,
        [args.input] + _extra_inputs(args),
        [args.output],
        started,
    )
    labeled = sum(1 for _, label, _, _ in rows if label)
    if labeled == 0:
        print("warning: no poem passed the labeling threshold", file=sys.stderr)
    print(f"scan: labeled {labeled} of {len(rows)} poems -> {args.output}")
    return 0


def _cmd_simplify(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = _merge(args, _SIMPLIFY_DEFAULTS, _load_config_file(args))
    if isinstance(cfg["pos"], str):
        cfg["pos"] = _split_csv(cfg["pos"])
    pos_filter = frozenset(cfg["pos"])
    corpus = load_corpus(args.input)
    vocab = build_vocab(corpus, pos_filter=pos_filter, top_n=int(cfg["top_n"]))
    model = train_embeddings(
        corpus,
        window=int(cfg["window"]),
        dim=int(cfg["dim"]),
        pos_filter=pos_filter,
        smoothing=float(cfg["smoothing"]),
    )
    simplified, report = simplify(
        corpus, vocab, model, top_n=int(cfg["top_n"]), k=int(cfg["neighbors"])
    )
    save_corpus(simplified, args.output)
    outputs = [args.output]
    if args.report:
        write_simplify_report(report, vocab, args.report)
        outputs.append(args.report)
    if args.save_vectors:
        save_vectors(model, args.save_vectors)
        outputs.append(args.save_vectors)
    _write_manifest(
        f"{args.output}.manifest.json",
        "simplify",
        cfg,
        None,
        [args.input] + _extra_inputs(args),
        outputs,
        started,
    )
    print(
        f"simplify: replaced {report.replaced_tokens} tokens "
        f"({len(report.replacements)} lemmas), vocabulary "
        f"{report.vocab_before} -> {report.vocab_after} -> {args.output}"
    )
    return 0


def _cmd_train_lda(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = _merge(args, _TRAIN_DEFAULTS, _load_config_file(args))
    if isinstance(cfg["pos"], str):
        cfg["pos"] = _split_csv(cfg["pos"])
    corpus = load_corpus(args.input)
    doc_ids, docs = build_documents(
        corpus,
        pos_filter=frozenset(cfg["pos"]),
        min_frequency=int(cfg["min_frequency"]),
    )
    config = TopicConfig(
        k=int(cfg["topics"]),
        alpha=None if cfg["alpha"] is None else float(cfg["alpha"]),
        beta=float(cfg["beta"]),
        iterations=int(cfg["iterations"]),
        burn_in=int(cfg["burn_in"]),
        sample_lag=int(cfg["sample_lag"]),
        seed=int(cfg["seed"]),
    )
    cfg["alpha"] = config.alpha
    model = train_lda(docs, config, doc_ids=doc_ids)
    model.save(args.output)
    outputs = [args.output]
    if args.theta_csv:
        write_theta_csv(model, args.theta_csv)
        outputs.append(args.theta_csv)
    _write_manifest(
        f"{args.output}.manifest.json",
        "train-lda",
        cfg,
        config.seed,
        [args.input] + _extra_inputs(args),
        outputs,
        started,
    )
    print(
        f"train-lda: k={config.k} over {len(doc_ids)} documents, "
        f"vocabulary {len(model.vocab)} -> {args.output}"
    )
    return 0


def _cmd_h1(args: argparse.Namespace) -> int:
    started = time.monotonic()
    file_cfg = _load_config_file(args)
    cfg = _merge(args, _EXP_DEFAULTS, file_cfg)
    _apply_paper_scale(args, file_cfg, cfg)
    config = _experiment_config(_normalize_exp(cfg))
    model = TopicModel.load(args.model)
    labels = _read_labels(args.labels)
    report = run_h1(model, labels, config)
    csv_path = f"{args.output_prefix}.csv"
    json_path = f"{args.output_prefix}.json"
    write_report_csv(report, csv_path)
    write_report_json(report, json_path)
    _write_manifest(
        f"{args.output_prefix}_manifest.json",
        "h1",
        report.config,
        config.seed,
        [args.model, args.labels] + _extra_inputs(args),
        [csv_path, json_path],
        started,
    )
    summary = report.summary
    print(
        f"h1: median ARI {summary['median']:.3f} (mean {summary['mean']:.3f}) "
        f"over {config.iterations} iterations"
    )
    return 0


def _cmd_h2(args: argparse.Namespace) -> int:
    started = time.monotonic()
    file_cfg = _load_config_file(args)
    cfg = _merge(args, _EXP_DEFAULTS, file_cfg)
    _apply_paper_scale(args, file_cfg, cfg)
    config = _experiment_config(_normalize_exp(cfg))
    corpus = load_corpus(args.corpus)
    model = TopicModel.load(args.model)
    labels = _read_labels(args.labels)
    early, late = run_h2(corpus, model, labels, config)
    outputs = []
    for report, tag in ((early, "early"), (late, "late")):
        csv_path = f"{args.output_prefix}_{tag}.csv"
        json_path = f"{args.output_prefix}_{tag}.json"
        write_report_csv(report, csv_path)
        write_report_json(report, json_path)
        outputs += [csv_path, json_path]
    _write_manifest(
        f"{args.output_prefix}_manifest.json",
        "h2",
        early.config,
        config.seed,
        [args.corpus, args.model, args.labels] + _extra_inputs(args),
        outputs,
        started,
    )
    print(
        f"h2: mean ARI early {early.summary['mean']:.3f} / "
        f"late {late.summary['mean']:.3f}"
    )
    return 0


def _cmd_h3(args: argparse.Namespace) -> int:
    started = time.monotonic()
    file_cfg = _load_config_file(args)
    cfg = _merge(args, _EXP_DEFAULTS, file_cfg)
    _apply_paper_scale(args, file_cfg, cfg)
    config = _experiment_config(_normalize_exp(cfg))
    corpus = load_corpus(args.corpus)
    model = TopicModel.load(args.model)
    labels = _read_labels(args.labels)
    reports = run_h3(corpus, model, labels, config)
    csv_path = f"{args.output_prefix}.csv"
    json_path = f"{args.output_prefix}.json"
    write_h3_csv(reports, csv_path)
    write_h3_json(reports, json_path)
    _write_manifest(
        f"{args.output_prefix}_manifest.json",
        "h3",
        reports[0].config,
        config.seed,
        [args.corpus, args.model, args.labels] + _extra_inputs(args),
        [csv_path, json_path],
        started,
    )
    top_size = max(config.sample_sizes)
    for report in reports:
        if report.sample_size == top_size:
            print(
                f"h3 {report.series} at size {top_size}: "
                f"mean accuracy {report.summary['mean']:.3f}"
            )
    return 0


def _cmd_pos_baseline(args: argparse.Namespace) -> int:
    started = time.monotonic()
    file_cfg = _load_config_file(args)
    cfg = _merge(args, _EXP_DEFAULTS, file_cfg)
    _apply_paper_scale(args, file_cfg, cfg)
    config = _experiment_config(_normalize_exp(cfg))
    corpus = load_corpus(args.corpus)
    labels = _read_labels(args.labels)
    report = pos_baseline(corpus, labels, config)
    csv_path = f"{args.output_prefix}.csv"
    json_path = f"{args.output_prefix}.json"
    write_report_csv(report, csv_path)
    write_report_json(report, json_path)
    _write_manifest(
        f"{args.output_prefix}_manifest.json",
        "pos-baseline",
        report.config,
        config.seed,
        [args.corpus, args.labels] + _extra_inputs(args),
        [csv_path, json_path],
        started,
    )
    print(f"pos-baseline: median ARI {report.summary['median']:.3f}")
    return 0


def _cmd_distinctive_topics(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = _merge(args, _DISTINCTIVE_DEFAULTS, _load_config_file(args))
    model = TopicModel.load(args.model)
    labels = _read_labels(args.labels)
    table = distinctive_topics(
        model, labels, top=int(cfg["top"]), n_words=int(cfg["words"])
    )
    with Path(args.output).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["meter", "rank", "topic", "z_score", "words"])
        for meter in sorted(table):
            for rank, score in enumerate(table[meter], start=1):
                writer.writerow(
                    [
                        meter,
                        rank,
                        score.topic,
                        f"{score.z_score:.17g}",
                        " ".join(score.words),
                    ]
                )
    _write_manifest(
        f"{args.output}.manifest.json",
        "distinctive-topics",
        cfg,
        None,
        [args.model, args.labels] + _extra_inputs(args),
        [args.output],
        started,
    )
    print(f"distinctive-topics: {len(table)} meters -> {args.output}")
    return 0


def _cmd_biplot(args: argparse.Namespace) -> int:
    started = time.monotonic()
    file_cfg = _load_config_file(args)
    cfg = _merge(args, _BIPLOT_DEFAULTS, file_cfg)
    _apply_paper_scale(args, file_cfg, cfg)
    iteration = int(cfg.pop("iteration"))
    config = _experiment_config(_normalize_exp(cfg))
    model = TopicModel.load(args.model)
    labels = _read_labels(args.labels)
    data = biplot_data(model, labels, config, iteration=iteration)
    points_path = f"{args.output_prefix}_points.csv"
    loadings_path = f"{args.output_prefix}_loadings.csv"
    write_biplot_csv(data, points_path, loadings_path)
    cfg["iteration"] = iteration
    _write_manifest(
        f"{args.output_prefix}_manifest.json",
        "biplot",
        cfg,
        config.seed,
        [args.model, args.labels] + _extra_inputs(args),
        [points_path, loadings_path],
        started,
    )
    print(
        f"biplot: {len(data.sample_ids)} samples, explained variance "
        f"{data.explained_variance[0]:.3f}/{data.explained_variance[1]:.3f}"
    )
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    started = time.monotonic()
    with Path(args.spec).open("r", encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, dict):
        raise ValueError(f"{args.spec}: spec file must hold a JSON object")
    spec = spec_from_dict(raw)
    corpus, _ = generate_files(spec, args.output, args.truth)
    _write_manifest(
        f"{args.output}.manifest.json",
        "synth",
        raw,
        spec.seed,
        [args.spec],
        [args.output, args.truth],
        started,
    )
    print(
        f"synth: {len(corpus)} poems across {len(spec.meters)} meters "
        f"-> {args.output}"
    )
    return 0


def _add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config", help="JSON file with configuration defaults; flags win"
    )


def _add_experiment_flags(
    parser: argparse.ArgumentParser, boundary: bool = False, sizes: bool = False
) -> None:
    _add_config_flag(parser)
    parser.add_argument("--meters", help="comma-separated meter whitelist")
    parser.add_argument("--min-poems", type=int)
    parser.add_argument("--sample-size", type=int)
    parser.add_argument("--samples-per-meter", type=int)
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--kmeans-restarts", type=int)
    parser.add_argument("--svm-c", type=float)
    parser.add_argument("--svm-degree", type=int)
    parser.add_argument(
        "--pos", dest="pos_filter", help="comma-separated POS tags for the baseline"
    )
    parser.add_argument("--threads", type=int)
    parser.add_argument(
        "--paper-scale",
        action="store_true",
        help="run 10000 iterations unless --iterations is given",
    )
    if boundary:
        parser.add_argument("--boundary-year", type=int)
    if sizes:
        parser.add_argument("--sample-sizes", help="comma-separated sample sizes")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meterhalo",
        description="Meter labeling, topic modeling, and meter-topic "
        "association experiments for annotated verse corpora.",
    )
    parser.add_argument(
        "--version", action="version", version=f"meterhalo {__version__}"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="command")

    p = sub.add_parser("ingest", help="load, validate, and size-filter a corpus")
    p.add_argument("input")
    p.add_argument("--output", required=True)
    p.add_argument("--min-tokens", type=int)
    p.add_argument("--max-tokens", type=int)
    _add_config_flag(p)
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("scan", help="label poems by meter and emit form codes")
    p.add_argument("input")
    p.add_argument("--output", required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--max-binary-feet", type=int)
    p.add_argument("--max-ternary-feet", type=int)
    _add_config_flag(p)
    p.set_defaults(handler=_cmd_scan)

    p = sub.add_parser(
        "simplify", help="replace rare lemmas with frequent embedding neighbors"
    )
    p.add_argument("input")
    p.add_argument("--output", required=True)
    p.add_argument("--report", help="replacement table CSV")
    p.add_argument("--save-vectors", help="write the trained embedding vectors")
    p.add_argument("--top-n", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--neighbors", type=int)
    p.add_argument("--smoothing", type=float)
    p.add_argument("--pos", help="comma-separated POS tags")
    _add_config_flag(p)
    p.set_defaults(handler=_cmd_simplify)

    p = sub.add_parser("train-lda", help="fit the topic model by collapsed Gibbs")
    p.add_argument("input")
    p.add_argument("--output", required=True, help="model file")
    p.add_argument("--theta-csv", help="also write the document-topic matrix")
    p.add_argument("--topics", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--sample-lag", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--min-frequency", type=int)
    p.add_argument("--pos", help="comma-separated POS tags")
    _add_config_flag(p)
    p.set_defaults(handler=_cmd_train_lda)

    p = sub.add_parser("h1", help="same-meter clustering experiment")
    p.add_argument("--model", required=True)
    p.add_argument("--labels", required=True, help="scan report CSV")
    p.add_argument("--output-prefix", required=True)
    _add_experiment_flags(p)
    p.set_defaults(handler=_cmd_h1)

    p = sub.add_parser("h2", help="period-split clustering experiment")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--output-prefix", required=True)
    _add_experiment_flags(p, boundary=True)
    p.set_defaults(handler=_cmd_h2)

    p = sub.add_parser("h3", help="cross-period classification experiment")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--output-prefix", required=True)
    _add_experiment_flags(p, boundary=True, sizes=True)
    p.set_defaults(handler=_cmd_h3)

    p = sub.add_parser("pos-baseline", help="clustering over POS frequency vectors")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--output-prefix", required=True)
    _add_experiment_flags(p)
    p.set_defaults(handler=_cmd_pos_baseline)

    p = sub.add_parser(
        "distinctive-topics", help="per-meter topics with the highest z-scores"
    )
    p.add_argument("--model", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--top", type=int)
    p.add_argument("--words", type=int)
    _add_config_flag(p)
    p.set_defaults(handler=_cmd_distinctive_topics)

    p = sub.add_parser("biplot", help="PCA projection of one iteration's samples")
    p.add_argument("--model", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--output-prefix", required=True)
    p.add_argument("--iteration", type=int)
    _add_experiment_flags(p)
    p.set_defaults(handler=_cmd_biplot)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--spec", required=True, help="JSON generation spec")
    p.add_argument("--output", required=True, help="corpus JSON Lines path")
    p.add_argument("--truth", required=True, help="ground-truth CSV path")
    p.set_defaults(handler=_cmd_synth)

    return parser


def dispatch(argv: list[str]) -> int:
    """Parse and run; returns the process exit status instead of exiting."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.handler(args)
    except (CorpusFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
