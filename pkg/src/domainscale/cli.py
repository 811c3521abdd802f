"""Command-line pipeline: group categories, label sentences, compare parties.

Subcommands
    group       cluster coding categories into policy domains
    label       train/apply/evaluate the domain classifier
    similarity  per-domain and aggregate party distance matrices
    evaluate    scaling, left-right validation, and permutation tests

Exit codes: 0 success, 1 internal error, 2 invalid input or configuration.
Errors are emitted to stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .corpus import Corpus, DomainScheme, ingest_corpus
from .embeddings import (
    EmbeddingStore,
    WhiteningTransform,
    fit_whitening,
    load_embeddings,
)
from .errors import ConfigError, DomainScaleError, UndefinedResultError
from .grouping import (
    average_linkage_cluster,
    build_category_matrix,
    check_stance_pairing,
    cut_dendrogram,
    finalize_scheme,
    write_category_matrix_csv,
)
from .labeling import (
    ClassifierModel,
    TrainConfig,
    accuracy,
    feature_matrix,
    make_bigrams,
    per_label_accuracy,
    split_validation,
    train_logreg,
    train_majority,
    write_predictions,
)
from .scaling import (
    classical_mds_axis1,
    correlate_with_rile,
    load_rile_codes,
    mantel,
    pearson,
    rile_scores,
)
from .similarity import (
    PartyDistanceMatrix,
    aggregate_matrix,
    build_domain_matrix,
    labels_from_codes,
    read_predictions,
)
from .util import slugify, write_json


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as JSON on stderr."""

    def error(self, message):
        print(
            json.dumps({"error": "UsageError", "message": message}, sort_keys=True),
            file=sys.stderr,
        )
        raise SystemExit(2)


def _warn(message: str) -> None:
    print(json.dumps({"warning": message}, sort_keys=True), file=sys.stderr)


def _require_file(path: str | Path, role: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{role} file not found: {p}")
    return p


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_corpus(config: RunConfig) -> Corpus:
    return ingest_corpus(_require_file(config.corpus, "corpus"), config.corpus_format)


def _load_store(config: RunConfig) -> EmbeddingStore:
    return load_embeddings(_require_file(config.embeddings, "embeddings"))


def _load_scheme(config: RunConfig) -> DomainScheme:
    if config.scheme is None:
        raise ConfigError("this command needs a 'scheme' entry in the config")
    return DomainScheme.load(_require_file(config.scheme, "scheme"))


def _fit_whitening(
    corpus: Corpus, store: EmbeddingStore, config: RunConfig
) -> WhiteningTransform:
    ids = sorted(set(s.id for s in corpus) & set(store.ids))
    if len(ids) < 2:
        raise ConfigError("fewer than 2 corpus sentences have embeddings")
    return fit_whitening(store, ids, eigenvalue_floor=config.eigenvalue_floor)


def _sentence_labels(corpus: Corpus, scheme: DomainScheme, args) -> dict[str, str]:
    if args.labels == "annotated":
        return labels_from_codes(corpus, scheme)
    if not args.predictions:
        raise ConfigError("--labels predicted needs --predictions FILE")
    return read_predictions(_require_file(args.predictions, "predictions"))


# ---------------------------------------------------------------- group


def cmd_group(args) -> int:
    config = load_config(args.config)
    corpus = _load_corpus(config)
    store = _load_store(config)
    whitening = _fit_whitening(corpus, store, config)
    out = _outdir(args)

    matrix, leftovers = build_category_matrix(
        corpus, store, whitening, min_count=config.min_count, threads=args.threads
    )
    write_category_matrix_csv(matrix, out / "category_matrix.csv")

    dendrogram = average_linkage_cluster(matrix)
    dendrogram.to_json(out / "dendrogram.json")

    if config.n_domains is None:
        raise ConfigError("group needs 'n_domains' in the config")
    partition = cut_dendrogram(dendrogram, config.n_domains)

    stance_check = None
    if config.stance_pairs:
        pairs = [tuple(p) for p in config.stance_pairs]
        try:
            stance_check = check_stance_pairing(partition, pairs)
        except DomainScaleError as exc:
            stance_check = {"skipped": str(exc)}
            _warn(f"stance check skipped: {exc}")

    scheme = finalize_scheme(partition, config.overrides, config.domain_names)
    write_json(
        out / "partition.json",
        {
            "k": config.n_domains,
            "clusters": [list(c) for c in partition.clusters],
            "stance_check": stance_check,
            "scheme": {
                "domains": {n: sorted(c) for n, c in scheme.domains().items()},
                "other": sorted(scheme.other_codes),
            },
        },
    )
    write_json(
        out / "leftovers.json",
        {
            "min_count": config.min_count,
            "leftovers": leftovers,
            "overrides": config.overrides,
        },
    )
    return 0


# ---------------------------------------------------------------- label


def _feature_setup(config: RunConfig) -> tuple[EmbeddingStore, str]:
    """Pick the feature store: bigram vectors if configured, else sentence
    vectors keyed by the second sentence."""
    if config.bigram_embeddings:
        return load_embeddings(_require_file(config.bigram_embeddings, "bigram embeddings")), "bigram"
    return _load_store(config), "sentence"


def cmd_label_train(args) -> int:
    config = load_config(args.config)
    corpus = _load_corpus(config)
    scheme = _load_scheme(config)
    store, source = _feature_setup(config)
    out = _outdir(args)

    instances = make_bigrams(corpus, scheme)
    labeled = [inst for inst in instances if inst.label is not None]
    train_set, val_set = split_validation(labeled, holdout=config.holdout)
    x_train = feature_matrix(train_set, store, source)
    y_train = [inst.label for inst in train_set]

    if config.classifier == "majority":
        model = train_majority(y_train, dim=x_train.shape[1])
    else:
        model = train_logreg(
            x_train,
            y_train,
            TrainConfig(
                epochs=config.epochs,
                learning_rate=config.learning_rate,
                l2=config.l2,
            ),
        )

    metadata = dict(model.metadata)
    metadata.update({"features": source, "holdout": config.holdout})
    if val_set:
        x_val = feature_matrix(val_set, store, source)
        y_val = [inst.label for inst in val_set]
        metadata["validation_accuracy"] = accuracy(model.predict(x_val), y_val)
        metadata["n_validation"] = len(val_set)
    model = dataclasses.replace(model, metadata=metadata)
    model.save(out / "model.json")
    return 0


def _model_features(model: ClassifierModel, config: RunConfig) -> tuple[EmbeddingStore, str]:
    source = model.metadata.get("features", "bigram" if config.bigram_embeddings else "sentence")
    if source == "bigram":
        if not config.bigram_embeddings:
            raise ConfigError(
                "model was trained on bigram features but the config has no "
                "'bigram_embeddings' entry"
            )
        return load_embeddings(_require_file(config.bigram_embeddings, "bigram embeddings")), source
    return _load_store(config), source


def cmd_label_predict(args) -> int:
    config = load_config(args.config)
    corpus = _load_corpus(config)
    scheme = _load_scheme(config)
    model = ClassifierModel.load(_require_file(args.model, "model"))
    store, source = _model_features(model, config)
    out = _outdir(args)

    instances = make_bigrams(corpus, scheme)
    x = feature_matrix(instances, store, source)
    write_predictions(out / "predictions.jsonl", instances, model.predict(x))
    return 0


def cmd_label_eval(args) -> int:
    config = load_config(args.config)
    corpus = _load_corpus(config)
    scheme = _load_scheme(config)
    model = ClassifierModel.load(_require_file(args.model, "model"))
    store, source = _model_features(model, config)
    out = _outdir(args)

    labeled = [i for i in make_bigrams(corpus, scheme) if i.label is not None]
    train_set, val_set = split_validation(labeled, holdout=config.holdout)
    if not val_set:
        raise ConfigError("validation split is empty; corpus too small")
    x_val = feature_matrix(val_set, store, source)
    y_val = [inst.label for inst in val_set]
    predicted = model.predict(x_val)

    y_train = [inst.label for inst in train_set]
    baseline = train_majority(y_train, dim=model.dim) if train_set else None

    report = {
        "n_train": len(train_set),
        "n_validation": len(val_set),
        "accuracy": accuracy(predicted, y_val),
        "per_domain_accuracy": per_label_accuracy(predicted, y_val),
        "majority_accuracy": (
            accuracy(baseline.predict(x_val), y_val) if baseline else None
        ),
        "model_metadata": model.metadata,
    }
    write_json(out / "eval.json", report)
    return 0


# ---------------------------------------------------------------- similarity


def _build_matrices(
    config: RunConfig, corpus, store, scheme, labels, threads: int
) -> tuple[list[PartyDistanceMatrix], PartyDistanceMatrix]:
    whitening = _fit_whitening(corpus, store, config)
    per_domain = [
        build_domain_matrix(corpus, store, whitening, scheme, labels, domain, threads)
        for domain in sorted(scheme.domain_names())
    ]
    return per_domain, aggregate_matrix(per_domain, weighted=config.weighted_aggregate)


def cmd_similarity(args) -> int:
    config = load_config(args.config)
    corpus = _load_corpus(config)
    store = _load_store(config)
    scheme = _load_scheme(config)
    labels = _sentence_labels(corpus, scheme, args)
    out = _outdir(args)

    per_domain, aggregate = _build_matrices(
        config, corpus, store, scheme, labels, args.threads
    )
    for matrix in per_domain:
        slug = slugify(matrix.tag)
        matrix.to_csv(out / f"domain_{slug}.csv")
        matrix.to_json(out / f"domain_{slug}.json")
        if not matrix.is_fully_defined():
            _warn(f"domain {matrix.tag!r} has undefined party pairs")
    aggregate.to_csv(out / "aggregate.csv")
    aggregate.to_json(out / "aggregate.json")

    write_json(
        out / "summary.json",
        {
            "labels": args.labels,
            "parties": list(aggregate.parties),
            "domains": [m.tag for m in per_domain],
            "weighted_aggregate": config.weighted_aggregate,
            "coverage": {m.tag: m.coverage for m in per_domain},
        },
    )
    return 0


# ---------------------------------------------------------------- evaluate


def _scaling_block(matrix: PartyDistanceMatrix, scores: dict[str, float] | None) -> dict:
    block: dict = {}
    try:
        scaling = classical_mds_axis1(matrix)
    except (UndefinedResultError, DomainScaleError) as exc:
        return {"scaling": {"undefined": str(exc)}, "pearson_vs_rile": None}
    block["scaling"] = scaling.as_dict()
    if scores is None:
        block["pearson_vs_rile"] = None
    else:
        try:
            block["pearson_vs_rile"] = correlate_with_rile(scaling, scores)
        except (UndefinedResultError, DomainScaleError) as exc:
            block["pearson_vs_rile"] = {"undefined": str(exc)}
    return block


def _mantel_block(
    matrix: PartyDistanceMatrix,
    reference: PartyDistanceMatrix | None,
    config: RunConfig,
    seed: int,
) -> dict | None:
    if reference is None:
        return None
    try:
        ref = reference.reordered(matrix.parties)
        return mantel(matrix, ref, n_perm=config.n_permutations, seed=seed).as_dict()
    except (UndefinedResultError, DomainScaleError) as exc:
        return {"undefined": str(exc)}


def _domain_accuracy(
    corpus: Corpus, scheme: DomainScheme, labels: dict[str, str], domain: str
) -> float | None:
    """Fraction of gold-domain sentences whose working label agrees."""
    gold = [
        s.id
        for s in corpus
        if s.code is not None and scheme.label_of(s.code) == domain
    ]
    if not gold:
        return None
    return sum(labels.get(sid) == domain for sid in gold) / len(gold)


def cmd_evaluate(args) -> int:
    config = load_config(args.config)
    corpus = _load_corpus(config)
    store = _load_store(config)
    scheme = _load_scheme(config)
    labels = _sentence_labels(corpus, scheme, args)
    out = _outdir(args)

    reference = None
    if args.reference:
        reference = PartyDistanceMatrix.from_json(_require_file(args.reference, "reference"))

    per_domain, aggregate = _build_matrices(
        config, corpus, store, scheme, labels, args.threads
    )

    scores = None
    rile_info: dict | None
    try:
        right, left = load_rile_codes(config.rile_codes)
        scores = rile_scores(corpus, right, left)
        rile_info = scores
    except (UndefinedResultError, DomainScaleError) as exc:
        rile_info = {"undefined": str(exc)}
        _warn(f"left-right index unavailable: {exc}")

    domains_report = {}
    for matrix in per_domain:
        block = {
            "coverage": matrix.coverage,
            "defined": matrix.is_fully_defined(),
            "mantel_vs_reference": _mantel_block(matrix, reference, config, args.seed),
            "accuracy": (
                _domain_accuracy(corpus, scheme, labels, matrix.tag)
                if args.labels == "predicted"
                else None
            ),
        }
        block.update(_scaling_block(matrix, scores))
        domains_report[matrix.tag] = block

    aggregate_report = {
        "coverage": aggregate.coverage,
        "defined": aggregate.is_fully_defined(),
        "weighted": config.weighted_aggregate,
        "mantel_vs_reference": _mantel_block(aggregate, reference, config, args.seed),
    }
    aggregate_report.update(_scaling_block(aggregate, scores))

    plot_domains = sorted(domains_report)
    plot_accuracy = [domains_report[d]["accuracy"] for d in plot_domains]
    plot_mantel = [
        (domains_report[d]["mantel_vs_reference"] or {}).get("r")
        for d in plot_domains
    ]
    accuracy_vs_mantel = None
    usable = [
        (a, m)
        for a, m in zip(plot_accuracy, plot_mantel)
        if a is not None and m is not None
    ]
    if len(usable) >= 3:
        try:
            r, p = pearson([u[0] for u in usable], [u[1] for u in usable])
            accuracy_vs_mantel = {"r": r, "p": p}
        except UndefinedResultError as exc:
            accuracy_vs_mantel = {"undefined": str(exc)}

    write_json(
        out / "report.json",
        {
            "labels": args.labels,
            "parties": list(aggregate.parties),
            "reference": args.reference or None,
            "rile": rile_info,
            "domains": domains_report,
            "aggregate": aggregate_report,
            "plot_data": {
                "domains": plot_domains,
                "accuracy": plot_accuracy,
                "mantel_r": plot_mantel,
            },
            "accuracy_vs_mantel": accuracy_vs_mantel,
        },
    )
    return 0


# ---------------------------------------------------------------- wiring


def build_parser() -> _Parser:
    parser = _Parser(prog="domainscale", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, labels=False, model=False, reference=False):
        p.add_argument("--config", required=True, help="run configuration JSON")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        p.add_argument("--seed", type=int, default=0, help="permutation seed")
        if labels:
            p.add_argument(
                "--labels",
                choices=("annotated", "predicted"),
                default="annotated",
                help="use gold codes or classifier predictions",
            )
            p.add_argument("--predictions", help="predictions JSONL (with --labels predicted)")
        if model:
            p.add_argument("--model", required=True, help="trained model JSON")
        if reference:
            p.add_argument("--reference", help="reference party-distance matrix JSON")

    p_group = sub.add_parser("group", help="cluster categories into domains")
    common(p_group)
    p_group.set_defaults(func=cmd_group)

    p_label = sub.add_parser("label", help="domain classifier commands")
    label_sub = p_label.add_subparsers(dest="label_command", required=True, parser_class=_Parser)
    p_train = label_sub.add_parser("train", help="fit the classifier")
    common(p_train)
    p_train.set_defaults(func=cmd_label_train)
    p_predict = label_sub.add_parser("predict", help="label every sentence")
    common(p_predict, model=True)
    p_predict.set_defaults(func=cmd_label_predict)
    p_eval = label_sub.add_parser("eval", help="score on the validation split")
    common(p_eval, model=True)
    p_eval.set_defaults(func=cmd_label_eval)

    p_sim = sub.add_parser("similarity", help="party distance matrices")
    common(p_sim, labels=True)
    p_sim.set_defaults(func=cmd_similarity)

    p_evaluate = sub.add_parser("evaluate", help="scaling and validation report")
    common(p_evaluate, labels=True, reference=True)
    p_evaluate.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DomainScaleError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        line = getattr(exc, "line", None)
        if line is not None:
            payload["line"] = line
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(
            json.dumps(
                {"error": type(exc).__name__, "message": str(exc)}, sort_keys=True
            ),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
