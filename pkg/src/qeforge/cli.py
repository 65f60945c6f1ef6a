"""Command-line pipeline: composable stages under one governing seed.

Every stage derives its randomness from (seed, stage name, segment id), so
running `pipeline` equals running the stage subcommands by hand, and the
same seed always reproduces byte-identical datasets, manifests, and
reports. The seed resolves as flag > config file > QEFORGE_SEED > default.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__, annotate, consensus, evaluation, fixtures, ingest, perturb, sampling
from .bleu import BleuConfig, Tokenizer, active_backend, sentence_bleu
from .errors import ConfigError, PipelineStageError, QeforgeError
from .morph import augment_corpus, read_lexicon
from .records import (
    ScoredSegment,
    build_manifest,
    manifest_path,
    read_dataset,
    write_dataset,
    write_manifest,
)
from .seeds import MAX_SEED, rng_for

SEED_ENV_VAR = "QEFORGE_SEED"
DEFAULT_SEED = 42

# Corpus sizes from the study this toolkit reproduces; the pipeline's
# --scale flag multiplies them (desk-scale default 0.01).
FULL_SCALE_SIZES = {
    "ranked_segments": 14_000,
    "expanded_dataset": 200_000,
    "with_negatives": 400_000,
    "normal_sample": 500_000,
    "uniform_sample": 430_000,
    "random_sample_small": 1_000_000,
    "random_sample_large": 4_000_000,
}

DEFAULT_SCALE = 0.01


def _load_config(path: str | None) -> dict[str, str]:
    """Key=value config file; blank lines and # comments ignored."""
    if path is None:
        return {}
    config: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            config[key.strip()] = value.strip()
    return config


def _resolve_seed(args: argparse.Namespace, config: dict[str, str]) -> int:
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    elif "seed" in config:
        seed = int(config["seed"])
    elif SEED_ENV_VAR in os.environ:
        seed = int(os.environ[SEED_ENV_VAR])
    else:
        seed = DEFAULT_SEED
    if not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"seed {seed} outside 0..2^64-1")
    return seed


def _bleu_config(args: argparse.Namespace) -> BleuConfig:
    return BleuConfig(
        max_order=getattr(args, "max_order", 4),
        smoothing_epsilon=getattr(args, "epsilon", 0.1),
        tokenizer=Tokenizer(getattr(args, "tokenizer", "whitespace_plus_punct_split")),
    )


def _validate_threshold(threshold: float) -> float:
    if not 0.0 < threshold <= 1.0:
        raise ConfigError(f"threshold {threshold} outside (0, 1]")
    return threshold


def _validate_cap(cap: float) -> float:
    if not 0.0 < cap < 1.0:
        raise ConfigError(f"zero-cap {cap} outside (0, 1)")
    return cap


def _spec_by_name(name: str) -> sampling.DistributionSpec | None:
    if name == "uniform":
        return sampling.uniform_spec()
    if name == "normal":
        return sampling.normal_spec()
    if name == "skew3":
        return sampling.skew_spec(majority_class=3, majority_share=0.9)
    if name == "random":
        return None
    raise ConfigError(f"unknown spec {name!r} (expected uniform, normal, random, skew3)")


# ---------------------------------------------------------------------------
# Stage implementations shared by subcommands and `pipeline`
# ---------------------------------------------------------------------------


def _stage_translate(
    sources: list[str], seed: int, out_path: Path, id_prefix: str = "gen"
) -> int:
    client = fixtures.fixture_client(seed)
    sets = [
        ingest.translate_all(text, fixtures.FIXTURE_ENGINES, client, f"{id_prefix}{i:06d}")
        for i, text in enumerate(sources)
    ]
    return consensus.write_candidate_sets(out_path, sets)


def _stage_filter(
    candidates_path: Path, threshold: float, cfg: BleuConfig, out_path: Path
) -> consensus.FilterReport:
    sets = consensus.read_candidate_sets(candidates_path)
    kept, rejected, report = consensus.filter_candidates(sets, threshold, cfg)
    write_dataset(out_path, kept)
    consensus.write_candidate_sets(Path(str(out_path) + ".rejected"), rejected)
    return report


def _write_with_manifest(path: Path, dataset: list[ScoredSegment], seed: int, stage_log) -> None:
    write_dataset(path, dataset)
    manifest = build_manifest(dataset)
    manifest.seed = seed
    manifest.stage_log = stage_log
    write_manifest(manifest_path(path), manifest)


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_ingest(args: argparse.Namespace) -> int:
    pairs = ingest.read_parallel_pairs(args.pairs)
    records = ingest.ingest_professional_corpus(pairs, id_prefix=args.id_prefix)
    count = write_dataset(args.out, records)
    print(f"ingested {count} professional pairs -> {args.out}")
    return 0


def _cmd_prompt(args: argparse.Namespace) -> int:
    if args.examples:
        for ex in ingest.read_usage_examples(args.examples):
            print(ingest.build_generation_prompt(ex, args.min_words))
            print()
    else:
        ex = ingest.UsageExample(args.headword, args.pos, args.example)
        print(ingest.build_generation_prompt(ex, args.min_words))
    return 0


def _cmd_translate_mock(args: argparse.Namespace, seed: int) -> int:
    sources = ingest.read_sentences(args.sources)
    count = _stage_translate(sources, seed, Path(args.out), args.id_prefix)
    print(f"translated {count} sentences with 3 mock engines -> {args.out}")
    return 0


def _cmd_filter(args: argparse.Namespace) -> int:
    threshold = _validate_threshold(args.threshold)
    report = _stage_filter(Path(args.candidates), threshold, _bleu_config(args), Path(args.out))
    print(
        f"filter: kept {report.selected}/{report.total} "
        f"(excluded {report.excluded}, threshold {threshold})"
    )
    return 0


def _cmd_bleu(args: argparse.Namespace) -> int:
    cfg = _bleu_config(args)
    print(f"{sentence_bleu(args.hyp, args.ref, cfg):.6f}")
    return 0


def _cmd_augment_morph(args: argparse.Namespace, seed: int) -> int:
    dataset = read_dataset(args.infile)
    lexicon = read_lexicon(args.lexicon)
    plan: dict[int, int] = {}
    for part in args.plan.split(","):
        n_raw, sep, count_raw = part.partition(":")
        if not sep:
            raise ConfigError(f"bad plan entry {part!r} (expected n:count)")
        plan[int(n_raw)] = int(count_raw)
    out = augment_corpus(dataset, lexicon, plan, seed)
    write_dataset(args.out, out)
    print(f"augment-morph: {len(dataset)} -> {len(out)} records (plan {args.plan})")
    return 0


def _cmd_augment_order(args: argparse.Namespace, seed: int) -> int:
    dataset = read_dataset(args.infile)
    out = list(dataset)
    exhausted = 0
    for seg in dataset:
        if seg.score is None or seg.score < args.min_score:
            continue
        if len(seg.target.split()) < 2:
            continue
        batch = perturb.perturb_batch(seg, args.batch, rng_for(seed, "order", seg.id))
        out.extend(batch.variants)
        exhausted += batch.exhausted
    write_dataset(args.out, out)
    note = f" ({exhausted} segments exhausted their permutation space)" if exhausted else ""
    print(f"augment-order: {len(dataset)} -> {len(out)} records{note}")
    return 0


def _cmd_augment_negatives(args: argparse.Namespace, seed: int) -> int:
    dataset = read_dataset(args.infile)
    count = args.count if args.count is not None else len(dataset)
    negatives = perturb.generate_mismatches(dataset, count, rng_for(seed, "negatives"))
    out = list(dataset) + negatives
    write_dataset(args.out, out)
    print(f"augment-negatives: added {len(negatives)} mismatch records -> {args.out}")
    return 0


def _cmd_sample(args: argparse.Namespace, seed: int) -> int:
    pool = read_dataset(args.infile)
    if args.zero_cap is not None:
        pool = sampling.enforce_zero_cap(pool, _validate_cap(args.zero_cap), rng_for(seed, "zero-cap"))
    spec = _spec_by_name(args.spec)
    rng = rng_for(seed, "sample", args.spec)
    if spec is None:
        selected = sampling.random_sample(pool, args.size, rng)
    else:
        selected = sampling.sample_by_spec(pool, spec, args.size, rng)
    _write_with_manifest(
        Path(args.out),
        selected,
        seed,
        [("sample", {"size": str(args.size), "spec": args.spec})],
    )
    print(f"sample: {len(selected)} records ({args.spec}) -> {args.out}")
    return 0


def _read_lexicon_arg(args: argparse.Namespace):
    return read_lexicon(args.lexicon) if getattr(args, "lexicon", None) else None


def _cmd_features(args: argparse.Namespace) -> int:
    dataset = read_dataset(args.infile)
    extractor = evaluation.FeatureExtractor.fit(dataset, _read_lexicon_arg(args))
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id\t" + "\t".join(evaluation.FEATURE_NAMES) + "\tscore\n")
        for seg in dataset:
            vec = extractor.features(seg)
            cells = [seg.id] + [repr(v) for v in vec.as_list()] + [str(seg.score)]
            fh.write("\t".join(cells) + "\n")
    print(f"features: wrote {len(dataset)} rows -> {args.out}")
    return 0


def _cmd_train_baseline(args: argparse.Namespace) -> int:
    train = read_dataset(args.train)
    model = evaluation.BaselineModel.train(
        train, ridge_lambda=args.ridge_lambda, lexicon=_read_lexicon_arg(args)
    )
    model.save(args.out)
    print(f"train-baseline: fitted on {len(train)} records -> {args.out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    model = evaluation.BaselineModel.load(args.model, _read_lexicon_arg(args))
    test = read_dataset(args.test)
    predictions = model.predict(test)
    scores = [float(seg.score) for seg in test]
    corr = evaluation.pearson(predictions, scores)
    mean_pred = sum(predictions) / len(predictions)
    print(f"evaluate: pearson {corr:.4f}, mean prediction {mean_pred:.4f} on {len(test)} records")
    return 0


def _run_experiment(
    pool: list[ScoredSegment],
    spec_names: list[str],
    train_size: int,
    test_size: int,
    seed: int,
    lexicon,
    out_prefix: Path,
) -> list[evaluation.ExperimentResult]:
    specs = [(name, _spec_by_name(name)) for name in spec_names]
    results = evaluation.run_distribution_experiment(
        pool, specs, train_size, test_size, seed, lexicon=lexicon
    )
    report = evaluation.render_report(results)
    Path(str(out_prefix) + ".txt").write_text(report, encoding="utf-8")
    Path(str(out_prefix) + ".json").write_text(
        evaluation.report_to_json(results), encoding="utf-8"
    )
    sys.stdout.write(report)
    return results


def _cmd_experiment(args: argparse.Namespace, seed: int) -> int:
    pool = read_dataset(args.pool)
    _run_experiment(
        pool,
        args.specs.split(","),
        args.train_size,
        args.test_size,
        seed,
        _read_lexicon_arg(args),
        Path(args.out),
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    dataset = read_dataset(args.dataset)
    store = annotate.AnnotationStore(
        dataset, args.log, primary_annotator=args.primary_annotator
    )
    server = annotate.create_server(
        store, host=args.host, port=args.port, assets_dir=args.assets, quiet=False
    )
    host, port = server.server_address[:2]
    print(f"annotation service on http://{host}:{port}/ (dataset: {args.dataset})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        store.close()
    return 0


def _cmd_manifest(args: argparse.Namespace) -> int:
    dataset = read_dataset(args.infile)
    manifest = build_manifest(dataset)
    out = args.out or manifest_path(args.infile)
    write_manifest(out, manifest)
    print(f"manifest: {manifest.total} records -> {out}")
    return 0


def _cmd_pipeline(args: argparse.Namespace, seed: int) -> int:
    """Fixture-driven end-to-end run: all stages, one seed, one manifest.

    The first failing stage aborts the run with its name on stderr, and
    files written so far are removed so no partial dataset survives.
    """
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    work = out_dir / "work"
    work.mkdir(exist_ok=True)
    threshold = _validate_threshold(args.threshold)
    cap = _validate_cap(args.zero_cap)
    if args.batch < 1:
        raise ConfigError(f"batch size {args.batch} must be >= 1")
    cfg = BleuConfig()
    stage_log: list[tuple[str, dict[str, str]]] = []
    stage = "fixture"
    try:
        inputs = fixtures.generate_fixture(
            work, seed, sentences=args.fixture, professional=args.fixture
        )
        stage_log.append(("fixture", {"sentences": str(args.fixture)}))

        stage = "ingest"
        prof_records = ingest.ingest_professional_corpus(
            ingest.read_parallel_pairs(inputs.professional)
        )
        stage_log.append(("ingest", {"pairs": str(len(prof_records))}))

        stage = "translate-mock"
        candidates_path = work / "candidates.jsonl"
        n_sets = _stage_translate(
            ingest.read_sentences(inputs.sources), seed, candidates_path
        )
        stage_log.append(
            ("translate-mock", {"dedup": "none", "engines": "3", "sets": str(n_sets)})
        )

        stage = "filter"
        filtered_path = work / "filtered.tsv"
        report = _stage_filter(candidates_path, threshold, cfg, filtered_path)
        stage_log.append(
            (
                "filter",
                {
                    "threshold": repr(threshold),
                    "kept": str(report.selected),
                    "excluded": str(report.excluded),
                },
            )
        )

        stage = "annotate"
        ranked = annotate.apply_scores(
            read_dataset(filtered_path), annotate.read_scores_file(inputs.scores)
        )
        stage_log.append(("annotate", {"mode": "scores-file", "ranked": str(len(ranked))}))

        stage = "augment-morph"
        base = prof_records + ranked
        lexicon = read_lexicon(inputs.lexicon)
        plan = {1: args.fixture, 2: args.fixture}
        expanded = augment_corpus(base, lexicon, plan, seed)
        stage_log.append(
            (
                "augment-morph",
                {"plan": f"1:{plan[1]},2:{plan[2]}", "records": str(len(expanded))},
            )
        )

        stage = "augment-order"
        with_order = list(expanded)
        for seg in expanded:
            if seg.score is None or seg.score < 4 or len(seg.target.split()) < 2:
                continue
            batch = perturb.perturb_batch(seg, args.batch, rng_for(seed, "order", seg.id))
            with_order.extend(batch.variants)
        stage_log.append(
            ("augment-order", {"batch": str(args.batch), "records": str(len(with_order))})
        )

        stage = "augment-negatives"
        negatives = perturb.generate_mismatches(
            with_order, len(with_order), rng_for(seed, "negatives")
        )
        doubled = with_order + negatives
        stage_log.append(("augment-negatives", {"count": str(len(negatives))}))

        stage = "enforce-zero-cap"
        capped = sampling.enforce_zero_cap(doubled, cap, rng_for(seed, "zero-cap"))
        stage_log.append(("enforce-zero-cap", {"cap": repr(cap), "records": str(len(capped))}))

        pool_path = out_dir / "pool.tsv"
        _write_with_manifest(pool_path, capped, seed, list(stage_log))

        stage = "sample"
        if args.sample_size is not None:
            sample_size = args.sample_size
        else:
            sample_size = int(FULL_SCALE_SIZES["normal_sample"] * args.scale)
        sample_size = min(sample_size, len(capped))
        sampled = sampling.sample_by_spec(
            capped, sampling.normal_spec(), sample_size, rng_for(seed, "sample", "normal")
        )
        stage_log.append(("sample", {"size": str(sample_size), "spec": "normal"}))

        dataset_path = out_dir / "dataset.tsv"
        _write_with_manifest(dataset_path, sampled, seed, list(stage_log))

        stage = "experiment"
        results = _run_experiment(
            capped,
            args.specs.split(","),
            args.train_size,
            args.test_size,
            seed,
            lexicon,
            out_dir / "report",
        )
    except QeforgeError as exc:
        _remove_pipeline_outputs(out_dir)
        raise PipelineStageError(stage, exc) from exc
    print(
        f"pipeline: pool {len(capped)}, dataset {len(sampled)}, "
        f"{len(results)} experiment specs -> {out_dir}"
    )
    return 0


def _remove_pipeline_outputs(out_dir: Path) -> None:
    for name in (
        "pool.tsv",
        "pool.tsv.manifest",
        "dataset.tsv",
        "dataset.tsv.manifest",
        "report.txt",
        "report.json",
    ):
        (out_dir / name).unlink(missing_ok=True)
    work = out_dir / "work"
    if work.is_dir():
        for child in work.iterdir():
            child.unlink(missing_ok=True)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qeforge",
        description="Semi-synthetic parallel data toolkit for sentence-level MT quality estimation.",
    )
    parser.add_argument("--version", action="version", version=f"qeforge {__version__}")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, help=f"global seed (fallback: ${SEED_ENV_VAR}, then {DEFAULT_SEED})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a professional parallel corpus (auto-score 5)")
    p.add_argument("--pairs", required=True, help="2-column TSV: source, target")
    p.add_argument("--id-prefix", default="prof")
    p.add_argument("--out", required=True)

    p = sub.add_parser("prompt", help="build sentence-generation prompts from usage examples")
    p.add_argument("--examples", help="3-column TSV: headword, pos, example")
    p.add_argument("--headword")
    p.add_argument("--pos")
    p.add_argument("--example")
    p.add_argument("--min-words", type=int, default=20)

    p = sub.add_parser("translate-mock", help="run the deterministic 3-engine mock translator")
    p.add_argument("--sources", required=True, help="one sentence per line")
    p.add_argument("--id-prefix", default="gen")
    p.add_argument("--out", required=True, help="candidate-set JSONL output")

    p = sub.add_parser("filter", help="consensus-filter candidate sets by pairwise BLEU")
    p.add_argument("--candidates", required=True)
    p.add_argument("--threshold", type=float, default=consensus.DEFAULT_THRESHOLD)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bleu", help="sentence BLEU of --hyp against --ref")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--max-order", type=int, default=4)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument(
        "--tokenizer",
        choices=[t.value for t in Tokenizer],
        default=Tokenizer.WHITESPACE_PLUS_PUNCT_SPLIT.value,
    )

    p = sub.add_parser("augment-morph", help="inject gender/number agreement errors")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--plan", required=True, help="e.g. 1:100,2:50")
    p.add_argument("--out", required=True)

    p = sub.add_parser("augment-order", help="word-order perturbation batches")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--batch", type=int, default=perturb.DEFAULT_BATCH_SIZE)
    p.add_argument("--min-score", type=int, default=4, help="perturb only records scoring >= this")
    p.add_argument("--out", required=True)

    p = sub.add_parser("augment-negatives", help="mismatched-pair negatives scored 0")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--count", type=int, help="default: one per input record")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sample", help="assemble a dataset under a distribution spec")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--spec", choices=["uniform", "normal", "random"], required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--zero-cap", type=float, help="cap the score-0 fraction first")
    p.add_argument("--out", required=True)

    p = sub.add_parser("features", help="write the baseline feature table")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--out", required=True)

    p = sub.add_parser("train-baseline", help="fit the ridge baseline regressor")
    p.add_argument("--train", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--ridge-lambda", type=float, default=1.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="score a fitted baseline on a test dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--lexicon")

    p = sub.add_parser("experiment", help="distribution-effect experiment over sampling specs")
    p.add_argument("--pool", required=True)
    p.add_argument("--specs", default="uniform,normal,random")
    p.add_argument("--train-size", type=int, default=1200)
    p.add_argument("--test-size", type=int, default=300)
    p.add_argument("--lexicon")
    p.add_argument("--out", default="report", help="prefix for .txt and .json reports")

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--dataset", required=True)
    p.add_argument("--log", default="annotations.log")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--assets", help="directory with the annotation UI build")
    p.add_argument("--primary-annotator")

    p = sub.add_parser("pipeline", help="one-command fixture pipeline, end to end")
    p.add_argument("--fixture", type=int, default=300, help="fixture corpus size")
    p.add_argument("--threshold", type=float, default=consensus.DEFAULT_THRESHOLD)
    p.add_argument("--batch", type=int, default=perturb.DEFAULT_BATCH_SIZE)
    p.add_argument("--zero-cap", type=float, default=sampling.DEFAULT_ZERO_CAP)
    p.add_argument("--scale", type=float, default=DEFAULT_SCALE, help="fraction of full-study sizes")
    p.add_argument("--sample-size", type=int, help="default: 500000 * scale")
    p.add_argument("--specs", default="uniform,normal,random")
    p.add_argument("--train-size", type=int, default=1200)
    p.add_argument("--test-size", type=int, default=300)
    p.add_argument("--out", required=True)

    p = sub.add_parser("manifest", help="recompute a dataset's manifest")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")

    p = sub.add_parser("backend", help="print the active BLEU backend")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        seed = _resolve_seed(args, config)
        command = args.command
        if command == "ingest":
            return _cmd_ingest(args)
        if command == "prompt":
            return _cmd_prompt(args)
        if command == "translate-mock":
            return _cmd_translate_mock(args, seed)
        if command == "filter":
            return _cmd_filter(args)
        if command == "bleu":
            return _cmd_bleu(args)
        if command == "augment-morph":
            return _cmd_augment_morph(args, seed)
        if command == "augment-order":
            return _cmd_augment_order(args, seed)
        if command == "augment-negatives":
            return _cmd_augment_negatives(args, seed)
        if command == "sample":
            return _cmd_sample(args, seed)
        if command == "features":
            return _cmd_features(args)
        if command == "train-baseline":
            return _cmd_train_baseline(args)
        if command == "evaluate":
            return _cmd_evaluate(args)
        if command == "experiment":
            return _cmd_experiment(args, seed)
        if command == "serve":
            return _cmd_serve(args)
        if command == "pipeline":
            return _cmd_pipeline(args, seed)
        if command == "manifest":
            return _cmd_manifest(args)
        if command == "backend":
            print(active_backend())
            return 0
        parser.error(f"unknown command {command!r}")
    except QeforgeError as exc:
        print(f"qeforge {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
