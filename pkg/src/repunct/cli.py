"""Command-line entry point for the full pipeline.

Subcommands: preprocess, stats, split, plan, train, predict, eval and
human gen|score|report. A flat key=value config file can supply any flag's
value; explicit flags win. All randomness flows from the single --seed flag.
Exit status: 0 on success, 1 on usage/config errors, 2 on data errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import batcher, corpus, evaluation, humaneval, tagger, tokenizer

log = logging.getLogger(__name__)

ENV_OUT = "REPUNCT_OUT"


class UsageError(ValueError):
    pass


def load_config(path: str | Path) -> dict[str, str]:
    """Parse a flat key=value config file ('#' starts a comment line)."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def _resolve(args: argparse.Namespace, key: str, default=None, required: bool = False, cast=str):
    """Flag value, else config value, else environment/default."""
    value = getattr(args, key, None)
    if value is None:
        raw = args.config_values.get(key)
        if raw is not None:
            value = cast(raw)
    if value is None and key == "out":
        env = os.environ.get(ENV_OUT)
        if env:
            value = env
    if value is None:
        value = default
    if value is None and required:
        raise UsageError(f"missing required option --{key.replace('_', '-')} (or config key '{key}')")
    return value


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(_resolve(args, "out", required=True))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args: argparse.Namespace) -> int:
    return _resolve(args, "seed", default=0, cast=int)


# ---------------------------------------------------------------- subcommands


def cmd_preprocess(args: argparse.Namespace) -> int:
    corpus_dir = _resolve(args, "corpus", required=True)
    out = _out_dir(args)
    clean_dir = out / "clean"
    labels_dir = out / "labels"
    clean_dir.mkdir(exist_ok=True)
    labels_dir.mkdir(exist_ok=True)
    n_sentences = n_words = 0
    for raw in corpus.load_corpus_dir(corpus_dir):
        clean = corpus.normalize(raw)
        (clean_dir / f"{clean.id}.txt").write_text(clean.text, encoding="utf-8", newline="\n")
        doc = corpus.extract_labels(clean)
        corpus.write_labeled_tsv(doc, labels_dir / f"{doc.id}.tsv")
        n_sentences += len(doc.sentences)
        n_words += doc.n_words()
    print(f"preprocessed into {labels_dir}: {n_sentences} sentences, {n_words} words")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    ds = corpus.load_labeled_dir(_resolve(args, "labels", required=True))
    out = _out_dir(args)
    counts = corpus.dataset_stats(ds)
    table = counts.format_table(n_documents=len(ds.documents))
    (out / "stats.txt").write_text(table + "\n", encoding="utf-8", newline="\n")
    (out / "stats.json").write_text(
        json.dumps(counts.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )
    print(table)
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    ds = corpus.load_labeled_dir(_resolve(args, "labels", required=True))
    out = _out_dir(args)
    cfg = corpus.SplitConfig(
        train_fraction=_resolve(args, "train_fraction", default=0.8, cast=float), seed=_seed(args)
    )
    train, test = corpus.split_dataset(ds, cfg)
    manifest = []
    for name, part in (("train", train), ("test", test)):
        part_dir = out / name
        part_dir.mkdir(exist_ok=True)
        for doc in part.documents:
            corpus.write_labeled_tsv(doc, part_dir / f"{doc.id}.tsv")
            manifest.append(f"{doc.id}\t{name}")
    (out / "split.tsv").write_text("\n".join(sorted(manifest)) + "\n", encoding="utf-8", newline="\n")
    print(f"split {len(ds.documents)} documents: {len(train.documents)} train / {len(test.documents)} test")
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    ds = corpus.load_labeled_dir(_resolve(args, "labels", required=True))
    out = _out_dir(args)
    plan = batcher.plan_dataset(ds, _seed(args))
    plan.save(out / "plan.tsv")
    print(f"planned {len(plan.groups)} compound sentences over {len(ds.documents)} documents")
    return 0


def _load_plan(args: argparse.Namespace, ds: corpus.Dataset) -> batcher.BatchPlan:
    return batcher.BatchPlan.load(_resolve(args, "plan", required=True), ds)


def _encode_plan(
    plan: batcher.BatchPlan, vocab: tokenizer.Vocab, max_len: int
) -> tuple[batcher.BatchPlan, list[tokenizer.EncodedSequence], list[batcher.CompoundSentence]]:
    """Encode every group; oversized ones are dropped from the feed."""
    kept: list[batcher.CompoundSentence] = []
    seqs: list[tokenizer.EncodedSequence] = []
    dropped: list[batcher.CompoundSentence] = []
    for group in plan.groups:
        seq = tokenizer.encode_compound(group.words(), vocab, max_len)
        if seq is None:
            dropped.append(group)
        else:
            seqs.append(seq)
            kept.append(dataclasses.replace(group, index=len(kept)))
    return batcher.BatchPlan(seed=plan.seed, groups=kept), seqs, dropped


def cmd_train(args: argparse.Namespace) -> int:
    ds = corpus.load_labeled_dir(_resolve(args, "labels", required=True))
    vocab = tokenizer.Vocab.from_file(_resolve(args, "vocab", required=True))
    out = _out_dir(args)
    plan = _load_plan(args, ds)
    max_len = _resolve(args, "max_len", default=tokenizer.DEFAULT_MAX_LEN, cast=int)
    _, seqs, dropped = _encode_plan(plan, vocab, max_len)
    if dropped:
        log.warning("dropped %d oversized compound sentences from the feed", len(dropped))
    seed = _seed(args)
    model = tagger.ContextWindowModel.create(
        radius=_resolve(args, "radius", default=2, cast=int),
        dim=_resolve(args, "dim", default=1 << 14, cast=int),
        seed=seed,
    )
    cfg = tagger.TrainingConfig(
        learning_rate=_resolve(args, "learning_rate", default=0.5, cast=float),
        epochs=_resolve(args, "epochs", default=4, cast=int),
        batch_size=_resolve(args, "batch_size", default=4, cast=int),
        momentum=_resolve(args, "momentum", default=0.0, cast=float),
        seed=seed,
    )
    trained, losses = tagger.train(model, seqs, cfg)
    trained.save(out / "model.json")
    (out / "loss_curve.json").write_text(
        json.dumps({"epoch_mean_loss": losses}, indent=2) + "\n", encoding="utf-8", newline="\n"
    )
    for epoch, loss in enumerate(losses, start=1):
        print(f"epoch {epoch}: mean loss {loss:.6f}")
    print(f"saved model to {out / 'model.json'}")
    return 0


def _make_backend(spec: str) -> tagger.TaggerBackend:
    kind, _, path = spec.partition(":")
    if kind == "trainable" and path:
        return tagger.ContextWindowModel.load(path)
    if kind == "replay" and path:
        return tagger.replay_logits(path)
    raise UsageError(f"backend must be trainable:<model file> or replay:<logit file>, got {spec!r}")


def cmd_predict(args: argparse.Namespace) -> int:
    ds = corpus.load_labeled_dir(_resolve(args, "labels", required=True))
    vocab = tokenizer.Vocab.from_file(_resolve(args, "vocab", required=True))
    out = _out_dir(args)
    plan = _load_plan(args, ds)
    max_len = _resolve(args, "max_len", default=tokenizer.DEFAULT_MAX_LEN, cast=int)
    backend = _make_backend(_resolve(args, "backend", required=True))
    kept_plan, seqs, dropped = _encode_plan(plan, vocab, max_len)

    # One logits pass per sequence serves prediction and the dump, so a
    # single-pass replay stream works too.
    logits = [np.asarray(backend.logits(seq), dtype=np.float64) for seq in seqs]
    predictions = [tagger.predict_from_logits(arr, seq) for arr, seq in zip(logits, seqs)]
    trivial = {pos for _, pos in batcher.mark_trivial_finals(kept_plan)}

    rows = ["word\tgold\tpred\tbatch_final"]
    offset = 0
    per_doc: dict[str, list[str]] = {}
    for group, preds in zip(kept_plan.groups, predictions):
        words = group.words()
        for i, (w, p) in enumerate(zip(words, preds)):
            flag = 1 if offset + i in trivial else 0
            rows.append(f"{w.word}\t{w.label.name}\t{p.name}\t{flag}")
        offset += len(words)
        per_doc.setdefault(group.doc_id, []).append(
            tokenizer.apply_tags([w.word for w in words], preds)
        )
    (out / "predictions.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")

    predicted_dir = out / "predicted"
    predicted_dir.mkdir(exist_ok=True)
    for doc_id, chunks in sorted(per_doc.items()):
        (predicted_dir / f"{doc_id}.txt").write_text(" ".join(chunks) + "\n", encoding="utf-8", newline="\n")

    tagger.write_logit_dump(zip(seqs, logits), out / "logits.jsonl")
    if dropped:
        dropped_rows = [f"{g.doc_id}\t{g.start}\t{len(g.sentences)}" for g in dropped]
        (out / "dropped.tsv").write_text("\n".join(dropped_rows) + "\n", encoding="utf-8", newline="\n")
    print(f"predicted {offset} words in {len(seqs)} compound sentences ({len(dropped)} dropped)")
    return 0


def _read_predictions(path: str | Path) -> tuple[list[corpus.PunctClass], list[corpus.PunctClass], set[int]]:
    gold: list[corpus.PunctClass] = []
    pred: list[corpus.PunctClass] = []
    trivial: set[int] = set()
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        if not line.strip():
            continue
        _, gold_name, pred_name, flag = line.split("\t")
        if int(flag):
            trivial.add(len(gold))
        gold.append(corpus.PunctClass.from_name(gold_name))
        pred.append(corpus.PunctClass.from_name(pred_name))
    return gold, pred, trivial


def _read_counts_file(path: str | Path) -> evaluation.ConfusionMatrix4:
    text = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError:
        return evaluation.ConfusionMatrix4.parse_grid(text)
    counts = payload["counts"] if isinstance(payload, dict) else payload
    return evaluation.ConfusionMatrix4([[int(c) for c in row] for row in counts])


def cmd_eval(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    name = _resolve(args, "name", default="this run")
    pred_path = _resolve(args, "pred")
    counts_path = _resolve(args, "counts")
    if (pred_path is None) == (counts_path is None):
        raise UsageError("eval needs exactly one of --pred or --counts")
    if counts_path is not None:
        report = evaluation.metrics(_read_counts_file(counts_path))
    else:
        gold, pred, trivial = _read_predictions(pred_path)
        report = evaluation.metrics(evaluation.confusion(gold, pred))
        if args.debias:
            debiased_matrix = evaluation.debias_batch_final(gold, pred, trivial)
            report.debiased = evaluation.metrics(debiased_matrix)
            evaluation.write_report(report.debiased, out, f"{name} (debiased)", stem="report_debiased")
    evaluation.write_report(report, out, name)
    print((out / "report.txt").read_text(encoding="utf-8"))
    return 0


def cmd_human_gen(args: argparse.Namespace) -> int:
    ds = corpus.load_labeled_dir(_resolve(args, "labels", required=True))
    out = _out_dir(args)
    tests_dir = out / "tests"
    tests_dir.mkdir(exist_ok=True)
    words_per_test = _resolve(args, "words_per_test", default=humaneval.WORDS_PER_TEST, cast=int)
    tests = humaneval.generate_tests(ds, words_per_test)
    for test in tests:
        humaneval.write_test_files(test, tests_dir)
    (tests_dir / "instructions.txt").write_text(humaneval.INSTRUCTIONS, encoding="utf-8", newline="\n")
    manifest = [{"id": t.id, "n_words": len(t.words)} for t in tests]
    (out / "tests.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )
    full = sum(1 for t in tests if len(t.words) == words_per_test)
    print(f"generated {len(tests)} tests ({full} full, {len(tests) - full} short) in {tests_dir}")
    return 0


def cmd_human_score(args: argparse.Namespace) -> int:
    test = humaneval.read_test_meta(_resolve(args, "test", required=True))
    annotated_path = Path(_resolve(args, "annotated", required=True))
    out = _out_dir(args)
    ret = humaneval.AnnotatedReturn(test_id=test.id, text=annotated_path.read_text(encoding="utf-8"))
    participant = humaneval.score_annotation(test, ret)
    payload = {
        "test_id": participant.test_id,
        "gold_counts": participant.gold_counts.to_json_dict(),
        "eval": evaluation.report_to_json_dict(participant.report),
    }
    (out / f"{test.id}.report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )
    table = evaluation.format_report_table(participant.report, participant.test_id)
    (out / f"{test.id}.report.txt").write_text(table, encoding="utf-8", newline="\n")
    print(table)
    return 0


def cmd_human_report(args: argparse.Namespace) -> int:
    reports_dir = Path(_resolve(args, "reports", required=True))
    out = _out_dir(args)
    participant_reports = []
    for file in sorted(reports_dir.glob("*.report.json")):
        payload = json.loads(file.read_text(encoding="utf-8"))
        matrix = evaluation.ConfusionMatrix4([[int(c) for c in row] for row in payload["eval"]["counts"]])
        participant_reports.append(
            humaneval.ParticipantReport(
                test_id=payload["test_id"],
                report=evaluation.metrics(matrix),
                gold_counts=corpus.ClassCounts(**payload["gold_counts"]),
            )
        )
    if not participant_reports:
        raise corpus.IngestError(f"no *.report.json files in {reports_dir}")
    stats = humaneval.cohort_stats(participant_reports)

    per_participant = ["test\t" + "\t".join(f"F1_{c.name}" for c in evaluation.CLASS_ORDER)]
    for r in sorted(participant_reports, key=lambda r: r.test_id):
        row = [r.test_id] + [f"{r.report.per_class[c].f1:.4f}" for c in evaluation.CLASS_ORDER]
        per_participant.append("\t".join(row))
    cohort_text = (
        "\n".join(per_participant)
        + "\n\n"
        + humaneval.format_cohort_table(stats)
        + "\npooled:\n"
        + evaluation.format_report_table(stats.pooled_report, "pooled cohort")
        + "\n"
        + stats.pooled_matrix.format_grid()
    )
    (out / "cohort.txt").write_text(cohort_text, encoding="utf-8", newline="\n")
    payload = {
        "n_participants": stats.n_participants,
        "mean_f1": {c.name: stats.mean_f1[c] for c in evaluation.CLASS_ORDER},
        "stddev_f1": {c.name: stats.stddev_f1[c] for c in evaluation.CLASS_ORDER},
        "pooled": evaluation.report_to_json_dict(stats.pooled_report),
    }
    (out / "cohort.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )
    print(cohort_text)
    return 0


# ------------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repunct",
        description="Punctuation restoration as token classification: corpus to report.",
    )
    parser.add_argument("--seed", type=int, default=None, help="seed for all randomness (default 0)")
    parser.add_argument("--config", default=None, help="flat key=value config file; flags override")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", default=None, help=f"output directory (or ${ENV_OUT})")

    p = sub.add_parser("preprocess", help="normalize raw documents and extract word/label TSVs")
    p.add_argument("--corpus", default=None, help="directory of UTF-8 .txt documents")
    common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("stats", help="per-class label counts for a labeled directory")
    p.add_argument("--labels", default=None)
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="deterministic document-level train/test split")
    p.add_argument("--labels", default=None)
    p.add_argument("--train-fraction", dest="train_fraction", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("plan", help="group sentences into seeded 3-7 sentence compounds")
    p.add_argument("--labels", default=None)
    common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("train", help="train the context-window tagger on a plan")
    p.add_argument("--labels", default=None)
    p.add_argument("--plan", default=None)
    p.add_argument("--vocab", default=None)
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--momentum", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="tag a planned dataset with a backend")
    p.add_argument("--labels", default=None)
    p.add_argument("--plan", default=None)
    p.add_argument("--vocab", default=None)
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.add_argument("--backend", default=None, help="trainable:<model file> or replay:<logit file>")
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score predictions or a raw confusion matrix")
    p.add_argument("--pred", default=None, help="predictions.tsv from the predict subcommand")
    p.add_argument("--counts", default=None, help="4x4 confusion matrix file (grid or JSON)")
    p.add_argument("--debias", action="store_true", help="also report with batch-final words excluded")
    p.add_argument("--name", default=None, help="row label for the report table")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("human", help="human-evaluation protocol")
    hsub = p.add_subparsers(dest="human_command", metavar="ACTION")

    hp = hsub.add_parser("gen", help="cut the test set into fixed-size participant tests")
    hp.add_argument("--labels", default=None)
    hp.add_argument("--words-per-test", dest="words_per_test", type=int, default=None)
    common(hp)
    hp.set_defaults(func=cmd_human_gen)

    hp = hsub.add_parser("score", help="score one annotated return against its test")
    hp.add_argument("--test", default=None, help="test metadata JSON")
    hp.add_argument("--annotated", default=None, help="participant's punctuated text file")
    common(hp)
    hp.set_defaults(func=cmd_human_score)

    hp = hsub.add_parser("report", help="aggregate participant reports into cohort statistics")
    hp.add_argument("--reports", default=None, help="directory of *.report.json files")
    common(hp)
    hp.set_defaults(func=cmd_human_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage problems; fold the
        # latter into this tool's usage status.
        return 0 if exc.code == 0 else 1
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args.config_values = load_config(args.config) if args.config else {}
        return args.func(args)
    except (UsageError, corpus.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        corpus.IngestError,
        tagger.AlignmentError,
        tagger.BackendProtocolError,
        tagger.TrainingDivergedError,
        humaneval.AnnotationAlignmentError,
        evaluation.UndefinedMetricsError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
