"""Command line interface.

Subcommands: ingest, stats, candidates, sequences, train, predict,
evaluate, run. Relative output paths resolve under $PROTOREL_OUTPUT_ROOT
(default: current directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .baseline import BaselineModel, TrainConfig, train
from .candidates import PairPolicy, candidate_stats, enumerate_pairs
from .corpus import read_corpus, write_corpus
from .evaluation import (
    PredictionRecord,
    gold_from_documents,
    read_predictions,
    render_report,
    score,
    write_predictions,
)
from .pipeline import (
    PipelineConfig,
    StageError,
    ingest_directory,
    render_sweep,
    run_pipeline,
    stats_command,
    stats_sweep,
)
from .sequences import SequenceConfig, build_sequence, read_examples, write_examples

POLICY_NAMES = {"all": "all_pairs", "step": "same_step", "dist": "token_distance"}


def _out_path(value: str) -> Path:
    root = os.environ.get("PROTOREL_OUTPUT_ROOT", ".")
    path = Path(value)
    return path if path.is_absolute() else Path(root) / path


def _load_docs(path: str):
    """Corpus argument: either a .jsonl file or a directory of .txt/.ann."""
    p = Path(path)
    if p.is_dir():
        return ingest_directory(p)
    return read_corpus(p)


def _policy_from_args(args) -> PairPolicy:
    return PairPolicy(mode=POLICY_NAMES[args.policy], max_token_distance=args.max_dist)


def cmd_ingest(args) -> int:
    docs = ingest_directory(args.corpus)
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_corpus(docs, out)
    print(f"wrote {len(docs)} documents to {out}")
    return 0


def cmd_stats(args) -> int:
    payload = stats_command(args.corpus, range(args.min_dist, args.max_dist + 1))
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(f"documents: {payload['documents']}")
        print(f"gold relations: {payload['gold_relations']}")
        ap = payload["all_pairs"]
        print(
            f"all pairs: {ap['total_pairs']}"
            f"  positive rate {ap['positive_rate']:.4%} (micro)"
            f" / {ap['positive_rate_macro']:.4%} (macro)"
        )
        docs = _load_docs(args.corpus)
        print(render_sweep(stats_sweep(docs, range(args.min_dist, args.max_dist + 1))))
    return 0


def cmd_candidates(args) -> int:
    docs = _load_docs(args.corpus)
    policy = _policy_from_args(args)
    pairs = [pair for doc in docs for pair in enumerate_pairs(doc, policy)]
    if args.out:
        out = _out_path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as fh:
            for p in pairs:
                fh.write(
                    json.dumps(
                        {
                            "doc_id": p.doc_id,
                            "head": p.head,
                            "tail": p.tail,
                            "token_gap": p.token_gap,
                            "gold_label": p.gold_label,
                        }
                    )
                    + "\n"
                )
        print(f"wrote {len(pairs)} pairs to {out}")
    if args.stats or not args.out:
        reference = PairPolicy(mode=POLICY_NAMES[args.reference])
        stats = candidate_stats(docs, policy, reference)
        payload = {
            "total_pairs": stats.total_pairs,
            "gold_relations_total": stats.gold_relations_total,
            "gold_relations_retained": stats.gold_relations_retained,
            "retention": stats.retention,
            "positive_rate": stats.positive_rate,
            "positive_rate_macro": stats.positive_rate_macro,
            "reduction_vs_reference": stats.reduction_vs_reference,
            "reference_pairs": stats.reference_pairs,
        }
        print(json.dumps(payload, indent=2))
        width = max(len(k) for k in payload)
        for key, value in payload.items():
            shown = f"{value:.4f}" if isinstance(value, float) else str(value)
            print(f"{key:<{width}}  {shown}")
    return 0


def cmd_sequences(args) -> int:
    docs = _load_docs(args.corpus)
    by_id = {d.doc_id: d for d in docs}
    policy = _policy_from_args(args)
    config = SequenceConfig(context_window_n=args.context_n, max_tokens=args.max_tokens)
    examples = []
    for doc in docs:
        for pair in enumerate_pairs(doc, policy):
            examples.append(build_sequence(by_id[pair.doc_id], pair, config))
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_examples(examples, out)
    print(f"wrote {len(examples)} sequences to {out}")
    return 0


def cmd_train(args) -> int:
    examples = read_examples(args.sequences)
    config = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        seed=args.seed if args.seed is not None else 13,
        negative_ratio=args.neg_ratio,
    )
    model = train(examples, config)
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    model.save(out)
    losses = ", ".join(f"{l:.4f}" for l in model.train_losses)
    print(f"trained on {len(examples)} examples; epoch losses: {losses}")
    print(f"saved model to {out}")
    return 0


def cmd_predict(args) -> int:
    model = BaselineModel.load(args.model)
    examples = read_examples(args.sequences)
    records = [
        PredictionRecord(ex.doc_id, ex.head, ex.tail, label, scores)
        for ex, (label, scores) in zip(examples, model.predict_batch(examples))
    ]
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_predictions(records, out)
    print(f"wrote {len(records)} predictions to {out}")
    return 0


def cmd_evaluate(args) -> int:
    gold = gold_from_documents(read_corpus(args.gold))
    predictions = read_predictions(args.pred)
    undirected = frozenset(args.undirected_classes or ())
    report = score(predictions, gold, undirected_classes=undirected)
    print(render_report(report, args.format))
    return 0


def cmd_run(args) -> int:
    config = PipelineConfig.from_yaml(args.config) if args.config else PipelineConfig()
    if args.corpus:
        config.corpus_dir = args.corpus
    if args.seed is not None:
        config.seed = args.seed
    manifest = run_pipeline(config, _out_path(args.out))
    print(json.dumps(manifest.to_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protorel",
        description="Relation/event extraction pipeline for wet lab protocols",
    )
    parser.add_argument("--seed", type=int, default=None, help="global RNG seed override")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a standoff corpus directory to JSON lines")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default="corpus.jsonl")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("stats", help="candidate policy statistics and threshold sweep")
    p.add_argument("--corpus", required=True)
    p.add_argument("--min-dist", type=int, default=1)
    p.add_argument("--max-dist", type=int, default=30)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("candidates", help="enumerate candidate pairs under a policy")
    p.add_argument("--corpus", required=True, help="corpus.jsonl or corpus directory")
    p.add_argument("--policy", choices=tuple(POLICY_NAMES), default="dist")
    p.add_argument("--max-dist", type=int, default=14)
    p.add_argument("--stats", action="store_true", help="also print policy statistics")
    p.add_argument("--reference", choices=("all", "step"), default="step")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_candidates)

    p = sub.add_parser("sequences", help="build classification sequences for candidates")
    p.add_argument("--corpus", required=True)
    p.add_argument("--policy", choices=tuple(POLICY_NAMES), default="dist")
    p.add_argument("--max-dist", type=int, default=14)
    p.add_argument("--context-n", type=int, default=1)
    p.add_argument("--max-tokens", type=int, default=100)
    p.add_argument("--out", default="sequences.jsonl")
    p.set_defaults(fn=cmd_sequences)

    p = sub.add_parser("train", help="train the native baseline classifier")
    p.add_argument("--sequences", required=True)
    p.add_argument("--out", default="model.json")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--neg-ratio", type=float, default=5.0)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("predict", help="predict with a trained baseline model")
    p.add_argument("--model", required=True)
    p.add_argument("--sequences", required=True)
    p.add_argument("--out", default="predictions.jsonl")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("evaluate", help="score a predictions file against gold")
    p.add_argument("--gold", required=True, help="corpus.jsonl with gold relations")
    p.add_argument("--pred", required=True)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument(
        "--undirected-classes",
        nargs="*",
        help="relation classes scored without direction",
    )
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", help="YAML config with per-stage sections")
    p.add_argument("--corpus", help="override corpus directory")
    p.add_argument("--out", default="run")
    p.set_defaults(fn=cmd_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
