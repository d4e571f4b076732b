"""Pipeline orchestration: ingest -> candidates -> sequences -> train ->
predict -> evaluate, with a reproducibility manifest.

Configuration is one declarative YAML file with per-stage sections; CLI
flags override individual values. Splits follow a WLPC-style directory
layout (train/dev/test subdirectories) when present, otherwise a seeded
80/10/10 document split.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import kernels
from .baseline import TrainConfig, train
from .candidates import CandidateStats, PairPolicy, candidate_stats, enumerate_pairs
from .corpus import Document, parse_standoff, write_corpus
from .evaluation import (
    PredictionRecord,
    gold_from_documents,
    render_report,
    score,
    write_predictions,
)
from .sequences import SequenceConfig, build_sequence, write_examples

SPLIT_DIR_NAMES = {
    "train": ("train", "train_data", "training"),
    "dev": ("dev", "dev_data", "development"),
    "test": ("test", "test_data"),
}


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    corpus_dir: str = "corpus"
    seed: int = 13
    policy: PairPolicy = field(default_factory=PairPolicy)
    reference_policy: PairPolicy = field(default_factory=lambda: PairPolicy(mode="same_step"))
    sequence: SequenceConfig = field(default_factory=SequenceConfig)
    classifier: TrainConfig = field(default_factory=TrainConfig)

    @classmethod
    def from_yaml(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        cfg = cls()
        corpus = raw.get("corpus", {})
        cfg.corpus_dir = corpus.get("dir", cfg.corpus_dir)
        cfg.seed = raw.get("seed", cfg.seed)
        cand = raw.get("candidates", {})
        cfg.policy = PairPolicy(
            mode=cand.get("policy", cfg.policy.mode),
            max_token_distance=cand.get("max_token_distance", cfg.policy.max_token_distance),
        )
        cfg.reference_policy = PairPolicy(mode=cand.get("reference", "same_step"))
        seq = raw.get("sequences", {})
        cfg.sequence = SequenceConfig(
            context_window_n=seq.get("context_window_n", 1),
            max_tokens=seq.get("max_tokens", 100),
        )
        clf = raw.get("classifier", {})
        cfg.classifier = TrainConfig(
            epochs=clf.get("epochs", 10),
            learning_rate=clf.get("learning_rate", 0.1),
            seed=clf.get("seed", raw.get("seed", 13)),
            negative_ratio=clf.get("negative_ratio", 5.0),
        )
        return cfg

    def to_dict(self) -> dict:
        return {
            "corpus": {"dir": self.corpus_dir},
            "seed": self.seed,
            "candidates": {
                "policy": self.policy.mode,
                "max_token_distance": self.policy.max_token_distance,
                "reference": self.reference_policy.mode,
            },
            "sequences": {
                "context_window_n": self.sequence.context_window_n,
                "max_tokens": self.sequence.max_tokens,
            },
            "classifier": {
                "epochs": self.classifier.epochs,
                "learning_rate": self.classifier.learning_rate,
                "seed": self.classifier.seed,
                "negative_ratio": self.classifier.negative_ratio,
            },
        }


def ingest_directory(corpus_dir) -> list[Document]:
    """Parse every ``<name>.txt`` / ``<name>.ann`` pair under a directory."""
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {corpus_dir}")
    docs = []
    for txt in sorted(corpus_dir.glob("*.txt")):
        ann = txt.with_suffix(".ann")
        if not ann.exists():
            raise FileNotFoundError(f"missing annotation file for {txt.name}")
        docs.append(
            parse_standoff(
                txt.read_text(encoding="utf-8"), ann.read_text(encoding="utf-8"), txt.stem
            )
        )
    return docs


def detect_split_layout(corpus_dir) -> dict[str, Path] | None:
    """WLPC-style split subdirectories, if the corpus ships pre-split."""
    corpus_dir = Path(corpus_dir)
    found = {}
    for split, names in SPLIT_DIR_NAMES.items():
        for name in names:
            if (corpus_dir / name).is_dir():
                found[split] = corpus_dir / name
                break
    return found if set(found) == {"train", "dev", "test"} else None


def split_documents(doc_ids: list[str], seed: int) -> dict[str, list[str]]:
    """Seeded 80/10/10 split; every split is non-empty for >= 3 documents."""
    ids = sorted(doc_ids)
    random.Random(seed).shuffle(ids)
    n = len(ids)
    n_dev = max(1, round(0.1 * n)) if n >= 3 else 0
    n_test = max(1, round(0.1 * n)) if n >= 2 else 0
    n_train = n - n_dev - n_test
    return {
        "train": sorted(ids[:n_train]),
        "dev": sorted(ids[n_train : n_train + n_dev]),
        "test": sorted(ids[n_train + n_dev :]),
    }


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def corpus_input_digest(corpus_dir) -> str:
    """Digest over the sorted (name, sha256) list of all .txt/.ann files."""
    corpus_dir = Path(corpus_dir)
    entries = []
    for path in sorted(corpus_dir.rglob("*")):
        if path.suffix in (".txt", ".ann") and path.is_file():
            entries.append((str(path.relative_to(corpus_dir)), sha256_file(path)))
    digest = hashlib.sha256(json.dumps(entries).encode("utf-8"))
    return digest.hexdigest()


@dataclass
class RunManifest:
    created_utc: str
    seed: int
    backend: str
    config: dict
    corpus_input: str
    splits: dict[str, list[str]]
    artifacts: dict[str, dict]
    model: dict

    def to_dict(self) -> dict:
        return {
            "created_utc": self.created_utc,
            "seed": self.seed,
            "backend": self.backend,
            "config": self.config,
            "corpus_input": self.corpus_input,
            "splits": self.splits,
            "artifacts": self.artifacts,
            "model": self.model,
        }


def _artifact(path: Path) -> dict:
    return {"path": str(path), "sha256": sha256_file(path)}


def run_pipeline(config: PipelineConfig, out_dir) -> RunManifest:
    """Execute all stages, writing artifacts and a manifest under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def stage(name, fn):
        try:
            return fn()
        except Exception as exc:
            raise StageError(name, exc) from exc

    def run_ingest():
        layout = detect_split_layout(config.corpus_dir)
        if layout:
            per_split = {name: ingest_directory(path) for name, path in layout.items()}
            ingested = [d for split in ("train", "dev", "test") for d in per_split[split]]
            split_ids = {name: sorted(d.doc_id for d in ds) for name, ds in per_split.items()}
        else:
            ingested = ingest_directory(config.corpus_dir)
            split_ids = split_documents([d.doc_id for d in ingested], config.seed)
        write_corpus(ingested, out / "corpus.jsonl")
        return ingested, split_ids

    docs, splits = stage("ingest", run_ingest)
    corpus_path = out / "corpus.jsonl"
    by_id = {d.doc_id: d for d in docs}

    def make_candidates():
        rows = []
        for doc in docs:
            for pair in enumerate_pairs(doc, config.policy):
                rows.append(pair)
        with open(out / "candidates.jsonl", "w", encoding="utf-8") as fh:
            for p in rows:
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
        return rows

    pairs = stage("candidates", make_candidates)

    def make_sequences():
        examples = [build_sequence(by_id[p.doc_id], p, config.sequence) for p in pairs]
        write_examples(examples, out / "sequences.jsonl")
        return examples

    examples = stage("sequences", make_sequences)

    def run_train():
        train_ids = set(splits["train"])
        model = train([ex for ex in examples if ex.doc_id in train_ids], config.classifier)
        model.save(out / "model.json")
        return model

    model = stage("train", run_train)

    def run_predict():
        test_ids = set(splits["test"])
        test_examples = [ex for ex in examples if ex.doc_id in test_ids]
        records = [
            PredictionRecord(ex.doc_id, ex.head, ex.tail, label, scores)
            for ex, (label, scores) in zip(test_examples, model.predict_batch(test_examples))
        ]
        write_predictions(records, out / "predictions.jsonl")
        return records

    predictions = stage("predict", run_predict)

    def run_evaluate():
        test_ids = set(splits["test"])
        gold = gold_from_documents([d for d in docs if d.doc_id in test_ids])
        report = score(predictions, gold)
        (out / "report.json").write_text(
            render_report(report, "json") + "\n", encoding="utf-8"
        )
        return report

    stage("evaluate", run_evaluate)

    manifest = RunManifest(
        created_utc=_dt.datetime.now(_dt.timezone.utc).isoformat(),
        seed=config.seed,
        backend=kernels.BACKEND,
        config=config.to_dict(),
        corpus_input=corpus_input_digest(config.corpus_dir),
        splits=splits,
        artifacts={
            "corpus": _artifact(corpus_path),
            "candidates": _artifact(out / "candidates.jsonl"),
            "sequences": _artifact(out / "sequences.jsonl"),
            "predictions": _artifact(out / "predictions.jsonl"),
            "report": _artifact(out / "report.json"),
        },
        model=_artifact(out / "model.json"),
    )
    (out / "manifest.json").write_text(
        json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    return manifest


@dataclass(frozen=True)
class SweepRow:
    threshold: int
    stats: CandidateStats


def stats_sweep(
    docs: list[Document],
    thresholds=range(1, 31),
    reference_policy: PairPolicy | None = None,
) -> list[SweepRow]:
    """Retention/reduction curve across distance thresholds.

    Token gaps, gold pairs, and reference counts are computed once per
    document, then rolled up per threshold.
    """
    reference_policy = reference_policy or PairPolicy(mode="same_step")
    thresholds = list(thresholds)
    ref_total = 0
    gold_total = 0
    # per-threshold accumulators
    totals = {t: 0 for t in thresholds}
    positives = {t: 0 for t in thresholds}
    retained = {t: 0 for t in thresholds}
    rates = {t: [] for t in thresholds}
    for doc in docs:
        ref_total += len(enumerate_pairs(doc, reference_policy))
        gold_total += len(doc.gold_relations)
        gold_pairs = {(r.head, r.tail) for r in doc.gold_relations}
        gold_count = {}
        for r in doc.gold_relations:
            gold_count[(r.head, r.tail)] = gold_count.get((r.head, r.tail), 0) + 1
        gaps = []
        for pair in enumerate_pairs(doc, PairPolicy(mode="all_pairs")):
            gaps.append((pair.token_gap, (pair.head, pair.tail) in gold_pairs, pair))
        for t in thresholds:
            doc_total = doc_pos = doc_ret = 0
            for gap, is_gold, pair in gaps:
                if gap < t:
                    doc_total += 1
                    if is_gold:
                        doc_pos += 1
                        doc_ret += gold_count[(pair.head, pair.tail)]
            totals[t] += doc_total
            positives[t] += doc_pos
            retained[t] += doc_ret
            if doc_total:
                rates[t].append(doc_pos / doc_total)
    rows = []
    for t in thresholds:
        rows.append(
            SweepRow(
                t,
                CandidateStats(
                    total_pairs=totals[t],
                    gold_relations_total=gold_total,
                    gold_relations_retained=retained[t],
                    retention=retained[t] / gold_total if gold_total else 1.0,
                    positive_rate=positives[t] / totals[t] if totals[t] else 0.0,
                    positive_rate_macro=(
                        sum(rates[t]) / len(rates[t]) if rates[t] else 0.0
                    ),
                    reduction_vs_reference=(
                        1.0 - totals[t] / ref_total if ref_total else 0.0
                    ),
                    reference_pairs=ref_total,
                ),
            )
        )
    return rows


def render_sweep(rows: list[SweepRow]) -> str:
    lines = [
        f"{'dist':>4}  {'pairs':>10}  {'retention':>9}  {'pos_rate':>9}  {'reduction':>9}"
    ]
    for row in rows:
        s = row.stats
        lines.append(
            f"{row.threshold:>4}  {s.total_pairs:>10}  {s.retention:>9.4f}"
            f"  {s.positive_rate:>9.4f}  {s.reduction_vs_reference:>9.4f}"
        )
    return "\n".join(lines)


def stats_command(corpus_dir, thresholds=range(1, 31)) -> dict:
    """Stats payload for the CLI: all-pairs rates plus the sweep table."""
    docs = ingest_directory(corpus_dir)
    all_pairs = PairPolicy(mode="all_pairs")
    same_step = PairPolicy(mode="same_step")
    base = candidate_stats(docs, all_pairs, same_step)
    rows = stats_sweep(docs, thresholds)
    return {
        "documents": len(docs),
        "gold_relations": base.gold_relations_total,
        "all_pairs": {
            "total_pairs": base.total_pairs,
            "positive_rate": base.positive_rate,
            "positive_rate_macro": base.positive_rate_macro,
        },
        "sweep": [
            {
                "threshold": row.threshold,
                "total_pairs": row.stats.total_pairs,
                "retention": row.stats.retention,
                "positive_rate": row.stats.positive_rate,
                "reduction_vs_same_step": row.stats.reduction_vs_reference,
            }
            for row in rows
        ],
    }
