"""Scoring of prediction files against gold relations.

Per-class precision/recall/F1 with support plus micro (pooled counts) and
macro (unweighted mean of per-class metrics) averages. NoRelation is a
prediction outcome, never a scored class. Gold pairs that were never
emitted as predictions count as false negatives, so candidate-filter
misses show up as lost recall. Scoring is direction-sensitive unless a
class is listed as undirected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .corpus import Document
from .labels import NO_RELATION, canonical_order


class DuplicatePrediction(ValueError):
    """The same ordered pair was predicted more than once."""


class UnknownLabel(ValueError):
    """A prediction or gold label is outside the declared inventory."""


@dataclass(frozen=True)
class PredictionRecord:
    doc_id: str
    head: str
    tail: str
    predicted: str
    scores: dict[str, float] | None = None


@dataclass(frozen=True)
class GoldRecord:
    doc_id: str
    head: str
    tail: str
    label: str


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    tp: int
    fp: int
    fn: int


@dataclass
class EvalReport:
    per_class: dict[str, ClassMetrics]
    micro: ClassMetrics
    macro: ClassMetrics


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _metrics(tp: int, fp: int, fn: int) -> ClassMetrics:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return ClassMetrics(p, r, _f1(p, r), tp + fn, tp, fp, fn)


def report_from_counts(counts: dict[str, tuple[int, int, int]]) -> EvalReport:
    """Build a report from per-class (tp, fp, fn) counts."""
    per_class = {
        label: _metrics(*counts[label]) for label in canonical_order(counts)
    }
    tp = sum(m.tp for m in per_class.values())
    fp = sum(m.fp for m in per_class.values())
    fn = sum(m.fn for m in per_class.values())
    micro = _metrics(tp, fp, fn)
    n = len(per_class)
    support = sum(m.support for m in per_class.values())
    if n:
        macro = ClassMetrics(
            sum(m.precision for m in per_class.values()) / n,
            sum(m.recall for m in per_class.values()) / n,
            sum(m.f1 for m in per_class.values()) / n,
            support,
            tp,
            fp,
            fn,
        )
    else:
        macro = _metrics(0, 0, 0)
    return EvalReport(per_class, micro, macro)


def gold_from_documents(docs: list[Document]) -> list[GoldRecord]:
    """Gold pairs for scoring; exact duplicate annotations are collapsed."""
    seen = set()
    out = []
    for doc in docs:
        for rel in doc.gold_relations:
            key = (doc.doc_id, rel.head, rel.tail, rel.label)
            if key not in seen:
                seen.add(key)
                out.append(GoldRecord(doc.doc_id, rel.head, rel.tail, rel.label))
    return out


def score(
    predictions: list[PredictionRecord],
    gold: list[GoldRecord],
    labels: list[str] | None = None,
    undirected_classes: frozenset[str] = frozenset(),
) -> EvalReport:
    """Score predictions against gold pairs.

    A gold pair is a true positive when a prediction with its label exists
    at its ordered key (or the reversed key, for undirected classes);
    otherwise it is a false negative. A non-NoRelation prediction matching
    no gold pair the same way is a false positive for its class.
    """
    predicted_at: dict[tuple[str, str, str], str] = {}
    for rec in predictions:
        key = (rec.doc_id, rec.head, rec.tail)
        if key in predicted_at:
            raise DuplicatePrediction(f"pair {key} predicted twice")
        predicted_at[key] = rec.predicted

    if labels is not None:
        allowed = set(labels) | {NO_RELATION}
        for rec in predictions:
            if rec.predicted not in allowed:
                raise UnknownLabel(f"predicted label {rec.predicted!r} not in inventory")
        for g in gold:
            if g.label not in allowed:
                raise UnknownLabel(f"gold label {g.label!r} not in inventory")

    def hit(doc_id: str, head: str, tail: str, label: str) -> bool:
        if predicted_at.get((doc_id, head, tail)) == label:
            return True
        return label in undirected_classes and predicted_at.get((doc_id, tail, head)) == label

    gold_at: dict[tuple[str, str, str], set[str]] = {}
    for g in gold:
        gold_at.setdefault((g.doc_id, g.head, g.tail), set()).add(g.label)

    def supported(doc_id: str, head: str, tail: str, label: str) -> bool:
        if label in gold_at.get((doc_id, head, tail), ()):
            return True
        return label in undirected_classes and label in gold_at.get((doc_id, tail, head), ())

    if labels is not None:
        class_set = [l for l in labels if l != NO_RELATION]
    else:
        observed = {g.label for g in gold} | {p.predicted for p in predictions}
        class_set = canonical_order(observed - {NO_RELATION})
    counts = {label: [0, 0, 0] for label in class_set}

    for g in gold:
        if g.label == NO_RELATION:
            continue
        if hit(g.doc_id, g.head, g.tail, g.label):
            counts[g.label][0] += 1
        else:
            counts[g.label][2] += 1
    for rec in predictions:
        if rec.predicted == NO_RELATION:
            continue
        if not supported(rec.doc_id, rec.head, rec.tail, rec.predicted):
            counts[rec.predicted][1] += 1

    return report_from_counts({label: tuple(c) for label, c in counts.items()})


def report_to_dict(report: EvalReport) -> dict:
    def row(m: ClassMetrics) -> dict:
        return {
            "precision": m.precision,
            "recall": m.recall,
            "f1": m.f1,
            "support": m.support,
            "tp": m.tp,
            "fp": m.fp,
            "fn": m.fn,
        }

    return {
        "per_class": {label: row(m) for label, m in report.per_class.items()},
        "micro": row(report.micro),
        "macro": row(report.macro),
    }


def report_from_dict(payload: dict) -> EvalReport:
    def row(d: dict) -> ClassMetrics:
        return ClassMetrics(
            d["precision"], d["recall"], d["f1"], d["support"], d["tp"], d["fp"], d["fn"]
        )

    return EvalReport(
        per_class={label: row(m) for label, m in payload["per_class"].items()},
        micro=row(payload["micro"]),
        macro=row(payload["macro"]),
    )


def render_report(report: EvalReport, format: str = "table") -> str:
    """Render as an aligned table (2-decimal) or lossless JSON."""
    if format == "json":
        return json.dumps(report_to_dict(report), ensure_ascii=False, indent=2)
    if format != "table":
        raise ValueError(f"unknown format {format!r}")
    width = max([len("Relation Type")] + [len(l) for l in report.per_class])
    lines = [
        f"{'Relation Type':<{width}}  {'Precision':>9}  {'Recall':>6}  {'F1-Score':>8}  {'Support':>7}"
    ]

    def fmt(name: str, m: ClassMetrics) -> str:
        return (
            f"{name:<{width}}  {m.precision:>9.2f}  {m.recall:>6.2f}"
            f"  {m.f1:>8.2f}  {m.support:>7d}"
        )

    for label, m in report.per_class.items():
        lines.append(fmt(label, m))
    lines.append(fmt("Micro-Avg", report.micro))
    lines.append(fmt("Macro-Avg", report.macro))
    return "\n".join(lines)


def write_predictions(records: list[PredictionRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            payload = {
                "doc_id": rec.doc_id,
                "head": rec.head,
                "tail": rec.tail,
                "predicted": rec.predicted,
                "scores": rec.scores,
            }
            if rec.scores is None:
                del payload["scores"]
            fh.write(json.dumps(payload, ensure_ascii=False) + "\n")


def read_predictions(path) -> list[PredictionRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                out.append(
                    PredictionRecord(
                        rec["doc_id"], rec["head"], rec["tail"], rec["predicted"], rec.get("scores")
                    )
                )
    return out
