"""Candidate entity-pair enumeration under proximity policies.

Pairs are ordered (direction matters), so a document with n entities has
n^2 - n possible pairs. The ``token_distance`` policy keeps pairs with
strictly fewer than ``max_token_distance`` tokens between the two spans;
``same_step`` keeps pairs whose entities start on the same protocol line.
Symmetric relation types are not deduplicated: both directions of a pair
are enumerated and labeled independently.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Document, EntitySpan
from .labels import NO_RELATION

MODES = ("all_pairs", "same_step", "token_distance")


class SameEntity(ValueError):
    """Token distance was requested between an entity and itself."""


class EmptyCorpus(ValueError):
    """Statistics were requested over zero documents."""


@dataclass(frozen=True)
class PairPolicy:
    mode: str = "token_distance"
    max_token_distance: int = 14

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if self.max_token_distance < 0:
            raise ValueError("max_token_distance must be >= 0")


@dataclass(frozen=True)
class CandidatePair:
    doc_id: str
    head: str
    tail: str
    token_gap: int
    gold_label: str


@dataclass(frozen=True)
class CandidateStats:
    total_pairs: int
    gold_relations_total: int
    gold_relations_retained: int
    retention: float
    positive_rate: float
    positive_rate_macro: float
    reduction_vs_reference: float
    reference_pairs: int


def token_distance(a: EntitySpan, b: EntitySpan) -> int:
    """Number of tokens strictly between two spans (0 if adjacent/overlapping)."""
    if a.entity_id == b.entity_id:
        raise SameEntity(a.entity_id)
    earlier, later = (a, b) if a.first_tok <= b.first_tok else (b, a)
    return max(0, later.first_tok - earlier.last_tok - 1)


def _gold_labels(doc: Document) -> dict[tuple[str, str], str]:
    labels: dict[tuple[str, str], str] = {}
    for rel in doc.gold_relations:
        labels.setdefault((rel.head, rel.tail), rel.label)
    return labels


def enumerate_pairs(doc: Document, policy: PairPolicy) -> list[CandidatePair]:
    """Ordered candidate pairs passing the policy filter, gold-labeled."""
    gold = _gold_labels(doc)
    pairs = []
    for head in doc.entities:
        for tail in doc.entities:
            if head.entity_id == tail.entity_id:
                continue
            if policy.mode == "same_step" and doc.step_of_token(
                head.first_tok
            ) != doc.step_of_token(tail.first_tok):
                continue
            gap = token_distance(head, tail)
            if policy.mode == "token_distance" and gap >= policy.max_token_distance:
                continue
            pairs.append(
                CandidatePair(
                    doc.doc_id,
                    head.entity_id,
                    tail.entity_id,
                    gap,
                    gold.get((head.entity_id, tail.entity_id), NO_RELATION),
                )
            )
    return pairs


def candidate_stats(
    corpus: list[Document], policy: PairPolicy, reference_policy: PairPolicy
) -> CandidateStats:
    """Retention/positive-rate/reduction statistics for a policy.

    retention counts gold relations whose ordered pair survives the policy;
    positive_rate is gold-labeled pairs over total pairs (pooled across the
    corpus; the macro variant averages per-document rates); reduction is
    relative to the pair count under ``reference_policy``.
    """
    if not corpus:
        raise EmptyCorpus("no documents")
    total = positives = 0
    gold_total = retained = 0
    reference_total = 0
    per_doc_rates = []
    for doc in corpus:
        pairs = enumerate_pairs(doc, policy)
        total += len(pairs)
        doc_pos = sum(1 for p in pairs if p.gold_label != NO_RELATION)
        positives += doc_pos
        if pairs:
            per_doc_rates.append(doc_pos / len(pairs))
        surviving = {(p.head, p.tail) for p in pairs}
        gold_total += len(doc.gold_relations)
        retained += sum(1 for r in doc.gold_relations if (r.head, r.tail) in surviving)
        reference_total += len(enumerate_pairs(doc, reference_policy))
    return CandidateStats(
        total_pairs=total,
        gold_relations_total=gold_total,
        gold_relations_retained=retained,
        retention=retained / gold_total if gold_total else 1.0,
        positive_rate=positives / total if total else 0.0,
        positive_rate_macro=sum(per_doc_rates) / len(per_doc_rates) if per_doc_rates else 0.0,
        reduction_vs_reference=1.0 - total / reference_total if reference_total else 0.0,
        reference_pairs=reference_total,
    )
