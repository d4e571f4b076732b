"""Classification input construction for candidate pairs.

Each example is laid out as

    [CLS] <head tokens> [SEP] <head type> [SEP] <tail tokens> [SEP] <tail type> [SEP] <context>

where the context is the step window containing both entities with marker
tokens wrapped around each entity occurrence. Token type ids are 0 for the
entity/label prefix and 1 for every context token, so the mask always
matches 0+1+. Context is trimmed from its edges (farthest from the marked
entities first) to honor the token budget; entity, label, and marked
occurrence tokens are never dropped.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

from .candidates import CandidatePair
from .corpus import Document, EntitySpan, Token


class BudgetExhausted(ValueError):
    """The non-trimmable part of an example exceeds the token budget."""


class OverlappingEntities(UserWarning):
    """The two entities of a pair share tokens; markers will nest."""


@dataclass(frozen=True)
class SequenceConfig:
    context_window_n: int = 1
    max_tokens: int = 100
    marker_a: str = "[EntA]"
    marker_b: str = "[EntB]"
    start_token: str = "[CLS]"
    separator_token: str = "[SEP]"

    def __post_init__(self):
        if self.context_window_n < 1:
            raise ValueError("context_window_n must be >= 1")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass
class SequenceExample:
    doc_id: str
    head: str
    tail: str
    tokens: list[str]
    type_ids: list[int]
    label: str
    overlapping: bool = field(default=False, compare=False)


@dataclass
class MarkedContext:
    tokens: list[str]
    overlapping: bool


def extract_context(doc: Document, pair: CandidatePair, config: SequenceConfig) -> tuple[int, int]:
    """Inclusive token range of the context window for a pair.

    With n=1 this is the union of the steps containing the two entities
    (plus any steps between them); larger n extends the window by
    (n-1)//2 steps on each side, clipped at the document bounds.
    """
    head, tail = doc.entity(pair.head), doc.entity(pair.tail)
    step_ids = [
        doc.step_of_token(head.first_tok),
        doc.step_of_token(head.last_tok),
        doc.step_of_token(tail.first_tok),
        doc.step_of_token(tail.last_tok),
    ]
    extend = (config.context_window_n - 1) // 2
    lo = max(0, min(step_ids) - extend)
    hi = min(len(doc.steps) - 1, max(step_ids) + extend)
    return doc.steps[lo].first, doc.steps[hi].last


def insert_markers(
    context: list[Token], head: EntitySpan, tail: EntitySpan, config: SequenceConfig
) -> MarkedContext:
    """Wrap each entity's token span in its marker, disambiguating repeats.

    Overlapping spans are flagged and emitted with nested markers ordered
    by span start (outer span opens first, inner closes first).
    """
    offset = context[0].index
    spans = [
        (head.first_tok - offset, head.last_tok - offset, config.marker_a),
        (tail.first_tok - offset, tail.last_tok - offset, config.marker_b),
    ]
    for first, last, marker in spans:
        if first < 0 or last >= len(context):
            raise ValueError(f"entity span not contained in context for marker {marker}")
    overlapping = spans[0][0] <= spans[1][1] and spans[1][0] <= spans[0][1]
    if overlapping:
        warnings.warn(
            OverlappingEntities(f"{head.entity_id} and {tail.entity_id} share tokens")
        )

    # openings at the same index: outer (longer) span first; closings at the
    # same index: inner span first; closings always precede openings
    opens: dict[int, list[tuple]] = {}
    closes: dict[int, list[tuple]] = {}
    for order, (first, last, marker) in enumerate(spans):
        opens.setdefault(first, []).append((-last, order, marker))
        closes.setdefault(last + 1, []).append((-first, -order, marker))
    out = []
    for i in range(len(context) + 1):
        for *_, marker in sorted(closes.get(i, ())):
            out.append(marker)
        for *_, marker in sorted(opens.get(i, ())):
            out.append(marker)
        if i < len(context):
            out.append(context[i].surface)
    return MarkedContext(out, overlapping)


def build_sequence(doc: Document, pair: CandidatePair, config: SequenceConfig) -> SequenceExample:
    """Assemble the canonical classification sequence for one pair."""
    head, tail = doc.entity(pair.head), doc.entity(pair.tail)
    first, last = extract_context(doc, pair, config)
    marked = insert_markers(doc.tokens[first : last + 1], head, tail, config)

    head_tokens = [t.surface for t in doc.tokens[head.first_tok : head.last_tok + 1]]
    tail_tokens = [t.surface for t in doc.tokens[tail.first_tok : tail.last_tok + 1]]
    sep = config.separator_token
    prefix = (
        [config.start_token]
        + head_tokens
        + [sep, head.entity_type, sep]
        + tail_tokens
        + [sep, tail.entity_type, sep]
    )

    budget = config.max_tokens - len(prefix)
    markers = {config.marker_a, config.marker_b}
    marker_pos = [i for i, t in enumerate(marked.tokens) if t in markers]
    keep_lo, keep_hi = marker_pos[0], marker_pos[-1]
    if budget < keep_hi - keep_lo + 1:
        raise BudgetExhausted(
            f"{doc.doc_id} {pair.head}->{pair.tail}: needs {len(prefix) + keep_hi - keep_lo + 1}"
            f" tokens, budget is {config.max_tokens}"
        )
    lo, hi = 0, len(marked.tokens) - 1
    while hi - lo + 1 > budget:
        if keep_lo - lo > hi - keep_hi:
            lo += 1
        else:
            hi -= 1
    context_tokens = marked.tokens[lo : hi + 1]

    return SequenceExample(
        doc_id=doc.doc_id,
        head=pair.head,
        tail=pair.tail,
        tokens=prefix + context_tokens,
        type_ids=[0] * len(prefix) + [1] * len(context_tokens),
        label=pair.gold_label,
        overlapping=marked.overlapping,
    )


def example_to_dict(example: SequenceExample) -> dict:
    return {
        "doc_id": example.doc_id,
        "head": example.head,
        "tail": example.tail,
        "tokens": example.tokens,
        "type_ids": example.type_ids,
        "label": example.label,
    }


def example_from_dict(record: dict) -> SequenceExample:
    return SequenceExample(
        doc_id=record["doc_id"],
        head=record["head"],
        tail=record["tail"],
        tokens=list(record["tokens"]),
        type_ids=list(record["type_ids"]),
        label=record["label"],
    )


def write_examples(examples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(example_to_dict(ex), ensure_ascii=False) + "\n")


def read_examples(path) -> list[SequenceExample]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(example_from_dict(json.loads(line)))
    return out
