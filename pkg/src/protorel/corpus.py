"""Standoff-annotated protocol corpus parsing.

Builds an offset-exact document model from paired ``.txt``/``.ann`` files:
whitespace/punctuation tokens with character spans, one step per protocol
line, typed entity spans, and gold relations (direct relation records plus
event records flattened to one trigger->argument relation per role).

Annotation record shapes understood::

    T<id>\\t<Type> <start> <end>\\t<surface>        entity / trigger
    T<id>\\t<Type> <s1> <e1>;<s2> <e2>\\t<surface>  discontinuous entity
    R<id>\\t<Label> Arg1:<ref> Arg2:<ref>           relation
    E<id>\\t<TriggerType>:<ref> <Role>:<ref> ...    event
    #/A/M ...                                       ignored

References may name entities (T ids) or events (E ids); event references
resolve to the referenced event's trigger entity.
"""

from __future__ import annotations

import bisect
import json
import unicodedata
from dataclasses import dataclass, field

ORIGIN_RELATION = "R-line"
ORIGIN_EVENT = "E-line-argument"


class StandoffError(ValueError):
    """Base class for annotation parsing failures."""


class MalformedLine(StandoffError):
    """An annotation record has the wrong shape or an impossible value."""


class OffsetMismatch(StandoffError):
    """A T-line's claimed surface does not match the text at its offsets."""


class DanglingReference(StandoffError):
    """An R/E record references an annotation id that does not exist."""


@dataclass(frozen=True)
class Token:
    index: int
    start: int
    end: int
    surface: str


@dataclass(frozen=True)
class StepSpan:
    """Inclusive token index range of one protocol line."""

    step_index: int
    first: int
    last: int


@dataclass(frozen=True)
class EntitySpan:
    entity_id: str
    entity_type: str
    start: int
    end: int
    first_tok: int
    last_tok: int
    surface: str
    # provenance only (multi-fragment annotation collapsed to its hull);
    # not part of the canonical serialization
    discontinuous: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class RelationInstance:
    head: str
    tail: str
    label: str
    origin: str


@dataclass
class Document:
    doc_id: str
    text: str
    tokens: list[Token]
    steps: list[StepSpan]
    entities: list[EntitySpan]
    gold_relations: list[RelationInstance]
    _entity_index: dict[str, EntitySpan] = field(default=None, repr=False, compare=False)
    _step_starts: list[int] = field(default=None, repr=False, compare=False)

    def entity(self, entity_id: str) -> EntitySpan:
        if self._entity_index is None:
            self._entity_index = {e.entity_id: e for e in self.entities}
        return self._entity_index[entity_id]

    def step_of_token(self, token_index: int) -> int:
        """Step index owning ``token_index``; steps partition the tokens."""
        if self._step_starts is None:
            self._step_starts = [s.first for s in self.steps]
        return bisect.bisect_right(self._step_starts, token_index) - 1


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[Token]:
    """Split on whitespace, isolating punctuation as single-char tokens.

    Offsets are exact: ``token.surface == text[token.start:token.end]`` and
    every character outside token spans is whitespace.
    """
    tokens: list[Token] = []
    word_start = None

    def flush(end: int) -> None:
        nonlocal word_start
        if word_start is not None:
            tokens.append(Token(len(tokens), word_start, end, text[word_start:end]))
            word_start = None

    for i, ch in enumerate(text):
        if ch.isspace():
            flush(i)
        elif _is_punct(ch):
            flush(i)
            tokens.append(Token(len(tokens), i, i + 1, ch))
        elif word_start is None:
            word_start = i
    flush(len(text))
    return tokens


def segment_steps(document_text: str, tokens: list[Token]) -> list[StepSpan]:
    """One StepSpan per non-empty line; the spans partition the tokens."""
    steps: list[StepSpan] = []
    line_start = 0
    tok_i = 0
    n = len(tokens)
    # iterate line boundaries including the final unterminated line
    for chunk in document_text.split("\n"):
        line_end = line_start + len(chunk)
        first = tok_i
        while tok_i < n and tokens[tok_i].start < line_end:
            tok_i += 1
        if tok_i > first:
            steps.append(StepSpan(len(steps), first, tok_i - 1))
        line_start = line_end + 1
    return steps


def _split_tokens_at(tokens: list[Token], cuts: set[int]) -> list[Token]:
    """Split any token that strictly contains one of ``cuts``.

    Entities must map to whole tokens, so entity span boundaries falling
    inside a token force a split there.
    """
    if not cuts:
        return tokens
    out: list[Token] = []
    for tok in tokens:
        inner = sorted(c for c in cuts if tok.start < c < tok.end)
        if not inner:
            out.append(Token(len(out), tok.start, tok.end, tok.surface))
            continue
        bounds = [tok.start] + inner + [tok.end]
        for a, b in zip(bounds, bounds[1:]):
            out.append(Token(len(out), a, b, tok.surface[a - tok.start : b - tok.start]))
    return out


def _token_range(tokens: list[Token], start: int, end: int) -> tuple[int, int]:
    """Inclusive index range of tokens overlapping [start, end)."""
    first = last = None
    for tok in tokens:
        if tok.start >= end:
            break
        if tok.end > start:
            if first is None:
                first = tok.index
            last = tok.index
    if first is None:
        raise MalformedLine(f"entity span [{start},{end}) covers no tokens")
    return first, last


def _parse_fragments(spec: str, line: str) -> list[tuple[int, int]]:
    frags = []
    for frag in spec.split(";"):
        parts = frag.split()
        if len(parts) != 2:
            raise MalformedLine(f"bad offset field in: {line!r}")
        try:
            s, e = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise MalformedLine(f"non-integer offset in: {line!r}") from exc
        if s >= e:
            raise MalformedLine(f"empty span {s}..{e} in: {line!r}")
        frags.append((s, e))
    return frags


def parse_standoff(text_content: str, ann_content: str, doc_id: str) -> Document:
    """Parse one protocol's text and standoff annotation into a Document.

    Raises OffsetMismatch, DanglingReference, or MalformedLine on bad input;
    the same inputs always yield a structurally identical Document.
    """
    text = text_content
    raw_entities: list[tuple[str, str, list[tuple[int, int]], str]] = []
    raw_relations: list[tuple[str, str, str]] = []  # (label, head_ref, tail_ref)
    raw_events: list[tuple[str, str, list[tuple[str, str]]]] = []  # (eid, trig_ref, [(role, ref)])
    seen_ids: set[str] = set()

    for line in ann_content.splitlines():
        if not line.strip():
            continue
        kind = line[0]
        if kind in "#AM":
            continue
        fields = line.split("\t")
        ann_id = fields[0]
        if kind == "T":
            if len(fields) < 3:
                raise MalformedLine(f"{doc_id}: expected 3 tab fields: {line!r}")
            surface = "\t".join(fields[2:])
            mid = fields[1].split(" ", 1)
            if len(mid) != 2:
                raise MalformedLine(f"{doc_id}: bad entity field: {line!r}")
            etype = mid[0]
            frags = _parse_fragments(mid[1], line)
            if ann_id in seen_ids:
                raise MalformedLine(f"{doc_id}: duplicate annotation id {ann_id}")
            seen_ids.add(ann_id)
            if frags[-1][1] > len(text):
                raise OffsetMismatch(f"{doc_id}: {ann_id} offsets exceed text length")
            claimed = " ".join(text[s:e] for s, e in frags)
            # standoff files encode newlines inside spans as spaces
            if claimed != surface and claimed.replace("\n", " ") != surface:
                raise OffsetMismatch(
                    f"{doc_id}: {ann_id} surface mismatch: annotation {surface!r} vs text {claimed!r}"
                )
            raw_entities.append((ann_id, etype, frags, surface))
        elif kind == "R":
            if len(fields) != 2:
                raise MalformedLine(f"{doc_id}: expected 2 tab fields: {line!r}")
            parts = fields[1].split()
            if len(parts) != 3 or ":" not in parts[1] or ":" not in parts[2]:
                raise MalformedLine(f"{doc_id}: bad relation args: {line!r}")
            label = parts[0]
            head_ref = parts[1].split(":", 1)[1]
            tail_ref = parts[2].split(":", 1)[1]
            raw_relations.append((label, head_ref, tail_ref))
        elif kind == "E":
            if len(fields) != 2:
                raise MalformedLine(f"{doc_id}: expected 2 tab fields: {line!r}")
            parts = fields[1].split()
            if not parts or ":" not in parts[0]:
                raise MalformedLine(f"{doc_id}: bad event trigger: {line!r}")
            trig_ref = parts[0].split(":", 1)[1]
            args = []
            for part in parts[1:]:
                if ":" not in part:
                    raise MalformedLine(f"{doc_id}: bad event argument {part!r}: {line!r}")
                role, ref = part.split(":", 1)
                role = role.rstrip("0123456789")
                if not role:
                    raise MalformedLine(f"{doc_id}: empty role name: {line!r}")
                args.append((role, ref))
            if ann_id in seen_ids:
                raise MalformedLine(f"{doc_id}: duplicate annotation id {ann_id}")
            seen_ids.add(ann_id)
            raw_events.append((ann_id, trig_ref, args))
        else:
            raise MalformedLine(f"{doc_id}: unrecognized annotation line: {line!r}")

    # entity boundaries split any token they fall inside
    tokens = tokenize(text)
    cuts: set[int] = set()
    for _, _, frags, _ in raw_entities:
        cuts.add(frags[0][0])
        cuts.add(frags[-1][1])
    tokens = _split_tokens_at(tokens, cuts)

    entities = []
    for ann_id, etype, frags, _ in raw_entities:
        start, end = frags[0][0], frags[-1][1]  # convex hull of fragments
        first, last = _token_range(tokens, start, end)
        entities.append(
            EntitySpan(ann_id, etype, start, end, first, last, text[start:end], len(frags) > 1)
        )

    trigger_of = {eid: trig for eid, trig, _ in raw_events}
    entity_ids = {e.entity_id for e in entities}

    def resolve(ref: str, line_kind: str) -> str:
        seen = set()
        while ref not in entity_ids:
            if ref in seen or ref not in trigger_of:
                raise DanglingReference(f"{doc_id}: {line_kind} references unknown id {ref}")
            seen.add(ref)
            ref = trigger_of[ref]
        return ref

    relations = []
    for label, head_ref, tail_ref in raw_relations:
        head, tail = resolve(head_ref, "R-line"), resolve(tail_ref, "R-line")
        if head == tail:
            raise MalformedLine(f"{doc_id}: self-relation on {head}")
        relations.append(RelationInstance(head, tail, label, ORIGIN_RELATION))
    for eid, trig_ref, args in raw_events:
        head = resolve(trig_ref, "E-line")
        for role, ref in args:
            tail = resolve(ref, "E-line")
            if head == tail:
                raise MalformedLine(f"{doc_id}: event {eid} argument points at its own trigger")
            relations.append(RelationInstance(head, tail, role, ORIGIN_EVENT))

    return Document(doc_id, text, tokens, segment_steps(text, tokens), entities, relations)


def document_to_dict(doc: Document) -> dict:
    """Canonical corpus serialization record (one Document per JSON line)."""
    return {
        "doc_id": doc.doc_id,
        "text": doc.text,
        "tokens": [{"i": t.index, "start": t.start, "end": t.end, "s": t.surface} for t in doc.tokens],
        "steps": [[s.first, s.last] for s in doc.steps],
        "entities": [
            {
                "id": e.entity_id,
                "type": e.entity_type,
                "start": e.start,
                "end": e.end,
                "first_tok": e.first_tok,
                "last_tok": e.last_tok,
                "surface": e.surface,
            }
            for e in doc.entities
        ],
        "relations": [
            {"head": r.head, "tail": r.tail, "label": r.label, "origin": r.origin}
            for r in doc.gold_relations
        ],
    }


def document_from_dict(record: dict) -> Document:
    return Document(
        doc_id=record["doc_id"],
        text=record["text"],
        tokens=[Token(t["i"], t["start"], t["end"], t["s"]) for t in record["tokens"]],
        steps=[StepSpan(i, first, last) for i, (first, last) in enumerate(record["steps"])],
        entities=[
            EntitySpan(
                e["id"], e["type"], e["start"], e["end"], e["first_tok"], e["last_tok"], e["surface"]
            )
            for e in record["entities"]
        ],
        gold_relations=[
            RelationInstance(r["head"], r["tail"], r["label"], r["origin"])
            for r in record["relations"]
        ],
    )


def write_corpus(docs: list[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(document_to_dict(doc), ensure_ascii=False) + "\n")


def read_corpus(path) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                docs.append(document_from_dict(json.loads(line)))
    return docs
