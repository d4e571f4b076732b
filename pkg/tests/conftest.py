import random
from pathlib import Path

import pytest

from protorel.corpus import Document, EntitySpan, RelationInstance, segment_steps, tokenize
from protorel.labels import WLPC_RELATION_LABELS
from protorel.pipeline import ingest_directory

FIXTURE_DIR = Path(__file__).parent / "fixtures" / "corpus"

WORDS = (
    "add mix the a buffer sample tube gently water incubate at spin collect "
    "cells medium transfer plate wash discard fresh cold solution pellet "
    "vortex for with into onto each then carefully room temperature"
).split()
PUNCT = [".", ",", ";", "(", ")"]
ENTITY_TYPES = ("Action", "Reagent", "Amount", "Location", "Modifier", "Time", "Device")


@pytest.fixture(scope="session")
def fixture_docs():
    return ingest_directory(FIXTURE_DIR)


def make_random_document(
    rng: random.Random,
    doc_id: str = "rnd",
    max_lines: int = 6,
    max_entities: int = 12,
    max_entity_tokens: int = 3,
    relation_count: int | None = None,
) -> Document:
    """Synthetic document with non-overlapping entities and random gold links."""
    lines = []
    for _ in range(rng.randint(1, max_lines)):
        n = rng.randint(3, 14)
        words = [rng.choice(WORDS) for _ in range(n)]
        if rng.random() < 0.5:
            words.insert(rng.randrange(len(words) + 1), rng.choice(PUNCT))
        lines.append(" ".join(words))
    text = "\n".join(lines) + "\n"
    tokens = tokenize(text)
    steps = segment_steps(text, tokens)

    entities = []
    used = set()
    n_entities = rng.randint(0, min(max_entities, len(tokens)))
    attempts = 0
    while len(entities) < n_entities and attempts < 200:
        attempts += 1
        width = rng.randint(1, max_entity_tokens)
        first = rng.randrange(len(tokens))
        last = min(first + width - 1, len(tokens) - 1)
        if any(i in used for i in range(first, last + 1)):
            continue
        used.update(range(first, last + 1))
        start, end = tokens[first].start, tokens[last].end
        entities.append(
            EntitySpan(
                f"T{len(entities) + 1}",
                rng.choice(ENTITY_TYPES),
                start,
                end,
                first,
                last,
                text[start:end],
            )
        )
    entities.sort(key=lambda e: e.first_tok)
    entities = [
        EntitySpan(f"T{i + 1}", e.entity_type, e.start, e.end, e.first_tok, e.last_tok, e.surface)
        for i, e in enumerate(entities)
    ]

    relations = []
    if len(entities) >= 2:
        wanted = rng.randint(0, len(entities)) if relation_count is None else relation_count
        seen = set()
        for _ in range(wanted):
            head, tail = rng.sample(entities, 2)
            key = (head.entity_id, tail.entity_id)
            if key in seen:
                continue
            seen.add(key)
            relations.append(
                RelationInstance(
                    head.entity_id,
                    tail.entity_id,
                    rng.choice(WLPC_RELATION_LABELS),
                    "R-line",
                )
            )
    return Document(doc_id, text, tokens, steps, entities, relations)
