"""Native relation classifier over serialized classification sequences.

A multinomial logistic regression with hashed sparse features, trained by
plain SGD on cross-entropy. It stands in for a heavyweight sequence model
so the whole pipeline runs and is testable offline; the external model
bridge consumes the same exchange files and emits the same predictions
schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import kernels
from .labels import NO_RELATION
from .sequences import SequenceConfig, SequenceExample

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_GAP_BUCKETS = ((0, "0"), (1, "1"), (2, "2"), (5, "3-5"), (9, "6-9"), (13, "10-13"))


class DegenerateData(ValueError):
    """A requested class has no training examples."""


def hash_feature(name: str, dim: int) -> int:
    """FNV-1a of the feature string, folded into [0, dim)."""
    h = _FNV_OFFSET
    for byte in name.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h % dim


def _gap_bucket(gap: int) -> str:
    for bound, name in _GAP_BUCKETS:
        if gap <= bound:
            return name
    return "14+"


@dataclass
class DecomposedExample:
    head_tokens: list[str]
    head_type: str
    tail_tokens: list[str]
    tail_type: str
    context: list[str]


def decompose(example: SequenceExample, config: SequenceConfig) -> DecomposedExample:
    """Recover the entity/label/context segments from the canonical layout."""
    seps = [i for i, t in enumerate(example.tokens) if t == config.separator_token][:4]
    if len(seps) != 4:
        raise ValueError(f"expected 4 separators, got {len(seps)}")
    s1, s2, s3, s4 = seps
    return DecomposedExample(
        head_tokens=example.tokens[1:s1],
        head_type=example.tokens[s1 + 1],
        tail_tokens=example.tokens[s2 + 1 : s3],
        tail_type=example.tokens[s3 + 1],
        context=example.tokens[s4 + 1 :],
    )


def feature_strings(example: SequenceExample, config: SequenceConfig | None = None) -> list[str]:
    """Deterministic feature names for one example (repeats carry counts)."""
    config = config or SequenceConfig()
    parts = decompose(example, config)
    ctx = parts.context
    a_pos = [i for i, t in enumerate(ctx) if t == config.marker_a]
    b_pos = [i for i, t in enumerate(ctx) if t == config.marker_b]
    markers = {config.marker_a, config.marker_b}

    a_open, a_close = a_pos[0], a_pos[-1]
    b_open, b_close = b_pos[0], b_pos[-1]
    if a_close < b_open:
        gap = sum(1 for i in range(a_close + 1, b_open) if ctx[i] not in markers)
    elif b_close < a_open:
        gap = sum(1 for i in range(b_close + 1, a_open) if ctx[i] not in markers)
    else:
        gap = 0
    bucket = _gap_bucket(gap)

    type_pair = f"{parts.head_type}→{parts.tail_type}"
    feats = [
        f"typepair={type_pair}",
        f"dir={'fwd' if a_open <= b_open else 'rev'}",
        f"gap={bucket}",
        f"enta={' '.join(parts.head_tokens).lower()}",
        f"entb={' '.join(parts.tail_tokens).lower()}",
        f"typegap={type_pair}|{bucket}",
    ]
    for prefix, opening, closing in (("ctxa", a_open, a_close), ("ctxb", b_open, b_close)):
        window = list(range(max(0, opening - 3), opening)) + list(
            range(closing + 1, min(len(ctx), closing + 4))
        )
        for i in window:
            if ctx[i] not in markers:
                feats.append(f"{prefix}={ctx[i].lower()}")
    return feats


def featurize(
    example: SequenceExample, config: SequenceConfig | None = None, dim: int = 2**18
) -> dict[int, float]:
    """Hashed sparse feature vector; identical examples hash identically."""
    vec: dict[int, float] = {}
    for name in feature_strings(example, config):
        key = hash_feature(name, dim)
        vec[key] = vec.get(key, 0.0) + 1.0
    return vec


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    learning_rate: float = 0.1
    seed: int = 13
    negative_ratio: float = 5.0
    hash_dim: int = 2**18
    labels: tuple[str, ...] | None = None


@dataclass
class BaselineModel:
    classes: list[str]
    config: TrainConfig
    weights: np.ndarray = field(repr=False)
    train_losses: list[float] = field(default_factory=list, repr=False)

    def predict(self, example: SequenceExample) -> tuple[str, dict[str, float]]:
        """Argmax label and full softmax score map (ties: lowest class index)."""
        label, scores = self.predict_batch([example])[0]
        return label, scores

    def predict_batch(self, examples) -> list[tuple[str, dict[str, float]]]:
        indptr, indices, data = _to_csr(examples, self.config.hash_dim)
        out = np.empty((len(examples), len(self.classes)), dtype=np.float64)
        kernels.score_rows(indptr, indices, data, self.weights, out)
        results = []
        for row in out:
            best = 0
            for c in range(1, len(self.classes)):
                if row[c] > row[best]:
                    best = c
            scores = {label: float(row[c]) for c, label in enumerate(self.classes)}
            results.append((self.classes[best], scores))
        return results

    def save(self, path) -> None:
        payload = {
            "format": "protorel-baseline",
            "version": 1,
            "classes": self.classes,
            "config": asdict(self.config),
            "weights": {},
        }
        for c, label in enumerate(self.classes):
            nz = np.nonzero(self.weights[c])[0]
            payload["weights"][label] = {
                "ids": [int(i) for i in nz],
                "values": [float(self.weights[c, i]) for i in nz],
            }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "BaselineModel":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != "protorel-baseline":
            raise ValueError(f"not a baseline model file: {path}")
        cfg = payload["config"]
        if cfg.get("labels") is not None:
            cfg["labels"] = tuple(cfg["labels"])
        config = TrainConfig(**cfg)
        classes = list(payload["classes"])
        weights = np.zeros((len(classes), config.hash_dim), dtype=np.float64)
        for c, label in enumerate(classes):
            entry = payload["weights"][label]
            for i, v in zip(entry["ids"], entry["values"]):
                weights[c, i] = v
        return cls(classes=classes, config=config, weights=weights)


def _to_csr(examples, dim):
    indptr = np.zeros(len(examples) + 1, dtype=np.int64)
    all_idx: list[int] = []
    all_val: list[float] = []
    for i, ex in enumerate(examples):
        vec = featurize(ex, dim=dim)
        for key in sorted(vec):
            all_idx.append(key)
            all_val.append(vec[key])
        indptr[i + 1] = len(all_idx)
    return (
        indptr,
        np.asarray(all_idx, dtype=np.int64),
        np.asarray(all_val, dtype=np.float64),
    )


def _build_inventory(examples, config: TrainConfig) -> list[str]:
    present = {ex.label for ex in examples}
    if config.labels is not None:
        classes = [NO_RELATION] + [l for l in config.labels if l != NO_RELATION]
        missing = [l for l in classes if l not in present]
        if missing:
            raise DegenerateData(f"no training examples for: {', '.join(missing)}")
    else:
        classes = [NO_RELATION] + sorted(present - {NO_RELATION})
        if NO_RELATION not in present:
            raise DegenerateData(f"no training examples for: {NO_RELATION}")
    return classes


def train(examples: list[SequenceExample], config: TrainConfig | None = None) -> BaselineModel:
    """Train the multinomial model; deterministic for a fixed seed.

    NoRelation examples are downsampled to ``negative_ratio`` per positive
    before training; epoch visit order is a seeded shuffle.
    """
    config = config or TrainConfig()
    if not examples:
        raise DegenerateData("no training examples")
    classes = _build_inventory(examples, config)
    class_index = {label: c for c, label in enumerate(classes)}

    rng = np.random.default_rng(config.seed)
    pos = [i for i, ex in enumerate(examples) if ex.label != NO_RELATION]
    neg = [i for i, ex in enumerate(examples) if ex.label == NO_RELATION]
    keep_neg = int(config.negative_ratio * len(pos))
    if len(neg) > keep_neg:
        neg = sorted(rng.choice(np.asarray(neg), size=keep_neg, replace=False).tolist())
    kept = sorted(pos + neg)
    if not kept or not neg:
        raise DegenerateData("downsampling left a class empty")

    subset = [examples[i] for i in kept]
    indptr, indices, data = _to_csr(subset, config.hash_dim)
    y = np.asarray([class_index[ex.label] for ex in subset], dtype=np.int64)
    orders = np.stack([rng.permutation(len(subset)) for _ in range(config.epochs)]).astype(
        np.int64
    )

    weights = np.zeros((len(classes), config.hash_dim), dtype=np.float64)
    losses = kernels.sgd_epochs(
        indptr, indices, data, y, weights, float(config.learning_rate), orders
    )
    return BaselineModel(classes=classes, config=config, weights=weights, train_losses=losses)
