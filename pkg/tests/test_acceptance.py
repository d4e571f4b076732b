"""Acceptance suite: one test per release criterion, each printing a
PASS line when its assertions hold (run with ``pytest -s`` to see them).

Dataset-dependent checks run against the bundled fixture corpus with a
brute-force oracle and exact agreement; set WLPC_DIR to a corpus checkout
to additionally run them at full scale with the documented tolerances.
"""

import collections
import json
import os
import random
import re
import time
from pathlib import Path

import pytest

from conftest import FIXTURE_DIR, make_random_document
from protorel.candidates import PairPolicy, candidate_stats, enumerate_pairs
from protorel.corpus import read_corpus
from protorel.evaluation import (
    GoldRecord,
    PredictionRecord,
    gold_from_documents,
    render_report,
    report_from_counts,
    score,
)
from protorel.labels import NO_RELATION
from protorel.pipeline import (
    PipelineConfig,
    detect_split_layout,
    ingest_directory,
    run_pipeline,
    stats_sweep,
)
from protorel.sequences import SequenceConfig, build_sequence, read_examples

ALL = PairPolicy(mode="all_pairs")
STEP = PairPolicy(mode="same_step")
DIST14 = PairPolicy(mode="token_distance", max_token_distance=14)

WLPC_DIR = os.environ.get("WLPC_DIR")


def _wlpc_train_docs():
    root = Path(WLPC_DIR)
    layout = detect_split_layout(root)
    return ingest_directory(layout["train"] if layout else root)


def test_c1_parser_integrity(fixture_docs):
    start = time.perf_counter()
    docs = ingest_directory(FIXTURE_DIR)
    assert len(docs) >= 5
    checked = 0
    for doc in docs:
        for ent in doc.entities:
            assert doc.text[ent.start : ent.end] == ent.surface
            checked += 1
        # independent oracle: flattened relation count straight from the
        # annotation lines
        ann_text = (FIXTURE_DIR / f"{doc.doc_id}.ann").read_text(encoding="utf-8")
        expected = 0
        for line in ann_text.splitlines():
            if line.startswith("R"):
                expected += 1
            elif line.startswith("E"):
                expected += len(line.split("\t")[1].split()) - 1
        assert len(doc.gold_relations) == expected
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    scope = f"fixture corpus ({len(docs)} docs, {checked} entity spans, {elapsed:.2f}s)"

    if WLPC_DIR:
        start = time.perf_counter()
        wlpc = _wlpc_train_docs()
        for doc in wlpc:
            for ent in doc.entities:
                assert doc.text[ent.start : ent.end] == ent.surface
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0
        scope += f" + WLPC ({len(wlpc)} docs, {elapsed:.2f}s)"
    print(f"\n[PASS] parser integrity: {scope}")


def test_c2_pair_count_law():
    rng = random.Random(2024)
    for i in range(50):
        doc = make_random_document(rng, doc_id=f"rnd{i}")
        n = len(doc.entities)
        assert len(enumerate_pairs(doc, ALL)) == n * n - n
    print("\n[PASS] pair-count law: 50 random documents, all_pairs == n^2 - n exactly")


def _brute_force_stats(docs, max_distance):
    """Independent recount used as the oracle for the stats criterion."""
    all_total = all_pos = 0
    kept_total = kept_pos = 0
    step_total = 0
    gold_total = retained = 0
    for doc in docs:
        gold_pairs = collections.Counter(
            (r.head, r.tail) for r in doc.gold_relations
        )
        gold_total += sum(gold_pairs.values())
        token_step = {}
        for s in doc.steps:
            for t in range(s.first, s.last + 1):
                token_step[t] = s.step_index
        for a in doc.entities:
            for b in doc.entities:
                if a.entity_id is b.entity_id or a.entity_id == b.entity_id:
                    continue
                all_total += 1
                is_gold = (a.entity_id, b.entity_id) in gold_pairs
                if is_gold:
                    all_pos += 1
                lo, hi = (a, b) if a.first_tok <= b.first_tok else (b, a)
                gap = hi.first_tok - lo.last_tok - 1
                if gap < 0:
                    gap = 0
                if gap < max_distance:
                    kept_total += 1
                    if is_gold:
                        kept_pos += 1
                        retained += gold_pairs[(a.entity_id, b.entity_id)]
                if token_step[a.first_tok] == token_step[b.first_tok]:
                    step_total += 1
    return {
        "all_total": all_total,
        "all_positive_rate": all_pos / all_total,
        "retention": retained / gold_total,
        "reduction": 1.0 - kept_total / step_total,
    }


def test_c3_heuristic_statistics(fixture_docs):
    oracle = _brute_force_stats(fixture_docs, 14)
    base = candidate_stats(fixture_docs, ALL, STEP)
    kept = candidate_stats(fixture_docs, DIST14, STEP)
    assert base.total_pairs == oracle["all_total"]
    assert base.positive_rate == oracle["all_positive_rate"]
    assert kept.retention == oracle["retention"]
    assert kept.reduction_vs_reference == oracle["reduction"]
    sweep_row = stats_sweep(fixture_docs, thresholds=[14])[0]
    assert sweep_row.stats.retention == oracle["retention"]
    msg = (
        f"fixture oracle exact: positive_rate={base.positive_rate:.4f}, "
        f"retention@14={kept.retention:.4f}, reduction={kept.reduction_vs_reference:.4f}"
    )

    if WLPC_DIR:
        docs = _wlpc_train_docs()
        base_w = candidate_stats(docs, ALL, STEP)
        kept_w = candidate_stats(docs, DIST14, STEP)
        assert abs(base_w.positive_rate - 0.0037) <= 0.0015
        assert abs(kept_w.retention - 0.99) <= 0.01
        assert abs(kept_w.reduction_vs_reference - 0.41) <= 0.08
        msg += (
            f" | WLPC: positive_rate={base_w.positive_rate:.4f},"
            f" retention@14={kept_w.retention:.4f},"
            f" reduction={kept_w.reduction_vs_reference:.4f}"
        )
    print(f"\n[PASS] heuristic statistics: {msg}")


def test_c4_sequence_property_suite():
    rng = random.Random(4096)
    config = SequenceConfig()
    markers = (config.marker_a, config.marker_b)
    mask_re = re.compile(r"0+1+")
    built = 0
    doc_index = 0
    while built < 10_000:
        doc_index += 1
        doc = make_random_document(rng, doc_id=f"gen{doc_index}")
        surfaces = [t.surface for t in doc.tokens]
        for pair in enumerate_pairs(doc, DIST14):
            ex = build_sequence(doc, pair, config)
            built += 1
            mask = "".join(str(b) for b in ex.type_ids)
            assert mask_re.fullmatch(mask), "type-id mask must match 0+1+"
            assert len(ex.tokens) <= 100
            assert len(ex.tokens) == len(ex.type_ids)
            assert ex.tokens.count(config.separator_token) == 4
            context = ex.tokens[mask.index("1") :]
            for marker, eid in ((config.marker_a, pair.head), (config.marker_b, pair.tail)):
                positions = [i for i, t in enumerate(context) if t == marker]
                assert len(positions) == 2, "marker pair must survive truncation"
                ent = doc.entity(eid)
                between = [
                    t
                    for t in context[positions[0] + 1 : positions[1]]
                    if t not in markers
                ]
                assert between == surfaces[ent.first_tok : ent.last_tok + 1]
            stripped = [t for t in context if t not in markers]
            # stripped context must be a contiguous slice of the document
            joined = "\x00".join(surfaces)
            assert "\x00".join(stripped) in joined, "context must round-trip"
            if built >= 10_000:
                break
    print(f"\n[PASS] sequence property suite: {built} examples, zero violations")


def test_c5_metric_oracle_equivalence():
    labels = ["Acts-On", "Site", "Measure", "Using", "Or"]
    rng = random.Random(777)
    for _ in range(1000):
        golds, preds = [], []
        pred_keys = set()
        for d in range(rng.randint(1, 3)):
            doc = f"doc{d}"
            for h in range(5):
                for t in range(5):
                    if h == t:
                        continue
                    key = (doc, f"T{h}", f"T{t}")
                    if rng.random() < 0.25:
                        golds.append(GoldRecord(*key, rng.choice(labels)))
                    if rng.random() < 0.3 and key not in pred_keys:
                        pred_keys.add(key)
                        preds.append(
                            PredictionRecord(*key, rng.choice(labels + [NO_RELATION]))
                        )
        report = score(preds, golds)
        # exhaustive confusion recount
        pred_map = {(p.doc_id, p.head, p.tail): p.predicted for p in preds}
        observed = {g.label for g in golds} | {p.predicted for p in preds} - {NO_RELATION}
        observed.discard(NO_RELATION)
        for label in observed:
            tp = sum(
                1
                for g in golds
                if g.label == label and pred_map.get((g.doc_id, g.head, g.tail)) == label
            )
            fn = sum(1 for g in golds if g.label == label) - tp
            gold_keys = {
                (g.doc_id, g.head, g.tail) for g in golds if g.label == label
            }
            fp = sum(
                1
                for p in preds
                if p.predicted == label and (p.doc_id, p.head, p.tail) not in gold_keys
            )
            m = report.per_class[label]
            assert (m.tp, m.fp, m.fn) == (tp, fp, fn)

    # Site row: F1(0.72, 0.82) renders as 0.77
    site = report_from_counts({"Site": (1330, 517, 292)})
    row = render_report(site, "table").splitlines()[1].split()
    assert row == ["Site", "0.72", "0.82", "0.77", "1622"]
    # micro row from pooled counts
    pooled = report_from_counts({"All": (14064, 8992, 2290)})
    micro = [
        line
        for line in render_report(pooled, "table").splitlines()
        if line.startswith("Micro-Avg")
    ][0].split()
    assert micro == ["Micro-Avg", "0.61", "0.86", "0.71", "16354"]
    print(
        "\n[PASS] metric oracle equivalence: 1000 random sets exact;"
        " Site row renders 0.72 0.82 0.77; micro row renders 0.61 0.86 0.71 16354"
    )


def test_c6_baseline_end_to_end(tmp_path):
    config = PipelineConfig(corpus_dir=str(FIXTURE_DIR))
    first = run_pipeline(config, tmp_path / "run1")
    second = run_pipeline(config, tmp_path / "run2")
    bytes1 = (tmp_path / "run1" / "predictions.jsonl").read_bytes()
    bytes2 = (tmp_path / "run2" / "predictions.jsonl").read_bytes()
    assert bytes1 == bytes2, "same seed must give byte-identical prediction files"

    report = json.loads((tmp_path / "run1" / "report.json").read_text())
    model_f1 = report["micro"]["f1"]

    # majority-class baseline on the same split
    examples = read_examples(tmp_path / "run1" / "sequences.jsonl")
    train_ids = set(first.splits["train"])
    test_ids = set(first.splits["test"])
    majority = collections.Counter(
        ex.label for ex in examples if ex.doc_id in train_ids
    ).most_common(1)[0][0]
    docs = read_corpus(tmp_path / "run1" / "corpus.jsonl")
    gold = gold_from_documents([d for d in docs if d.doc_id in test_ids])
    majority_preds = [
        PredictionRecord(ex.doc_id, ex.head, ex.tail, majority)
        for ex in examples
        if ex.doc_id in test_ids
    ]
    majority_f1 = score(majority_preds, gold).micro.f1
    assert model_f1 > majority_f1
    print(
        f"\n[PASS] baseline end-to-end: micro-F1 {model_f1:.3f} >"
        f" majority {majority_f1:.3f}; prediction files byte-identical"
    )


def test_c7_table_scale_note():
    """Full-scale absolute scores need transformer fine-tuning on the real
    corpus and are out of desk scope; the property suites above and the
    bridge smoke suite stand in for them."""
    print(
        "\n[NOTE] absolute micro-F1 0.71 / macro-F1 0.52 are not asserted at"
        " desk scale; covered by property suites and the bridge smoke test"
    )
