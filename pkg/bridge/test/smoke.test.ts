/**
 * Bridge smoke suite: 2 fine-tuning epochs on the 200-example fixture
 * subset must finish well inside the runtime budget with strictly
 * decreasing training loss, emit schema-valid predictions (one per input
 * line, order preserved), keep sub-token type-id masks 0+1+, and be
 * reproducible for a fixed seed.
 */

import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import { afterAll, beforeAll, describe, expect, test } from 'vitest';

import { MARKERS, STRUCTURAL, bridgePredict, fineTune, type FineTuneResult } from '../src/bridge.js';
import { isZerosThenOnes, predictionSchema, readExamples, readJsonl } from '../src/schema.js';
import { WordPieceTokenizer, encodeExample } from '../src/tokenizer.js';

const TRAIN = 'fixtures/train.jsonl';
const DEV = 'fixtures/dev.jsonl';
const RUNTIME_BUDGET_MS = 10 * 60 * 1000;

let workDir: string;
let result: FineTuneResult;
let elapsedMs: number;

beforeAll(async () => {
  workDir = fs.mkdtempSync(path.join(os.tmpdir(), 'bridge-smoke-'));
  const started = Date.now();
  result = await fineTune(TRAIN, DEV, path.join(workDir, 'model'), { epochs: 2, seed: 13 });
  elapsedMs = Date.now() - started;
}, RUNTIME_BUDGET_MS);

afterAll(() => {
  fs.rmSync(workDir, { recursive: true, force: true });
});

describe('bridge smoke', () => {
  test('training subset has 200 examples', () => {
    expect(readExamples(TRAIN)).toHaveLength(200);
  });

  test('training loss strictly decreases epoch over epoch', () => {
    expect(result.epochLosses).toHaveLength(2);
    for (let i = 1; i < result.epochLosses.length; i++) {
      expect(result.epochLosses[i]).toBeLessThan(result.epochLosses[i - 1]);
    }
  });

  test('fine-tuning fits the runtime budget', () => {
    expect(elapsedMs).toBeLessThan(RUNTIME_BUDGET_MS);
  });

  test('dev accuracy is reported per epoch and a checkpoint is saved', () => {
    expect(result.devAccuracies).toHaveLength(2);
    expect(result.bestEpoch).toBeGreaterThanOrEqual(0);
    expect(fs.existsSync(path.join(workDir, 'model', 'config.json'))).toBe(true);
    expect(fs.existsSync(path.join(workDir, 'model', 'weights.json'))).toBe(true);
  });

  test(
    'predictions are schema-valid, line-aligned, and order preserving',
    { timeout: 120_000 },
    async () => {
      const outPath = path.join(workDir, 'preds.jsonl');
      const count = await bridgePredict(path.join(workDir, 'model'), DEV, outPath);
      const inputs = readExamples(DEV);
      expect(count).toBe(inputs.length);
      const rows = readJsonl(outPath);
      expect(rows).toHaveLength(inputs.length);
      rows.forEach((row, i) => {
        const parsed = predictionSchema.parse(row);
        expect(parsed.doc_id).toBe(inputs[i].doc_id);
        expect(parsed.head).toBe(inputs[i].head);
        expect(parsed.tail).toBe(inputs[i].tail);
        expect(result.labels).toContain(parsed.predicted);
        const total = Object.values(parsed.scores).reduce((a, b) => a + b, 0);
        expect(Math.abs(total - 1)).toBeLessThan(1e-3);
      });
    },
  );

  test('empty input yields an empty predictions file', { timeout: 60_000 }, async () => {
    const emptyIn = path.join(workDir, 'empty.jsonl');
    const emptyOut = path.join(workDir, 'empty-preds.jsonl');
    fs.writeFileSync(emptyIn, '');
    const count = await bridgePredict(path.join(workDir, 'model'), emptyIn, emptyOut);
    expect(count).toBe(0);
    expect(fs.readFileSync(emptyOut, 'utf-8')).toBe('');
  });

  test('sub-token type-id masks stay 0+1+ over the whole subset', () => {
    const examples = readExamples(TRAIN).concat(readExamples(DEV));
    const tokenizer = WordPieceTokenizer.build(examples, STRUCTURAL);
    for (const ex of examples) {
      const encoded = encodeExample(ex, tokenizer, 100, MARKERS);
      expect(isZerosThenOnes(encoded.typeIds)).toBe(true);
    }
  });

  test(
    'fixed seed reproduces the prediction file byte for byte',
    { timeout: RUNTIME_BUDGET_MS },
    async () => {
      const rerunModel = path.join(workDir, 'model-rerun');
      await fineTune(TRAIN, DEV, rerunModel, { epochs: 2, seed: 13 });
      const firstWeights = fs.readFileSync(path.join(workDir, 'model', 'weights.json'), 'utf-8');
      const rerunWeights = fs.readFileSync(path.join(rerunModel, 'weights.json'), 'utf-8');
      expect(rerunWeights).toBe(firstWeights);

      const again = path.join(workDir, 'preds-rerun.jsonl');
      await bridgePredict(rerunModel, DEV, again);
      const first = fs.readFileSync(path.join(workDir, 'preds.jsonl'), 'utf-8');
      expect(fs.readFileSync(again, 'utf-8')).toBe(first);
    },
  );
});
