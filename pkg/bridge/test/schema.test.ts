import { describe, expect, test } from 'vitest';

import {
  isZerosThenOnes,
  predictionSchema,
  readExamples,
  sequenceExampleSchema,
} from '../src/schema.js';

const valid = {
  doc_id: 'd1',
  head: 'T1',
  tail: 'T2',
  tokens: ['[CLS]', '5mL', '[SEP]', 'Amount', '[SEP]', 'water', '[SEP]', 'Reagent', '[SEP]', 'x'],
  type_ids: [0, 0, 0, 0, 0, 0, 0, 0, 0, 1],
  label: 'Measure',
};

describe('sequence example schema', () => {
  test('accepts a well-formed record', () => {
    expect(sequenceExampleSchema.safeParse(valid).success).toBe(true);
  });

  test('rejects length mismatch', () => {
    const bad = { ...valid, type_ids: [0, 1] };
    expect(sequenceExampleSchema.safeParse(bad).success).toBe(false);
  });

  test('rejects non 0+1+ masks', () => {
    const bad = { ...valid, type_ids: [0, 0, 1, 0, 0, 0, 0, 0, 0, 1] };
    expect(sequenceExampleSchema.safeParse(bad).success).toBe(false);
    const alsoBad = { ...valid, type_ids: valid.type_ids.map(() => 0) };
    expect(sequenceExampleSchema.safeParse(alsoBad).success).toBe(false);
  });

  test('rejects out-of-range type ids', () => {
    const bad = { ...valid, type_ids: [...valid.type_ids.slice(0, 9), 2] };
    expect(sequenceExampleSchema.safeParse(bad).success).toBe(false);
  });
});

describe('mask helper', () => {
  test('recognizes zeros-then-ones runs', () => {
    expect(isZerosThenOnes([0, 0, 1, 1])).toBe(true);
    expect(isZerosThenOnes([1, 1])).toBe(true);
    expect(isZerosThenOnes([0, 1, 0])).toBe(false);
    expect(isZerosThenOnes([0, 0])).toBe(false);
  });
});

describe('prediction schema', () => {
  test('accepts the shared predictions shape', () => {
    const record = {
      doc_id: 'd1',
      head: 'T1',
      tail: 'T2',
      predicted: 'Measure',
      scores: { Measure: 0.8, NoRelation: 0.2 },
    };
    expect(predictionSchema.safeParse(record).success).toBe(true);
  });

  test('rejects missing scores', () => {
    const record = { doc_id: 'd1', head: 'T1', tail: 'T2', predicted: 'Measure' };
    expect(predictionSchema.safeParse(record).success).toBe(false);
  });
});

describe('fixture exchange files', () => {
  test('parse and carry labels', () => {
    const examples = readExamples('fixtures/train.jsonl');
    expect(examples.length).toBe(200);
    expect(new Set(examples.map((e) => e.label)).size).toBeGreaterThan(2);
  });
});
