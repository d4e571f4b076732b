/**
 * Exchange and prediction file schemas shared with the pipeline package,
 * plus JSONL helpers. These two formats are the bridge's only contract
 * with the rest of the system.
 */

import * as fs from 'node:fs';
import { z } from 'zod';

export const sequenceExampleSchema = z
  .object({
    doc_id: z.string(),
    head: z.string(),
    tail: z.string(),
    tokens: z.array(z.string()).min(1),
    type_ids: z.array(z.union([z.literal(0), z.literal(1)])).min(1),
    label: z.string(),
  })
  .refine((ex) => ex.tokens.length === ex.type_ids.length, {
    message: 'tokens and type_ids must have the same length',
  })
  .refine((ex) => isZerosThenOnes(ex.type_ids), {
    message: 'type_ids must be a run of 0s followed by a run of 1s',
  });

export type SequenceExample = z.infer<typeof sequenceExampleSchema>;

export const predictionSchema = z.object({
  doc_id: z.string(),
  head: z.string(),
  tail: z.string(),
  predicted: z.string(),
  scores: z.record(z.string(), z.number()),
});

export type Prediction = z.infer<typeof predictionSchema>;

/** True when the mask matches 0+1+ (or is all zeros before any context). */
export function isZerosThenOnes(mask: readonly number[]): boolean {
  let seenOne = false;
  for (const bit of mask) {
    if (bit === 1) {
      seenOne = true;
    } else if (seenOne) {
      return false;
    }
  }
  return seenOne;
}

export function readExamples(path: string): SequenceExample[] {
  return readJsonl(path).map((row, i) => {
    const parsed = sequenceExampleSchema.safeParse(row);
    if (!parsed.success) {
      throw new Error(`${path}:${i + 1}: invalid sequence example: ${parsed.error.message}`);
    }
    return parsed.data;
  });
}

export function readPredictions(path: string): Prediction[] {
  return readJsonl(path).map((row, i) => {
    const parsed = predictionSchema.safeParse(row);
    if (!parsed.success) {
      throw new Error(`${path}:${i + 1}: invalid prediction: ${parsed.error.message}`);
    }
    return parsed.data;
  });
}

export function readJsonl(path: string): unknown[] {
  const text = fs.readFileSync(path, 'utf-8');
  return text
    .split('\n')
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line));
}

export function writeJsonl(path: string, rows: unknown[]): void {
  const body = rows.map((row) => JSON.stringify(row)).join('\n');
  fs.writeFileSync(path, rows.length > 0 ? body + '\n' : '');
}
