/**
 * Fine-tuning and prediction over the exchange format.
 *
 * The training defaults are 15 epochs, initial learning rate 5e-5, and
 * 100-token inputs, matching the pipeline's standard setup. The sandbox
 * has no model hub, so the "base model" is a compact seeded encoder
 * initialized from scratch; its identifier is recorded in the model
 * metadata.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import * as tf from '@tensorflow/tfjs';

import { TinyTransformerClassifier, MODEL_DEFAULTS, type ModelConfig } from './model.js';
import { mulberry32, shuffled } from './random.js';
import {
  readExamples,
  writeJsonl,
  type Prediction,
  type SequenceExample,
} from './schema.js';
import {
  WordPieceTokenizer,
  encodeExample,
  type EncodedExample,
  type TokenizerJson,
} from './tokenizer.js';

export const NO_RELATION = 'NoRelation';
export const MARKERS = ['[EntA]', '[EntB]'];
export const STRUCTURAL = ['[CLS]', '[SEP]', ...MARKERS];

export interface BridgeConfig {
  epochs: number;
  learningRate: number;
  maxInputTokens: number;
  baseModel: string;
  seed: number;
  batchSize: number;
}

export const BRIDGE_DEFAULTS: BridgeConfig = {
  epochs: 15,
  learningRate: 5e-5,
  maxInputTokens: 100,
  baseModel: 'tiny-encoder-v1',
  seed: 13,
  batchSize: 16,
};

export interface FineTuneResult {
  epochLosses: number[];
  devAccuracies: number[];
  bestEpoch: number;
  labels: string[];
}

interface ModelFile {
  format: 'protorel-bridge';
  version: 1;
  config: BridgeConfig;
  labels: string[];
  tokenizer: TokenizerJson;
  architecture: Omit<ModelConfig, 'seed'>;
  seed: number;
  history: { epochLosses: number[]; devAccuracies: number[]; bestEpoch: number };
}

function labelInventory(examples: readonly SequenceExample[]): string[] {
  const others = [...new Set(examples.map((ex) => ex.label))]
    .filter((label) => label !== NO_RELATION)
    .sort();
  return [NO_RELATION, ...others];
}

function toBatches(
  encoded: readonly EncodedExample[],
  order: readonly number[],
  batchSize: number,
): number[][] {
  const batches: number[][] = [];
  for (let i = 0; i < order.length; i += batchSize) {
    batches.push(order.slice(i, i + batchSize) as number[]);
  }
  return batches;
}

function padBatch(encoded: readonly EncodedExample[], members: readonly number[]) {
  const len = Math.max(...members.map((i) => encoded[i].ids.length));
  const ids = members.map((i) => {
    const row = encoded[i].ids.slice();
    while (row.length < len) row.push(0);
    return row;
  });
  const typeIds = members.map((i) => {
    const row = encoded[i].typeIds.slice();
    while (row.length < len) row.push(0);
    return row;
  });
  return { ids, typeIds };
}

function meanLoss(logits: tf.Tensor2D, labels: number[], numLabels: number): tf.Scalar {
  const onehot = tf.oneHot(tf.tensor1d(labels, 'int32'), numLabels);
  return tf.losses.softmaxCrossEntropy(onehot, logits).asScalar();
}

function accuracy(
  model: TinyTransformerClassifier,
  encoded: readonly EncodedExample[],
  labelIndex: Map<string, number>,
  batchSize: number,
): number {
  if (encoded.length === 0) return 0;
  let correct = 0;
  const order = encoded.map((_, i) => i);
  for (const members of toBatches(encoded, order, batchSize)) {
    const batch = padBatch(encoded, members);
    const predicted = tf.tidy(() => model.forward(batch).argMax(-1).dataSync());
    members.forEach((exampleIndex, row) => {
      if (predicted[row] === (labelIndex.get(encoded[exampleIndex].label) ?? -1)) {
        correct++;
      }
    });
  }
  return correct / encoded.length;
}

export async function fineTune(
  trainPath: string,
  devPath: string,
  outDir: string,
  overrides: Partial<BridgeConfig> = {},
): Promise<FineTuneResult> {
  const config: BridgeConfig = { ...BRIDGE_DEFAULTS, ...overrides };
  await tf.ready();

  const trainExamples = readExamples(trainPath);
  const devExamples = readExamples(devPath);
  if (trainExamples.length === 0) throw new Error('no training examples');

  const labels = labelInventory(trainExamples);
  const labelIndex = new Map(labels.map((label, i) => [label, i]));
  for (const ex of devExamples) {
    if (!labelIndex.has(ex.label)) {
      throw new Error(`label outside inventory: ${ex.label} (dev file vs training labels)`);
    }
  }

  const tokenizer = WordPieceTokenizer.build(trainExamples, STRUCTURAL);
  const encodeAll = (examples: readonly SequenceExample[]) =>
    examples.map((ex) => encodeExample(ex, tokenizer, config.maxInputTokens, MARKERS));
  const train = encodeAll(trainExamples);
  const dev = encodeAll(devExamples);

  const architecture: Omit<ModelConfig, 'seed'> = {
    vocabSize: tokenizer.vocabSize,
    numLabels: labels.length,
    maxLen: config.maxInputTokens,
    ...MODEL_DEFAULTS,
  };
  const model = new TinyTransformerClassifier({ ...architecture, seed: config.seed });
  const optimizer = tf.train.adam(config.learningRate);
  const rand = mulberry32(config.seed ^ 0x5eed);

  const epochLosses: number[] = [];
  const devAccuracies: number[] = [];
  let best = { epoch: -1, accuracy: -1, weights: model.exportWeights() };

  for (let epoch = 0; epoch < config.epochs; epoch++) {
    const order = shuffled(train.map((_, i) => i), rand);
    let lossSum = 0;
    for (const members of toBatches(train, order, config.batchSize)) {
      const batch = padBatch(train, members);
      const batchLabels = members.map((i) => labelIndex.get(train[i].label) as number);
      const cost = optimizer.minimize(
        () => meanLoss(model.forward(batch), batchLabels, labels.length),
        true,
        model.trainables(),
      ) as tf.Scalar;
      lossSum += cost.dataSync()[0] * members.length;
      cost.dispose();
    }
    const epochLoss = lossSum / train.length;
    const devAccuracy = accuracy(model, dev, labelIndex, config.batchSize);
    epochLosses.push(epochLoss);
    devAccuracies.push(devAccuracy);
    console.log(
      `epoch ${epoch + 1}/${config.epochs}  train loss ${epochLoss.toFixed(4)}` +
        `  dev accuracy ${devAccuracy.toFixed(3)}`,
    );
    if (devAccuracy > best.accuracy) {
      best = { epoch, accuracy: devAccuracy, weights: model.exportWeights() };
    }
  }

  fs.mkdirSync(outDir, { recursive: true });
  const file: ModelFile = {
    format: 'protorel-bridge',
    version: 1,
    config,
    labels,
    tokenizer: tokenizer.toJSON(),
    architecture,
    seed: config.seed,
    history: { epochLosses, devAccuracies, bestEpoch: best.epoch },
  };
  fs.writeFileSync(path.join(outDir, 'config.json'), JSON.stringify(file, null, 2) + '\n');
  const weightsJson: Record<string, string> = {};
  for (const [name, values] of best.weights) {
    weightsJson[name] = Buffer.from(values.buffer, values.byteOffset, values.byteLength).toString(
      'base64',
    );
  }
  fs.writeFileSync(path.join(outDir, 'weights.json'), JSON.stringify(weightsJson) + '\n');

  model.dispose();
  optimizer.dispose();
  return { epochLosses, devAccuracies, bestEpoch: best.epoch, labels };
}

export interface LoadedModel {
  model: TinyTransformerClassifier;
  tokenizer: WordPieceTokenizer;
  labels: string[];
  config: BridgeConfig;
}

export function loadModel(modelDir: string): LoadedModel {
  const configPath = path.join(modelDir, 'config.json');
  const weightsPath = path.join(modelDir, 'weights.json');
  if (!fs.existsSync(configPath) || !fs.existsSync(weightsPath)) {
    throw new Error(`model files missing under ${modelDir}`);
  }
  const file = JSON.parse(fs.readFileSync(configPath, 'utf-8')) as ModelFile;
  if (file.format !== 'protorel-bridge') {
    throw new Error(`not a bridge model: ${configPath}`);
  }
  const raw = JSON.parse(fs.readFileSync(weightsPath, 'utf-8')) as Record<string, string>;
  const weights = new Map<string, Float32Array>();
  for (const [name, encoded] of Object.entries(raw)) {
    const buffer = Buffer.from(encoded, 'base64');
    // copy into an aligned buffer; pooled Buffers have arbitrary offsets
    const aligned = buffer.buffer.slice(buffer.byteOffset, buffer.byteOffset + buffer.byteLength);
    weights.set(name, new Float32Array(aligned));
  }
  const model = new TinyTransformerClassifier({ ...file.architecture, seed: file.seed }, weights);
  return {
    model,
    tokenizer: WordPieceTokenizer.fromJSON(file.tokenizer),
    labels: file.labels,
    config: file.config,
  };
}

export async function bridgePredict(
  modelDir: string,
  inputPath: string,
  outputPath: string,
): Promise<number> {
  await tf.ready();
  const { model, tokenizer, labels, config } = loadModel(modelDir);
  const examples = readExamples(inputPath);
  const predictions: Prediction[] = [];
  const batchSize = config.batchSize;
  for (let start = 0; start < examples.length; start += batchSize) {
    const slice = examples.slice(start, start + batchSize);
    const encoded = slice.map((ex) => encodeExample(ex, tokenizer, config.maxInputTokens, MARKERS));
    const batch = padBatch(encoded, encoded.map((_, i) => i));
    const scores = tf.tidy(() => tf.softmax(model.forward(batch)).dataSync());
    slice.forEach((ex, row) => {
      const rowScores: Record<string, number> = {};
      let bestLabel = 0;
      for (let c = 0; c < labels.length; c++) {
        rowScores[labels[c]] = scores[row * labels.length + c];
        if (rowScores[labels[c]] > rowScores[labels[bestLabel]]) bestLabel = c;
      }
      predictions.push({
        doc_id: ex.doc_id,
        head: ex.head,
        tail: ex.tail,
        predicted: labels[bestLabel],
        scores: rowScores,
      });
    });
  }
  writeJsonl(outputPath, predictions);
  model.dispose();
  return predictions.length;
}
