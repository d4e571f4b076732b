/**
 * Compact transformer encoder with a classification head.
 *
 * Token + binary segment embeddings with sinusoidal positions feed a
 * pre-norm encoder stack; the first position is pooled for the label
 * logits. The binary segment ids carry the exchange format's 0/1 token
 * type mask. All weights are initialized from a seeded generator, so
 * training runs are reproducible on the CPU backend.
 */

import * as tf from '@tensorflow/tfjs';
import { mulberry32, normals } from './random.js';

export interface ModelConfig {
  vocabSize: number;
  numLabels: number;
  maxLen: number;
  dModel: number;
  numLayers: number;
  numHeads: number;
  dFF: number;
  seed: number;
}

export const MODEL_DEFAULTS = { dModel: 48, numLayers: 2, numHeads: 4, dFF: 96 };

const INIT_STD = 0.02;

export interface Batch {
  ids: number[][];
  typeIds: number[][];
}

export class TinyTransformerClassifier {
  readonly config: ModelConfig;
  private readonly vars = new Map<string, tf.Variable>();
  private readonly positional: tf.Tensor3D;

  constructor(config: ModelConfig, weights?: Map<string, Float32Array>) {
    this.config = config;
    const rand = mulberry32(config.seed);
    const add = (name: string, shape: number[], init: 'normal' | 'zeros' | 'ones') => {
      const size = shape.reduce((a, b) => a * b, 1);
      let values: Float32Array;
      if (weights) {
        const stored = weights.get(name);
        if (!stored) throw new Error(`missing weight tensor: ${name}`);
        values = stored;
      } else {
        values =
          init === 'normal'
            ? normals(size, INIT_STD, rand)
            : new Float32Array(size).fill(init === 'ones' ? 1 : 0);
      }
      this.vars.set(name, tf.variable(tf.tensor(values, shape), true, name));
    };

    add('tok_emb', [config.vocabSize, config.dModel], 'normal');
    add('seg_emb', [2, config.dModel], 'normal');
    for (let l = 0; l < config.numLayers; l++) {
      for (const mat of ['wq', 'wk', 'wv', 'wo']) {
        add(`l${l}.${mat}`, [config.dModel, config.dModel], 'normal');
      }
      add(`l${l}.ln1_g`, [config.dModel], 'ones');
      add(`l${l}.ln1_b`, [config.dModel], 'zeros');
      add(`l${l}.ffn_w1`, [config.dModel, config.dFF], 'normal');
      add(`l${l}.ffn_b1`, [config.dFF], 'zeros');
      add(`l${l}.ffn_w2`, [config.dFF, config.dModel], 'normal');
      add(`l${l}.ffn_b2`, [config.dModel], 'zeros');
      add(`l${l}.ln2_g`, [config.dModel], 'ones');
      add(`l${l}.ln2_b`, [config.dModel], 'zeros');
    }
    add('ln_f_g', [config.dModel], 'ones');
    add('ln_f_b', [config.dModel], 'zeros');
    add('cls_w', [config.dModel, config.numLabels], 'normal');
    add('cls_b', [config.numLabels], 'zeros');

    this.positional = sinusoidalPositions(config.maxLen, config.dModel);
  }

  private v(name: string): tf.Variable {
    const variable = this.vars.get(name);
    if (!variable) throw new Error(`unknown variable ${name}`);
    return variable;
  }

  trainables(): tf.Variable[] {
    return [...this.vars.values()];
  }

  /** Logits [batch, numLabels] for padded id/segment matrices. */
  forward(batch: Batch): tf.Tensor2D {
    const { dModel, numHeads } = this.config;
    const dHead = dModel / numHeads;
    return tf.tidy(() => {
      const b = batch.ids.length;
      const len = batch.ids[0].length;
      const ids = tf.tensor2d(batch.ids, [b, len], 'int32');
      const segs = tf.tensor2d(batch.typeIds, [b, len], 'int32');

      // pad id 0 masks attention
      const padMask = tf.cast(tf.notEqual(ids, 0), 'float32');
      const attnBias = padMask
        .sub(1)
        .mul(1e9)
        .reshape([b, 1, 1, len]);

      let x = tf
        .gather(this.v('tok_emb'), ids.flatten())
        .reshape([b, len, dModel])
        .add(tf.gather(this.v('seg_emb'), segs.flatten()).reshape([b, len, dModel]))
        .add(this.positional.slice([0, 0, 0], [1, len, dModel]));

      for (let l = 0; l < this.config.numLayers; l++) {
        const normed1 = layerNorm(x, this.v(`l${l}.ln1_g`), this.v(`l${l}.ln1_b`));
        const project = (name: string) =>
          tf
            .matMul(normed1.reshape([b * len, dModel]), this.v(`l${l}.${name}`))
            .reshape([b, len, numHeads, dHead])
            .transpose([0, 2, 1, 3]);
        const q = project('wq');
        const k = project('wk');
        const vv = project('wv');
        const scores = tf
          .matMul(q, k, false, true)
          .div(Math.sqrt(dHead))
          .add(attnBias);
        const context = tf
          .matMul(tf.softmax(scores), vv)
          .transpose([0, 2, 1, 3])
          .reshape([b * len, dModel]);
        const attentionOut = tf.matMul(context, this.v(`l${l}.wo`)).reshape([b, len, dModel]);
        x = x.add(attentionOut);

        const normed2 = layerNorm(x, this.v(`l${l}.ln2_g`), this.v(`l${l}.ln2_b`));
        const hidden = tf
          .matMul(normed2.reshape([b * len, dModel]), this.v(`l${l}.ffn_w1`))
          .add(this.v(`l${l}.ffn_b1`))
          .relu();
        const ffnOut = tf
          .matMul(hidden, this.v(`l${l}.ffn_w2`))
          .add(this.v(`l${l}.ffn_b2`))
          .reshape([b, len, dModel]);
        x = x.add(ffnOut);
      }

      const pooled = layerNorm(x, this.v('ln_f_g'), this.v('ln_f_b'))
        .slice([0, 0, 0], [b, 1, dModel])
        .reshape([b, dModel]);
      return tf.matMul(pooled, this.v('cls_w')).add(this.v('cls_b')) as tf.Tensor2D;
    });
  }

  /** Snapshot of all weights as plain arrays (for checkpoints and saving). */
  exportWeights(): Map<string, Float32Array> {
    const out = new Map<string, Float32Array>();
    for (const [name, variable] of this.vars) {
      out.set(name, new Float32Array(variable.dataSync() as Float32Array));
    }
    return out;
  }

  importWeights(weights: Map<string, Float32Array>): void {
    for (const [name, variable] of this.vars) {
      const stored = weights.get(name);
      if (!stored) throw new Error(`missing weight tensor: ${name}`);
      variable.assign(tf.tensor(stored, variable.shape));
    }
  }

  dispose(): void {
    for (const variable of this.vars.values()) variable.dispose();
    this.positional.dispose();
  }
}

function layerNorm(x: tf.Tensor, gamma: tf.Tensor, beta: tf.Tensor): tf.Tensor {
  const mean = x.mean(-1, true);
  const variance = x.sub(mean).square().mean(-1, true);
  return x.sub(mean).div(variance.add(1e-6).sqrt()).mul(gamma).add(beta);
}

function sinusoidalPositions(maxLen: number, dModel: number): tf.Tensor3D {
  const data = new Float32Array(maxLen * dModel);
  for (let pos = 0; pos < maxLen; pos++) {
    for (let i = 0; i < dModel; i++) {
      const angle = pos / Math.pow(10000, (2 * Math.floor(i / 2)) / dModel);
      data[pos * dModel + i] = i % 2 === 0 ? Math.sin(angle) : Math.cos(angle);
    }
  }
  return tf.tensor3d(data, [1, maxLen, dModel]);
}
