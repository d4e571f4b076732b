#!/usr/bin/env node
/**
 * bridge finetune --train f --dev f --out dir
 *        [--epochs 15 --lr 5e-5 --max-tokens 100 --seed 13 --batch 16 --base id]
 * bridge predict  --model dir --in f --out f
 */

import { BRIDGE_DEFAULTS, bridgePredict, fineTune, type BridgeConfig } from './bridge.js';

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith('--') || i + 1 >= argv.length) {
      throw new Error(`expected --flag value pairs, got ${argv.join(' ')}`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function required(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (!value) throw new Error(`missing required flag --${name}`);
  return value;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  if (command === 'finetune') {
    const flags = parseFlags(rest);
    const overrides: Partial<BridgeConfig> = {};
    if (flags.has('epochs')) overrides.epochs = Number(flags.get('epochs'));
    if (flags.has('lr')) overrides.learningRate = Number(flags.get('lr'));
    if (flags.has('max-tokens')) overrides.maxInputTokens = Number(flags.get('max-tokens'));
    if (flags.has('seed')) overrides.seed = Number(flags.get('seed'));
    if (flags.has('batch')) overrides.batchSize = Number(flags.get('batch'));
    const base = flags.get('base');
    if (base) overrides.baseModel = base;
    const result = await fineTune(
      required(flags, 'train'),
      required(flags, 'dev'),
      required(flags, 'out'),
      overrides,
    );
    console.log(
      `saved best checkpoint (epoch ${result.bestEpoch + 1},` +
        ` dev accuracy ${result.devAccuracies[result.bestEpoch].toFixed(3)})`,
    );
    return 0;
  }
  if (command === 'predict') {
    const flags = parseFlags(rest);
    const count = await bridgePredict(
      required(flags, 'model'),
      required(flags, 'in'),
      required(flags, 'out'),
    );
    console.log(`wrote ${count} predictions`);
    return 0;
  }
  console.error(
    'usage: bridge finetune --train f --dev f --out dir | bridge predict --model dir --in f --out f',
  );
  console.error(
    `finetune defaults: epochs ${BRIDGE_DEFAULTS.epochs}, lr ${BRIDGE_DEFAULTS.learningRate},` +
      ` max-tokens ${BRIDGE_DEFAULTS.maxInputTokens}, seed ${BRIDGE_DEFAULTS.seed}`,
  );
  return 2;
}

main()
  .then((code) => process.exit(code))
  .catch((err) => {
    console.error(`error: ${err.message}`);
    process.exit(2);
  });
