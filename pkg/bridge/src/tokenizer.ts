/**
 * WordPiece-style sub-tokenizer over the exchange format's whole tokens.
 *
 * Marker and structural tokens are registered as single added-vocabulary
 * ids and are never split. Unknown words fall back to greedy
 * longest-match pieces with a '##' continuation prefix; the vocabulary
 * always contains every single character seen at build time, so [UNK]
 * only appears for characters never seen in training.
 */

import type { SequenceExample } from './schema.js';

export const PAD = '[PAD]';
export const UNK = '[UNK]';

export interface EncodedExample {
  docId: string;
  head: string;
  tail: string;
  ids: number[];
  typeIds: number[];
  label: string;
}

export interface TokenizerJson {
  special: string[];
  vocab: string[];
}

export class WordPieceTokenizer {
  readonly special: Set<string>;
  private readonly ids = new Map<string, number>();
  private readonly maxPieceLength: number;

  constructor(special: string[], vocab: string[]) {
    this.special = new Set(special);
    vocab.forEach((entry, i) => this.ids.set(entry, i));
    this.maxPieceLength = Math.max(...vocab.map((v) => v.length), 1);
  }

  /**
   * Build a vocabulary from training examples: special tokens first, then
   * whole lowercased words with at least minCount occurrences, then every
   * single character as both word-start and continuation pieces.
   */
  static build(
    examples: readonly SequenceExample[],
    special: readonly string[],
    minCount = 1,
  ): WordPieceTokenizer {
    const specials = [PAD, UNK, ...special.filter((s) => s !== PAD && s !== UNK)];
    const counts = new Map<string, number>();
    const chars = new Set<string>();
    for (const ex of examples) {
      for (const token of ex.tokens) {
        if (specials.includes(token)) continue;
        const word = token.toLowerCase();
        counts.set(word, (counts.get(word) ?? 0) + 1);
        for (const ch of word) chars.add(ch);
      }
    }
    const vocab = [...specials];
    for (const [word, n] of [...counts.entries()].sort()) {
      if (n >= minCount && !vocab.includes(word)) vocab.push(word);
    }
    for (const ch of [...chars].sort()) {
      if (!vocab.includes(ch)) vocab.push(ch);
      vocab.push(`##${ch}`);
    }
    return new WordPieceTokenizer(specials, vocab);
  }

  get vocabSize(): number {
    return this.ids.size;
  }

  idOf(entry: string): number {
    const id = this.ids.get(entry);
    if (id === undefined) throw new Error(`not in vocabulary: ${entry}`);
    return id;
  }

  /** Sub-token ids for one whole token; specials map to single ids. */
  encodeWord(token: string): number[] {
    if (this.special.has(token)) return [this.idOf(token)];
    const word = token.toLowerCase();
    const whole = this.ids.get(word);
    if (whole !== undefined) return [whole];
    const pieces: number[] = [];
    let pos = 0;
    while (pos < word.length) {
      let end = Math.min(word.length, pos + this.maxPieceLength);
      let found = -1;
      while (end > pos) {
        const piece = pos === 0 ? word.slice(pos, end) : `##${word.slice(pos, end)}`;
        const id = this.ids.get(piece);
        if (id !== undefined) {
          found = id;
          break;
        }
        end--;
      }
      if (found < 0) return [this.idOf(UNK)];
      pieces.push(found);
      pos = end;
    }
    return pieces;
  }

  toJSON(): TokenizerJson {
    const vocab = new Array<string>(this.ids.size);
    for (const [entry, id] of this.ids) vocab[id] = entry;
    return { special: [...this.special], vocab };
  }

  static fromJSON(payload: TokenizerJson): WordPieceTokenizer {
    return new WordPieceTokenizer(payload.special, payload.vocab);
  }
}

/**
 * Sub-tokenize one exchange example. Every sub-token inherits the type id
 * of its source token, so the 0+1+ mask shape survives expansion. When the
 * result exceeds maxTokens, context sub-tokens are trimmed from whichever
 * window edge is farther from the marked entity block; marker sub-tokens
 * and everything between them are never dropped.
 */
export function encodeExample(
  ex: SequenceExample,
  tokenizer: WordPieceTokenizer,
  maxTokens: number,
  markers: readonly string[] = ['[EntA]', '[EntB]'],
): EncodedExample {
  const ids: number[] = [];
  const typeIds: number[] = [];
  const markerPositions: number[] = [];
  const markerIds = new Set(markers.map((m) => tokenizer.idOf(m)));
  for (let i = 0; i < ex.tokens.length; i++) {
    for (const id of tokenizer.encodeWord(ex.tokens[i])) {
      if (markerIds.has(id)) markerPositions.push(ids.length);
      ids.push(id);
      typeIds.push(ex.type_ids[i]);
    }
  }
  if (ids.length <= maxTokens) {
    return { docId: ex.doc_id, head: ex.head, tail: ex.tail, ids, typeIds, label: ex.label };
  }

  const contextStart = typeIds.indexOf(1);
  const keepLo = markerPositions[0];
  const keepHi = markerPositions[markerPositions.length - 1];
  const budget = maxTokens - contextStart;
  if (budget < keepHi - keepLo + 1) {
    throw new Error(
      `${ex.doc_id} ${ex.head}->${ex.tail}: marked context alone exceeds ${maxTokens} sub-tokens`,
    );
  }
  let lo = contextStart;
  let hi = ids.length - 1;
  while (hi - lo + 1 > budget) {
    if (keepLo - lo > hi - keepHi) {
      lo++;
    } else {
      hi--;
    }
  }
  return {
    docId: ex.doc_id,
    head: ex.head,
    tail: ex.tail,
    ids: ids.slice(0, contextStart).concat(ids.slice(lo, hi + 1)),
    typeIds: typeIds.slice(0, contextStart).concat(typeIds.slice(lo, hi + 1)),
    label: ex.label,
  };
}
