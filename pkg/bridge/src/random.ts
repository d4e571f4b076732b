/** Small deterministic PRNG utilities so training is reproducible. */

export type Rand = () => number;

/** mulberry32: fast seeded generator over [0, 1). */
export function mulberry32(seed: number): Rand {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Fisher-Yates shuffle into a new array. */
export function shuffled<T>(items: readonly T[], rand: Rand): T[] {
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

/** Box-Muller normals with the given standard deviation. */
export function normals(count: number, std: number, rand: Rand): Float32Array {
  const out = new Float32Array(count);
  for (let i = 0; i < count; i += 2) {
    const u = Math.max(rand(), 1e-12);
    const v = rand();
    const mag = Math.sqrt(-2 * Math.log(u)) * std;
    out[i] = mag * Math.cos(2 * Math.PI * v);
    if (i + 1 < count) {
      out[i + 1] = mag * Math.sin(2 * Math.PI * v);
    }
  }
  return out;
}
