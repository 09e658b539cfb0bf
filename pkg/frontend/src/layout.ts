// Seeded force-directed layout. Hand-rolled rather than pulled from a
// library so identical inputs give identical positions - scene snapshots in
// tests depend on that. Runs a fixed number of iterations of repulsion +
// edge springs + centering with velocity damping.

import { GraphPayload } from "./types.js";

export interface LayoutOptions {
  width: number;
  height: number;
  seed: number;
  iterations?: number;
}

export type Positions = Map<string, { x: number; y: number }>;

/** mulberry32: tiny deterministic PRNG, good enough for jitter. */
export function seededRandom(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function computeLayout(graph: GraphPayload, opts: LayoutOptions): Positions {
  const { width, height, seed } = opts;
  const iterations = opts.iterations ?? 250;
  const n = graph.nodes.length;
  const rand = seededRandom(seed);
  const cx = width / 2;
  const cy = height / 2;
  const spread = Math.min(width, height) * 0.35;

  const index = new Map<string, number>();
  graph.nodes.forEach((node, i) => index.set(node.id, i));
  const x = new Float64Array(n);
  const y = new Float64Array(n);
  const vx = new Float64Array(n);
  const vy = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    // ring placement plus jitter avoids coincident starts
    const angle = (2 * Math.PI * i) / Math.max(1, n);
    x[i] = cx + spread * Math.cos(angle) + (rand() - 0.5) * 10;
    y[i] = cy + spread * Math.sin(angle) + (rand() - 0.5) * 10;
  }

  const springs = graph.edges
    .map((e) => ({ a: index.get(e.src)!, b: index.get(e.dst)!, w: e.weight }))
    .filter((s) => s.a !== undefined && s.b !== undefined);
  const maxWeight = springs.reduce((m, s) => Math.max(m, s.w), 1);
  const restLength = spread * 0.6;
  const repulsion = (spread * spread) / Math.max(1, n);

  for (let it = 0; it < iterations; it++) {
    const cooling = 1 - it / iterations;
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const dx = x[i] - x[j];
        const dy = y[i] - y[j];
        const d2 = dx * dx + dy * dy + 1e-6;
        const f = (repulsion * 40) / d2;
        const d = Math.sqrt(d2);
        vx[i] += (dx / d) * f;
        vy[i] += (dy / d) * f;
        vx[j] -= (dx / d) * f;
        vy[j] -= (dy / d) * f;
      }
    }
    for (const s of springs) {
      const dx = x[s.b] - x[s.a];
      const dy = y[s.b] - y[s.a];
      const d = Math.sqrt(dx * dx + dy * dy) + 1e-6;
      // heavier edges pull harder and sit closer
      const strength = 0.02 * (0.3 + (0.7 * s.w) / maxWeight);
      const f = strength * (d - restLength);
      vx[s.a] += (dx / d) * f;
      vy[s.a] += (dy / d) * f;
      vx[s.b] -= (dx / d) * f;
      vy[s.b] -= (dy / d) * f;
    }
    for (let i = 0; i < n; i++) {
      vx[i] += (cx - x[i]) * 0.005;
      vy[i] += (cy - y[i]) * 0.005;
      x[i] += vx[i] * cooling;
      y[i] += vy[i] * cooling;
      vx[i] *= 0.6;
      vy[i] *= 0.6;
      x[i] = Math.min(width - 20, Math.max(20, x[i]));
      y[i] = Math.min(height - 20, Math.max(20, y[i]));
    }
  }

  const positions: Positions = new Map();
  graph.nodes.forEach((node, i) => positions.set(node.id, { x: x[i], y: y[i] }));
  return positions;
}
