// Scene construction: a pure function of (graph, layout, view state) that
// yields everything the renderer draws. Replaying the same state sequence on
// the same payload reproduces the same scene, byte for byte.

import { formatNumber } from "./format.js";
import { Positions } from "./layout.js";
import { EdgeKind, GraphPayload, Subgraph, ViewState } from "./types.js";

export const KIND_COLORS = { word: "#e8a33d", doc: "#d14b4b" } as const;

const RADIUS_MIN = 6;
const RADIUS_MAX = 26;
const STROKE_MIN = 0.8;
const STROKE_MAX = 5.5;

export interface SceneNode {
  id: string;
  kind: "word" | "doc";
  x: number;
  y: number;
  radius: number;
  color: string;
  label: string;
  dominanceLabel: string;
  selected: boolean;
  highlighted: boolean;
}

export interface SceneEdge {
  key: string;
  kind: EdgeKind;
  src: string;
  dst: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  strokeWidth: number;
  weightLabel: string;
}

export interface Scene {
  nodes: SceneNode[];
  edges: SceneEdge[];
}

/** Strictly monotone map from dominance to radius (sqrt keeps area readable). */
export function nodeRadius(dominance: number, maxDominance: number): number {
  const scale = maxDominance > 0 ? Math.sqrt(dominance / maxDominance) : 0;
  return RADIUS_MIN + (RADIUS_MAX - RADIUS_MIN) * scale;
}

/** Strictly monotone map from edge weight to stroke width. */
export function edgeStrokeWidth(weight: number, maxWeight: number): number {
  const scale = maxWeight > 0 ? weight / maxWeight : 0;
  return STROKE_MIN + (STROKE_MAX - STROKE_MIN) * scale;
}

export function edgeMatchesSubgraph(kind: EdgeKind, active: Subgraph): boolean {
  return active === "all" || kind === active;
}

function nodeMatchesSearch(keywords: string[], id: string, query: string): boolean {
  const q = query.trim().toLowerCase();
  if (!q) return false;
  if (id.toLowerCase() === q) return true;
  return keywords.some((k) => k.toLowerCase().includes(q));
}

export function buildScene(
  graph: GraphPayload,
  positions: Positions,
  view: ViewState,
): Scene {
  const maxDominance = graph.nodes.reduce((m, n) => Math.max(m, n.dominance), 0);
  const maxWeight = graph.edges.reduce((m, e) => Math.max(m, e.weight), 0);

  const nodes: SceneNode[] = graph.nodes.map((node) => {
    const pos = positions.get(node.id) ?? { x: 0, y: 0 };
    return {
      id: node.id,
      kind: node.kind,
      x: pos.x,
      y: pos.y,
      radius: nodeRadius(node.dominance, maxDominance),
      color: KIND_COLORS[node.kind],
      label: node.id,
      dominanceLabel: formatNumber(node.dominance),
      selected: view.selectedNode === node.id,
      highlighted: nodeMatchesSearch(node.keywords, node.id, view.searchQuery),
    };
  });

  const edges: SceneEdge[] = [];
  for (const edge of graph.edges) {
    if (!edgeMatchesSubgraph(edge.kind, view.activeSubgraph)) continue;
    if (edge.weight < view.weightFloor) continue;
    const a = positions.get(edge.src);
    const b = positions.get(edge.dst);
    if (!a || !b) continue;
    edges.push({
      key: `${edge.kind}:${edge.src}:${edge.dst}`,
      kind: edge.kind,
      src: edge.src,
      dst: edge.dst,
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
      strokeWidth: edgeStrokeWidth(edge.weight, maxWeight),
      weightLabel: formatNumber(edge.weight),
    });
  }
  return { nodes, edges };
}

/** Stable serialization of a scene, used to compare replayed snapshots. */
export function sceneSnapshot(scene: Scene): string {
  return JSON.stringify(scene);
}
