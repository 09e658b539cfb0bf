// Pure view-state transitions. The scene is a function of (graph, state),
// so every interaction is expressible as one of these.

import { GraphPayload, Subgraph, ViewState } from "./types.js";

export function initialViewState(): ViewState {
  return { activeSubgraph: "all", selectedNode: null, weightFloor: 0, searchQuery: "" };
}

export function toggleSubgraph(state: ViewState, kind: Subgraph): ViewState {
  return { ...state, activeSubgraph: kind };
}

export function selectNode(
  state: ViewState,
  graph: GraphPayload,
  nodeId: string | null,
): ViewState {
  if (nodeId !== null && !graph.nodes.some((n) => n.id === nodeId)) {
    return state; // unknown ids never enter the state
  }
  return { ...state, selectedNode: nodeId };
}

export function setWeightFloor(state: ViewState, floor: number): ViewState {
  return { ...state, weightFloor: Math.max(0, floor) };
}

export function setSearchQuery(state: ViewState, query: string): ViewState {
  return { ...state, searchQuery: query };
}

/**
 * Starting weight floor for a graph: 0 for comfortably sized graphs, raised
 * just enough to keep at most `maxEdges` edges visible for large ones.
 */
export function defaultWeightFloor(graph: GraphPayload, maxEdges = 2000): number {
  if (graph.edges.length <= maxEdges) return 0;
  const weights = graph.edges.map((e) => e.weight).sort((a, b) => b - a);
  return weights[maxEdges - 1];
}
