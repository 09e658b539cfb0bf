// Payload shapes exactly as the graph service emits them.

export type TopicKind = "word" | "doc";
export type EdgeKind = "ww" | "dd" | "wd";

export interface GraphNode {
  id: string;
  kind: TopicKind;
  dominance: number;
  keywords: string[];
  top_docs: { doc: string; weight: number }[];
}

export interface GraphEdge {
  kind: EdgeKind;
  src: string;
  dst: string;
  cooccurrence: number;
  weight: number;
}

export interface GraphPayload {
  meta: {
    kw: number;
    ky: number;
    model_hash: string;
    prior: number;
    threshold: number;
  };
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface TopicDetail extends GraphNode {
  top_docs: { doc: string; weight: number; title?: string }[];
  edges: GraphEdge[];
}

export interface DocDetail {
  id: string;
  snippet: string;
  theta: number[];
}

export type Subgraph = "all" | "ww" | "dd" | "wd";

export interface ViewState {
  activeSubgraph: Subgraph;
  selectedNode: string | null;
  weightFloor: number;
  searchQuery: string;
}
