// Detail-panel view models. The server already sorts incident edges by
// weight; sorting again here keeps the invariant local and testable.

import { formatNumber } from "./format.js";
import { DocDetail, GraphEdge, TopicDetail } from "./types.js";

export interface PanelEdgeRow {
  otherId: string;
  kind: string;
  weightLabel: string;
  weight: number;
}

export interface PanelDocRow {
  docId: string;
  title: string;
  weightLabel: string;
}

export interface TopicPanelModel {
  id: string;
  kind: "word" | "doc";
  heading: string;
  dominanceLabel: string;
  wordListTitle: string;
  words: string[];
  docs: PanelDocRow[];
  edges: PanelEdgeRow[];
}

export function buildTopicPanel(detail: TopicDetail): TopicPanelModel {
  const isWord = detail.kind === "word";
  const edges: PanelEdgeRow[] = detail.edges
    .slice()
    .sort((a, b) => b.weight - a.weight)
    .map((edge: GraphEdge) => ({
      otherId: edge.src === detail.id ? edge.dst : edge.src,
      kind: edge.kind,
      weight: edge.weight,
      weightLabel: formatNumber(edge.weight),
    }));
  return {
    id: detail.id,
    kind: detail.kind,
    heading: `${isWord ? "WordTopic" : "DocTopic"} ${detail.id}`,
    dominanceLabel: formatNumber(detail.dominance),
    wordListTitle: isWord ? "Top keywords" : "Indicative words",
    words: detail.keywords,
    docs: detail.top_docs.map((entry) => ({
      docId: entry.doc,
      title: entry.title ?? entry.doc,
      weightLabel: formatNumber(entry.weight),
    })),
    edges,
  };
}

export interface DocPanelModel {
  id: string;
  snippet: string;
  mixture: { topic: string; share: number; shareLabel: string }[];
}

export function buildDocPanel(detail: DocDetail): DocPanelModel {
  return {
    id: detail.id,
    snippet: detail.snippet,
    mixture: detail.theta.map((share, k) => ({
      topic: `w${k}`,
      share,
      shareLabel: formatNumber(share),
    })),
  };
}
